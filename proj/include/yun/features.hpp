#pragma once

// Turns raw user records into model inputs.

#include <filesystem>
#include <optional>
#include <vector>

#include "yun/graph.hpp"
#include "yun/model.hpp"
#include "yun/records.hpp"
#include "yun/text.hpp"

namespace yun {

struct TextConfig {
  std::size_t max_len_description = 160;
  std::size_t max_len_location = 50;
  std::size_t max_len_tweets = 500;
  std::size_t min_count = 1;

  void validate() const;
  friend bool operator==(const TextConfig&, const TextConfig&) = default;
};

struct TokenizedUser {
  std::string user_id;
  Tokens description;
  Tokens location;
  Tokens tweets;  // all tweets concatenated in order
  std::optional<std::size_t> type_label;
  std::optional<std::size_t> motivation_label;

  friend bool operator==(const TokenizedUser&, const TokenizedUser&) = default;
};

/// Missing description or location yields an empty token list.
TokenizedUser tokenize(const UserRecord& record, const PreprocessConfig& config);

/// Every view's tokens of every user, for vocabulary construction.
std::vector<Tokens> token_corpus(const std::vector<TokenizedUser>& users);

/// Id sequences truncated per view; `nodes` supplies the network
/// embedding (zeros when absent or when no table is given).
EncodedUser encode_user_inputs(const TokenizedUser& user, const Vocabulary& vocab, const TextConfig& config,
                               const NodeEmbeddingTable* nodes, std::size_t node_dim);

void write_tokenized(const std::filesystem::path& path, const std::vector<TokenizedUser>& users);
std::vector<TokenizedUser> read_tokenized(const std::filesystem::path& path);

}  // namespace yun
