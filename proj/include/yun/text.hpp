#pragma once

// Tweet-aware text preprocessing, vocabularies and embedding tables.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "yun/autodiff.hpp"

namespace yun {

using Tokens = std::vector<std::string>;
using Normalizer = std::function<std::string(const std::string&)>;

struct PreprocessConfig {
  std::set<std::string, std::less<>> stopwords;
  /// Applied to every surviving token; an empty result drops the token.
  /// Unset means identity.
  Normalizer normalizer;
};

/// English stopword list used when no list file is configured.
const std::set<std::string, std::less<>>& default_stopwords();
std::set<std::string, std::less<>> load_stopwords(const std::filesystem::path& path);
PreprocessConfig default_preprocess_config();

/// Whether a code point is treated as an emoji token.
bool is_emoji(char32_t cp);

/// Lowercases, strips URLs, splits into words, #hashtags, @mentions and
/// single-code-point emoji tokens, then drops stopwords and normalizes.
Tokens preprocess(std::string_view text, const PreprocessConfig& config);

std::string join_tokens(std::span<const std::string> tokens);

class Vocabulary {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;
  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocabulary();

  /// Tokens with count >= min_count, ids by descending count then
  /// lexicographic order. Throws on an empty corpus.
  static Vocabulary build(std::span<const Tokens> corpus, std::size_t min_count);

  std::size_t size() const { return tokens_.size(); }
  /// UNK for unknown tokens.
  std::size_t id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  std::size_t count(std::size_t id) const { return counts_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// "token<TAB>count" per line in id order, reserved entries included.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);
  static Vocabulary from_tokens(std::vector<std::string> tokens, std::vector<std::size_t> counts);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_ && a.counts_ == b.counts_;
  }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::size_t> counts_;
  std::unordered_map<std::string, std::size_t> ids_;
  void add(std::string token, std::size_t count);
};

/// Token ids with UNK substitution, head-truncated to max_len.
std::vector<std::size_t> encode_sequence(std::span<const std::string> tokens, const Vocabulary& vocab,
                                         std::size_t max_len);
Tokens decode_sequence(std::span<const std::size_t> ids, const Vocabulary& vocab);

/// vocab x dim matrix of token vectors. Row Vocabulary::kPad stays zero.
struct EmbeddingTable {
  Parameter table;

  std::size_t dim() const { return table.value.cols(); }
  std::size_t rows() const { return table.value.rows(); }
  bool trainable() const { return table.trainable; }

  static EmbeddingTable random(std::size_t vocab_size, std::size_t dim, double scale, std::uint64_t seed);
};

struct Coverage {
  std::size_t found = 0;    // vocabulary tokens that received a pretrained vector
  std::size_t missing = 0;  // vocabulary tokens left at zero (reserved ids excluded)
  std::size_t file_entries = 0;
};

/// Reads "token v1 ... v_dim" lines. Vocabulary tokens absent from the file
/// get zero rows. The table is frozen. An optional leading "count dim"
/// header line is accepted.
EmbeddingTable load_pretrained(const std::filesystem::path& path, const Vocabulary& vocab, std::size_t dim,
                               Coverage* coverage = nullptr);

/// Named vectors in the same text format, used for node embeddings.
using VectorMap = std::map<std::string, std::vector<double>>;
void write_vectors(const std::filesystem::path& path, const std::vector<std::string>& names,
                   const Tensor& matrix);
VectorMap read_vectors(const std::filesystem::path& path, std::size_t dim);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace yun
