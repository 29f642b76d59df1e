#include "yun/features.hpp"

#include <fstream>

#include <json.hpp>

#include "yun/errors.hpp"

namespace yun {

using nlohmann::json;

void TextConfig::validate() const {
  if (max_len_description < 1 || max_len_location < 1 || max_len_tweets < 1)
    throw ValidationError("text max_len values must be >= 1");
  if (min_count < 1) throw ValidationError("text min_count must be >= 1");
}

TokenizedUser tokenize(const UserRecord& record, const PreprocessConfig& config) {
  TokenizedUser u;
  u.user_id = record.user_id;
  if (record.description) u.description = preprocess(*record.description, config);
  if (record.location) u.location = preprocess(*record.location, config);
  for (const auto& t : record.tweets) {
    Tokens toks = preprocess(t, config);
    u.tweets.insert(u.tweets.end(), std::make_move_iterator(toks.begin()), std::make_move_iterator(toks.end()));
  }
  u.type_label = record.label(Task::UserType);
  u.motivation_label = record.label(Task::UserMotivation);
  return u;
}

std::vector<Tokens> token_corpus(const std::vector<TokenizedUser>& users) {
  std::vector<Tokens> corpus;
  corpus.reserve(users.size() * 3);
  for (const auto& u : users) {
    corpus.push_back(u.description);
    corpus.push_back(u.location);
    corpus.push_back(u.tweets);
  }
  return corpus;
}

EncodedUser encode_user_inputs(const TokenizedUser& user, const Vocabulary& vocab, const TextConfig& config,
                               const NodeEmbeddingTable* nodes, std::size_t node_dim) {
  EncodedUser e;
  e.user_id = user.user_id;
  e.description = encode_sequence(user.description, vocab, config.max_len_description);
  e.location = encode_sequence(user.location, vocab, config.max_len_location);
  e.tweets = encode_sequence(user.tweets, vocab, config.max_len_tweets);
  if (nodes) {
    if (nodes->dim() != node_dim)
      throw ShapeError("node embedding dimension " + std::to_string(nodes->dim()) + " != model node_dim " +
                       std::to_string(node_dim));
    e.node = nodes->vector_or_zero(user.user_id);
  } else {
    e.node = Tensor(1, node_dim);
  }
  e.type_label = user.type_label;
  e.motivation_label = user.motivation_label;
  return e;
}

void write_tokenized(const std::filesystem::path& path, const std::vector<TokenizedUser>& users) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& u : users) {
    json j;
    j["user_id"] = u.user_id;
    j["description"] = u.description;
    j["location"] = u.location;
    j["tweets"] = u.tweets;
    j["type_label"] = u.type_label ? json(*u.type_label) : json(nullptr);
    j["motivation_label"] = u.motivation_label ? json(*u.motivation_label) : json(nullptr);
    out << j.dump() << '\n';
  }
}

std::vector<TokenizedUser> read_tokenized(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<TokenizedUser> users;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      TokenizedUser u;
      u.user_id = j.at("user_id").get<std::string>();
      u.description = j.at("description").get<Tokens>();
      u.location = j.at("location").get<Tokens>();
      u.tweets = j.at("tweets").get<Tokens>();
      if (!j.at("type_label").is_null()) u.type_label = j["type_label"].get<std::size_t>();
      if (!j.at("motivation_label").is_null()) u.motivation_label = j["motivation_label"].get<std::size_t>();
      users.push_back(std::move(u));
    } catch (const json::exception& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return users;
}

}  // namespace yun
