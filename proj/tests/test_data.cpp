#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "yun/config.hpp"
#include "yun/dataset.hpp"
#include "yun/errors.hpp"
#include "yun/features.hpp"
#include "yun/graph.hpp"
#include "yun/synth.hpp"

using namespace yun;
namespace fs = std::filesystem;

namespace {

fs::path write_file(const std::string& name, const std::string& content) {
  const fs::path p = fs::temp_directory_path() / ("yun_data_" + name);
  std::ofstream(p, std::ios::binary) << content;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kLine1 =
    R"({"user_id":"a","description":"Yoga teacher","location":"Goa","tweets":["Namaste"],"mentioned_ids":["b"],"type_label":"practitioner","motivation_label":"health"})";
const char* kLine2 =
    R"({"user_id":"b","description":null,"location":null,"tweets":[],"mentioned_ids":[],"type_label":"promotional","motivation_label":"other"})";
const char* kLine3 =
    R"({"user_id":"c","description":"om","location":"Rishikesh","tweets":["#yoga"],"mentioned_ids":[],"type_label":null,"motivation_label":"spiritual"})";

}  // namespace

TEST_CASE("ingest a valid file") {
  const fs::path p = write_file("ok.jsonl", std::string(kLine1) + "\n" + kLine2 + "\n" + kLine3 + "\n");
  const IngestResult r = ingest(p);
  REQUIRE(r.records.size() == 3);
  CHECK_FALSE(r.records[1].location.has_value());
  CHECK(r.summary.type[0] == 1);
  CHECK(r.summary.type_unlabeled == 1);
  CHECK(r.summary.motivation[1] == 1);
  CHECK(r.summary.describe().find("practitioner 33.3%") != std::string::npos);
}

TEST_CASE("duplicate ids name both lines") {
  const fs::path p = write_file("dup.jsonl", std::string(kLine1) + "\n" + kLine2 + "\n" + kLine1 + "\n");
  try {
    ingest(p);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("line 1") != std::string::npos);
  }
}

TEST_CASE("errors are collected per line; lenient mode skips them") {
  const std::string content = std::string(kLine1) + "\n{not json\n" + R"({"user_id":"x","colour":"red"})" + "\n" +
                              R"({"user_id":"y","type_label":"guru"})" + "\n" + kLine2 + "\n";
  const fs::path p = write_file("bad.jsonl", content);
  try {
    ingest(p);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("line 4") != std::string::npos);
  }
  const IngestResult r = ingest(p, true);
  CHECK(r.records.size() == 2);
  CHECK(r.errors.size() == 3);
}

TEST_CASE("records round-trip through the file format") {
  SyntheticSpec s;
  s.num_users = 30;
  const auto records = generate_synthetic(s);
  const fs::path p = fs::temp_directory_path() / "yun_roundtrip.jsonl";
  write_records(p, records);
  CHECK(ingest(p).records == records);
}

TEST_CASE("synthetic data is deterministic and validated") {
  SyntheticSpec s;
  s.num_users = 50;
  s.seed = 9;
  const fs::path a = fs::temp_directory_path() / "yun_synth_a.jsonl";
  const fs::path b = fs::temp_directory_path() / "yun_synth_b.jsonl";
  write_records(a, generate_synthetic(s));
  write_records(b, generate_synthetic(s));
  CHECK(slurp(a) == slurp(b));
  s.seed = 10;
  write_records(b, generate_synthetic(s));
  CHECK(slurp(a) != slurp(b));

  SyntheticSpec bad;
  bad.signal = {0, 0, 0, 0};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad.signal = {1.5, 0, 0, 0};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("description-only signal: evidence lives in the description") {
  SyntheticSpec s;
  s.num_users = 120;
  s.signal = {1, 0, 0, 0};
  const PreprocessConfig pc = default_preprocess_config();
  for (const auto& r : generate_synthetic(s)) {
    const TokenizedUser u = tokenize(r, pc);
    const std::string ty = "dty" + std::to_string(*r.label(Task::UserType));
    bool has_type_token = false;
    for (const auto& t : u.description) {
      if (t.rfind("dty", 0) == 0) CHECK(t.rfind(ty, 0) == 0);
      has_type_token = has_type_token || t.rfind(ty, 0) == 0;
    }
    CHECK(has_type_token);
    for (const auto& t : u.location) CHECK(t.rfind("lty", 0) != 0);
    for (const auto& t : u.tweets) CHECK(t.rfind("tty", 0) != 0);
    for (const auto& m : r.mentioned_ids) CHECK(m.rfind("acct", 0) == 0);
  }
}

TEST_CASE("network-only signal: graph communities align with classes") {
  SyntheticSpec s;
  s.num_users = 90;
  s.signal = {0, 0, 0, 1};
  const auto records = generate_synthetic(s);
  const MentionGraph g = MentionGraph::build(records);
  std::map<std::string, std::size_t> type_of;
  for (const auto& r : records) type_of[r.user_id] = *r.label(Task::UserType);
  for (const auto& r : records) {
    const std::size_t t = *r.label(Task::UserType);
    for (NodeId n : g.neighbors(*g.find(r.user_id))) {
      const std::string& other = g.name(n);
      if (auto it = type_of.find(other); it != type_of.end()) CHECK(it->second == t);
      else CHECK(other.rfind("hub" + std::to_string(t) + "_", 0) == 0);
    }
  }
}

TEST_CASE("tokenized users round-trip and encode with truncation") {
  SyntheticSpec s;
  s.num_users = 10;
  const PreprocessConfig pc = default_preprocess_config();
  std::vector<TokenizedUser> users;
  for (const auto& r : generate_synthetic(s)) users.push_back(tokenize(r, pc));
  const fs::path p = fs::temp_directory_path() / "yun_tokens.jsonl";
  write_tokenized(p, users);
  CHECK(read_tokenized(p) == users);

  const Vocabulary v = Vocabulary::build(token_corpus(users), 1);
  TextConfig tc;
  tc.max_len_tweets = 3;
  const EncodedUser e = encode_user_inputs(users[0], v, tc, nullptr, 4);
  CHECK(e.tweets.size() == 3);
  CHECK(e.node == Tensor(1, 4));
  CHECK(e.type_label == users[0].type_label);
}

TEST_CASE("config: defaults, overrides and rejection") {
  const RunConfig d = RunConfig::from_json(nlohmann::json::object());
  CHECK(d.model.word_dim == 300);
  CHECK(d.model.lstm_size == 150);
  CHECK(d.model.attention_size == 300);
  CHECK(d.model.hidden_sizes == std::vector<std::size_t>{200});
  CHECK(d.node2vec.walks.walks_per_node == 10);
  CHECK(d.node2vec.walks.walk_length == 80);
  CHECK(d.node2vec.skipgram.window == 10);
  CHECK(d.node2vec.skipgram.dim == 300);
  CHECK(d.node2vec.min_count == 1);
  CHECK(d.text.max_len_description == 160);
  CHECK(d.text.max_len_location == 50);
  CHECK(d.text.max_len_tweets == 500);
  CHECK(d.train.max_epochs == 30);
  CHECK(d.split.train == 0.6);

  const auto j = nlohmann::json::parse(R"({"seed": 7, "train": {"patience": null, "variant": "des_loc"},
                                           "model": {"hidden_sizes": [600, 200]}})");
  const RunConfig c = RunConfig::from_json(j);
  CHECK(c.train.seed == 7);
  CHECK(c.split.seed == 7);
  CHECK(c.node2vec.walks.seed == 7);
  CHECK(c.train.patience == kNoPatience);
  CHECK(c.train.variant == ModelVariant{true, true, false, false});
  CHECK(RunConfig::from_json(c.to_json()).hash() == c.hash());
  CHECK(c.hash() != d.hash());

  CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(R"({"sed": 1})")), ValidationError);
  CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(R"({"model": {"lstm": 3}})")), ValidationError);
  CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(R"({"split": {"train": 0.9}})")), ValidationError);
  CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(R"({"node2vec": {"p": -1}})")), ValidationError);
  CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(R"({"model": {"word_dim": "big"}})")), ValidationError);
  CHECK(RunConfig::from_json(nlohmann::json::parse(R"({"model": {"node_dim": 16}})")).node2vec.skipgram.dim == 16);
  CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(R"({"model": {"node_dim": 16}, "node2vec": {"dimension": 32}})")),
                  ValidationError);
}
