#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <sys/wait.h>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path& workspace() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "yun_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    std::ofstream(d / "run.json") << R"({
      "seed": 5, "data": ")" + (d / "data.jsonl").string() + R"(", "work_dir": ")" + (d / "work").string() + R"(",
      "model": {"word_dim": 8, "lstm_size": 4, "attention_size": 8, "node_dim": 8, "net_size": 4, "hidden_sizes": [8]},
      "node2vec": {"dimension": 8, "walks_per_node": 4, "walk_length": 10, "window": 3, "epochs": 1},
      "train": {"max_epochs": 2, "learning_rate": 0.5}
    })";
    return d;
  }();
  return dir;
}

struct Run {
  int code;
  std::string err;
};

Run yun(const std::string& args) {
  const fs::path err = workspace() / "stderr.txt";
  const std::string cmd = std::string(YUN_CLI) + " " + args + " 2> " + err.string() + " > /dev/null";
  const int status = std::system(cmd.c_str());
  std::ifstream in(err);
  std::stringstream s;
  s << in.rdbuf();
  return Run{WIFEXITED(status) ? WEXITSTATUS(status) : -1, s.str()};
}

std::string cfg() { return "-c " + (workspace() / "run.json").string(); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("pipeline stages, manifests and skipping") {
  const fs::path work = workspace() / "work";
  Run r = yun("train " + cfg());
  CHECK(r.code == 1);
  CHECK(r.err.find("run `yun preprocess` first") != std::string::npos);

  REQUIRE(yun("synth " + cfg() + " --users 60").code == 0);
  REQUIRE(yun("preprocess " + cfg()).code == 0);
  REQUIRE(yun("build-graph " + cfg()).code == 0);

  r = yun("train " + cfg());
  CHECK(r.code == 1);
  CHECK(r.err.find("run `yun embed-graph` first") != std::string::npos);

  REQUIRE(yun("embed-graph " + cfg()).code == 0);
  REQUIRE(yun("train " + cfg()).code == 0);
  REQUIRE(yun("evaluate " + cfg()).code == 0);

  const fs::path run = work / "runs" / "user_type-yun";
  for (const char* f : {"checkpoint.json", "metrics.json", "curves.csv", "evaluation.json", "evaluation.csv"})
    CHECK(fs::exists(run / f));
  CHECK(slurp(run / "curves.csv").rfind("epoch,split,loss,accuracy,macro_f1\n", 0) == 0);

  std::ifstream mf(work / "manifests" / "train-user_type-yun.json");
  const json m = json::parse(mf);
  CHECK(m.at("seed") == 5);
  CHECK(m.at("config_hash").get<std::string>().size() == 64);
  CHECK(m.at("inputs").size() == 3);
  CHECK(m.at("outputs").size() == 3);

  r = yun("train " + cfg());
  CHECK(r.code == 0);
  CHECK(r.err.find("skipping") != std::string::npos);
  r = yun("train " + cfg() + " --force");
  CHECK(r.err.find("skipping") == std::string::npos);
  r = yun("train " + cfg() + " --seed 6");
  CHECK(r.err.find("skipping") == std::string::npos);
}

TEST_CASE("predict labels unseen records") {
  const fs::path in = workspace() / "unlabeled.jsonl";
  std::ofstream(in) << R"({"user_id":"new1","description":"Certified teacher","location":null,"tweets":["#yoga flow"],"mentioned_ids":[],"type_label":null,"motivation_label":null})"
                    << "\n";
  const fs::path out = workspace() / "pred.jsonl";
  REQUIRE(yun("predict " + cfg() + " --input " + in.string() + " --out " + out.string()).code == 0);
  std::ifstream pf(out);
  std::string line;
  REQUIRE(std::getline(pf, line));
  const json p = json::parse(line);
  const std::string label = p.at("label");
  CHECK((label == "practitioner" || label == "promotional" || label == "other"));
  double total = 0;
  for (const auto& [k, v] : p.at("probabilities").items()) total += v.get<double>();
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("exit codes") {
  CHECK(yun("train " + cfg() + " --variant nothing").code == 1);
  CHECK(yun("frobnicate").code == 1);
  const fs::path bad = workspace() / "bad.json";
  std::ofstream(bad) << R"({"unknown": 1})";
  CHECK(yun("preprocess -c " + bad.string()).code == 1);
  const fs::path corrupt_cfg = workspace() / "corrupt.json";
  {
    std::ifstream base(workspace() / "run.json");
    json j = json::parse(base);
    j["work_dir"] = (workspace() / "corrupt_work").string();
    std::ofstream(corrupt_cfg) << j.dump();
  }
  fs::create_directories(workspace() / "corrupt_work" / "runs" / "user_type-yun");
  fs::copy_file(workspace() / "work" / "tokens.jsonl", workspace() / "corrupt_work" / "tokens.jsonl");
  fs::copy_file(workspace() / "work" / "vocab.tsv", workspace() / "corrupt_work" / "vocab.tsv");
  fs::copy_file(workspace() / "work" / "node_embeddings.txt", workspace() / "corrupt_work" / "node_embeddings.txt");
  std::ofstream(workspace() / "corrupt_work" / "runs" / "user_type-yun" / "checkpoint.json") << "{ truncated";
  CHECK(yun("evaluate -c " + corrupt_cfg.string()).code == 1);
  CHECK(yun("synth " + cfg() + " --out /proc/forbidden/data.jsonl").code == 2);
}
