#include "yun/pipeline.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "yun/checkpoint.hpp"
#include "yun/dataset.hpp"
#include "yun/features.hpp"
#include "yun/graph.hpp"
#include "yun/hashing.hpp"
#include "yun/report.hpp"
#include "yun/text.hpp"
#include "yun/train.hpp"

namespace yun {

namespace fs = std::filesystem;
using nlohmann::json;

namespace paths {
fs::path tokens(const RunConfig& c) { return fs::path(c.work_dir) / "tokens.jsonl"; }
fs::path vocab(const RunConfig& c) { return fs::path(c.work_dir) / "vocab.tsv"; }
fs::path graph(const RunConfig& c) { return fs::path(c.work_dir) / "graph.tsv"; }
fs::path node_embeddings(const RunConfig& c) { return fs::path(c.work_dir) / "node_embeddings.txt"; }
fs::path run_dir(const RunConfig& c) {
  return fs::path(c.work_dir) / "runs" / (std::string(task_name(c.train.task)) + "-" + c.train.variant.name());
}
fs::path manifest(const RunConfig& c, const std::string& stage) {
  return fs::path(c.work_dir) / "manifests" / (stage + ".json");
}
}  // namespace paths

namespace {

void log(const std::string& msg) { std::cerr << "yun: " << msg << '\n'; }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void require(const fs::path& path, const std::string& producer) {
  if (!fs::exists(path)) throw MissingArtifact(path, producer);
}

/// Content-hash staging. The stage key covers the command, the config
/// values the stage reads and the bytes of every input file.
class Stage {
 public:
  Stage(const RunConfig& c, std::string name, json key, std::vector<fs::path> inputs)
      : config_(c), name_(std::move(name)), inputs_(std::move(inputs)) {
    json in = json::object();
    for (const auto& p : inputs_) in[p.generic_string()] = sha256_file(p);
    inputs_json_ = in;
    stage_hash_ = sha256_hex(json{{"command", name_}, {"key", key}, {"inputs", in}}.dump());
  }

  bool up_to_date() const {
    const fs::path mpath = paths::manifest(config_, name_);
    if (!fs::exists(mpath)) return false;
    try {
      std::ifstream in(mpath);
      const json m = json::parse(in);
      if (m.at("stage_hash") != stage_hash_) return false;
      for (const auto& [path, sha] : m.at("outputs").items())
        if (!fs::exists(path) || sha256_file(path) != sha.get<std::string>()) return false;
      return true;
    } catch (const std::exception&) {
      return false;
    }
  }

  StageOutcome skip() const {
    log(name_ + ": inputs unchanged, skipping (use --force to rerun)");
    return StageOutcome{true, read_outputs()};
  }

  StageOutcome finish(const std::vector<fs::path>& outputs) const {
    json out = json::object();
    for (const auto& p : outputs) out[p.generic_string()] = sha256_file(p);
    const json m{{"command", name_},          {"config_hash", config_.hash()}, {"stage_hash", stage_hash_},
                 {"seed", config_.seed},      {"inputs", inputs_json_},       {"outputs", out}};
    write_text(paths::manifest(config_, name_), m.dump(2) + "\n");
    return StageOutcome{false, outputs};
  }

 private:
  std::vector<fs::path> read_outputs() const {
    std::ifstream in(paths::manifest(config_, name_));
    std::vector<fs::path> out;
    for (const auto& [path, _] : json::parse(in).at("outputs").items()) out.emplace_back(path);
    return out;
  }

  const RunConfig& config_;
  std::string name_;
  std::vector<fs::path> inputs_;
  json inputs_json_;
  std::string stage_hash_;
};

PreprocessConfig preprocess_config(const RunConfig& c) {
  PreprocessConfig p = default_preprocess_config();
  if (c.stopwords) p.stopwords = load_stopwords(*c.stopwords);
  return p;
}

std::vector<fs::path> resource_inputs(const RunConfig& c) {
  std::vector<fs::path> out;
  if (c.stopwords) out.emplace_back(*c.stopwords);
  return out;
}

NodeEmbeddingTable load_node_table(const fs::path& path, std::size_t dim) {
  const VectorMap vectors = read_vectors(path, dim);
  std::vector<std::string> names;
  std::vector<double> values;
  for (const auto& [name, v] : vectors) {
    names.push_back(name);
    values.insert(values.end(), v.begin(), v.end());
  }
  if (names.empty()) return make_node_table({}, Tensor{});
  const std::size_t n = names.size();
  return make_node_table(std::move(names), Tensor(n, dim, std::move(values)));
}

/// Everything a training-type stage needs, loaded from upstream artifacts.
struct Inputs {
  Vocabulary vocab;
  std::vector<TokenizedUser> users;
  std::optional<NodeEmbeddingTable> nodes;
  std::optional<EmbeddingTable> pretrained;
  std::vector<fs::path> files;
};

Inputs load_inputs(const RunConfig& c, bool need_nodes) {
  require(paths::tokens(c), "preprocess");
  require(paths::vocab(c), "preprocess");
  Inputs in;
  in.files = {paths::tokens(c), paths::vocab(c)};
  in.vocab = Vocabulary::load(paths::vocab(c));
  in.users = read_tokenized(paths::tokens(c));
  if (need_nodes) {
    require(paths::node_embeddings(c), "embed-graph");
    in.files.push_back(paths::node_embeddings(c));
    in.nodes = load_node_table(paths::node_embeddings(c), c.model.node_dim);
  }
  if (c.pretrained_vectors) {
    in.files.emplace_back(*c.pretrained_vectors);
    Coverage cov;
    in.pretrained = load_pretrained(*c.pretrained_vectors, in.vocab, c.model.word_dim, &cov);
    log("pretrained vectors cover " + std::to_string(cov.found) + " of " +
        std::to_string(cov.found + cov.missing) + " tokens");
  }
  return in;
}

/// Users labeled for the task, encoded and split.
DataSplits encoded_splits(const RunConfig& c, const Inputs& in, Task task) {
  std::vector<EncodedUser> users;
  const NodeEmbeddingTable* nodes = in.nodes ? &*in.nodes : nullptr;
  for (const auto& u : in.users) {
    EncodedUser e = encode_user_inputs(u, in.vocab, c.text, nodes, c.model.node_dim);
    if (e.label(task)) users.push_back(std::move(e));
  }
  if (users.size() < in.users.size())
    log(std::to_string(in.users.size() - users.size()) + " users without a " + std::string(task_name(task)) +
        " label left out");
  return split(users, c.split);
}

std::string evaluation_csv(const Evaluation& e) {
  std::ostringstream out;
  out << "split,loss,accuracy,macro_f1\n"
      << "test," << format_double(e.loss) << ',' << format_double(e.accuracy) << ',' << format_double(e.macro_f1)
      << '\n';
  return out.str();
}

}  // namespace

StageOutcome run_synth(const SyntheticSpec& spec, const fs::path& out) {
  const auto records = generate_synthetic(spec);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_records(out, records);
  log("synth: wrote " + std::to_string(records.size()) + " users to " + out.string());
  return StageOutcome{false, {out}};
}

StageOutcome run_preprocess(const RunConfig& c, const StageOptions& o) {
  if (!fs::exists(c.data)) throw ValidationError("data file " + c.data + " does not exist");
  auto inputs = resource_inputs(c);
  inputs.insert(inputs.begin(), fs::path(c.data));
  const Stage stage(c, "preprocess", json{{"text", text_config_json(c.text)}, {"lenient", c.lenient}}, inputs);
  if (!o.force && stage.up_to_date()) return stage.skip();

  const IngestResult ingested = ingest(c.data, c.lenient);
  for (const auto& e : ingested.errors) log("skipped " + e);
  log(ingested.summary.describe());

  const PreprocessConfig pc = preprocess_config(c);
  std::vector<TokenizedUser> users;
  users.reserve(ingested.records.size());
  for (const auto& r : ingested.records) users.push_back(tokenize(r, pc));
  const Vocabulary vocab = Vocabulary::build(token_corpus(users), c.text.min_count);
  log("vocabulary of " + std::to_string(vocab.size()) + " tokens");

  fs::create_directories(c.work_dir);
  write_tokenized(paths::tokens(c), users);
  vocab.save(paths::vocab(c));
  return stage.finish({paths::tokens(c), paths::vocab(c)});
}

StageOutcome run_build_graph(const RunConfig& c, const StageOptions& o) {
  if (!fs::exists(c.data)) throw ValidationError("data file " + c.data + " does not exist");
  std::vector<fs::path> inputs{c.data};
  if (c.edge_list) inputs.emplace_back(*c.edge_list);
  const Stage stage(c, "build-graph", json{{"lenient", c.lenient}}, inputs);
  if (!o.force && stage.up_to_date()) return stage.skip();

  const IngestResult ingested = ingest(c.data, c.lenient);
  std::vector<Edge> extra;
  if (c.edge_list) extra = read_edge_list(*c.edge_list);
  const MentionGraph g = MentionGraph::build(ingested.records, extra);
  log("graph with " + std::to_string(g.num_nodes()) + " nodes and " + std::to_string(g.num_edges()) + " edges");
  fs::create_directories(c.work_dir);
  g.save(paths::graph(c));
  return stage.finish({paths::graph(c)});
}

StageOutcome run_embed_graph(const RunConfig& c, const StageOptions& o) {
  require(paths::graph(c), "build-graph");
  const json key = c.to_json().at("node2vec");
  const Stage stage(c, "embed-graph", json{{"node2vec", key}, {"seed", c.seed}}, {paths::graph(c)});
  if (!o.force && stage.up_to_date()) return stage.skip();

  const MentionGraph g = MentionGraph::load(paths::graph(c));
  std::vector<Walk> walks = generate_walks(g, c.node2vec.walks);

  // Nodes seen fewer than min_count times in the walks are dropped from
  // the corpus and end up without a vector.
  std::vector<std::size_t> freq(g.num_nodes(), 0);
  for (const auto& w : walks)
    for (NodeId n : w) ++freq[n];
  std::vector<std::string> names;
  std::vector<NodeId> remap(g.num_nodes(), g.num_nodes());
  for (NodeId n = 0; n < g.num_nodes(); ++n)
    if (freq[n] >= c.node2vec.min_count) {
      remap[n] = names.size();
      names.push_back(g.name(n));
    }
  if (names.size() < g.num_nodes()) {
    for (auto& w : walks) {
      Walk kept;
      for (NodeId n : w)
        if (remap[n] < g.num_nodes()) kept.push_back(remap[n]);
      w = std::move(kept);
    }
    log(std::to_string(g.num_nodes() - names.size()) + " nodes below min_count dropped");
  }

  const NodeEmbeddingTable table =
      train_node_embeddings(walks, names, c.node2vec.skipgram, [](std::size_t epoch, const NodeEmbeddingTable& t) {
        log("node2vec epoch " + std::to_string(epoch + 1) + " loss " + format_double(t.epoch_loss.back()));
      });
  write_vectors(paths::node_embeddings(c), table.names, table.vectors);
  return stage.finish({paths::node_embeddings(c)});
}

StageOutcome run_train(const RunConfig& c, const StageOptions& o) {
  const bool nodes = c.train.variant.network;
  Inputs in = load_inputs(c, nodes);
  const std::string name = "train-" + std::string(task_name(c.train.task)) + "-" + c.train.variant.name();
  const Stage stage(c, name, c.to_json(), in.files);
  if (!o.force && stage.up_to_date()) return stage.skip();

  const DataSplits data = encoded_splits(c, in, c.train.task);
  log(name + ": " + std::to_string(data.train.size()) + " train, " + std::to_string(data.validation.size()) +
      " validation, " + std::to_string(data.test.size()) + " test");
  TrainConfig tc = c.train;
  const TrainResult result = train(c.model, tc, data, in.vocab.size(), in.pretrained, [](const EpochRecord& r) {
    log("epoch " + std::to_string(r.epoch + 1) + " train loss " + format_double(r.train.loss) + " acc " +
        format_double(r.train.accuracy) + " | validation loss " + format_double(r.validation.loss) + " acc " +
        format_double(r.validation.accuracy));
  });

  const fs::path dir = paths::run_dir(c);
  fs::create_directories(dir);
  Checkpoint ckpt{c.train.task, c.text, in.vocab, preprocess_config(c).stopwords, std::nullopt, std::nullopt,
                  result.params};
  if (nodes) {
    ckpt.node_table_path = fs::absolute(paths::node_embeddings(c)).generic_string();
    ckpt.node_table_sha256 = sha256_file(paths::node_embeddings(c));
  }
  save_checkpoint(dir / "checkpoint.json", ckpt);
  write_text(dir / "metrics.json", report_json(result.report).dump(2) + "\n");
  write_text(dir / "curves.csv", curves_csv(result.report));
  return stage.finish({dir / "checkpoint.json", dir / "metrics.json", dir / "curves.csv"});
}

StageOutcome run_evaluate(const RunConfig& c, const StageOptions& o) {
  const fs::path dir = paths::run_dir(c);
  require(dir / "checkpoint.json", "train");
  Inputs in = load_inputs(c, c.train.variant.network);
  in.files.push_back(dir / "checkpoint.json");
  const std::string name = "evaluate-" + std::string(task_name(c.train.task)) + "-" + c.train.variant.name();
  const Stage stage(c, name, c.to_json(), in.files);
  if (!o.force && stage.up_to_date()) return stage.skip();

  const Checkpoint ckpt = load_checkpoint(dir / "checkpoint.json");
  if (ckpt.task != c.train.task || !(ckpt.params.variant == c.train.variant))
    throw ValidationError("checkpoint in " + dir.string() + " was trained for a different task or variant");
  if (!(ckpt.vocab == in.vocab)) throw ValidationError("vocabulary changed since training; rerun `yun train`");
  const DataSplits data = encoded_splits(c, in, c.train.task);
  if (data.test.empty()) throw ValidationError("evaluate: the test split is empty");
  const Evaluation e = evaluate(ckpt.params, data.test, c.train.task);
  log("test accuracy " + format_double(e.accuracy) + " macro-F1 " + format_double(e.macro_f1));
  write_text(dir / "evaluation.json", evaluation_json(e).dump(2) + "\n");
  write_text(dir / "evaluation.csv", evaluation_csv(e));
  return stage.finish({dir / "evaluation.json", dir / "evaluation.csv"});
}

StageOutcome run_gridsearch(const RunConfig& c, const StageOptions& o, std::size_t jobs) {
  Inputs in = load_inputs(c, c.train.variant.network);
  const std::string name = "gridsearch-" + std::string(task_name(c.train.task)) + "-" + c.train.variant.name();
  const Stage stage(c, name, c.to_json(), in.files);
  if (!o.force && stage.up_to_date()) return stage.skip();

  const DataSplits data = encoded_splits(c, in, c.train.task);
  const GridResult g = grid_search(c.grid, c.train, c.model, data, in.vocab.size(), in.pretrained, jobs);
  log("best learning rate " + format_double(g.best.optimizer.learning_rate) + ", weight decay " +
      format_double(g.best.optimizer.weight_decay));
  const fs::path out = paths::run_dir(c) / "gridsearch.json";
  write_text(out, grid_json(g).dump(2) + "\n");
  return stage.finish({out});
}

StageOutcome run_ablate(const RunConfig& c, const StageOptions& o, std::size_t jobs) {
  Inputs in = load_inputs(c, true);
  const Stage stage(c, "ablate", c.to_json(), in.files);
  if (!o.force && stage.up_to_date()) return stage.skip();

  const std::array<Task, 2> tasks{Task::UserType, Task::UserMotivation};
  AblationTable table;
  for (Task t : tasks) {
    const DataSplits data = encoded_splits(c, in, t);
    const Task one[] = {t};
    AblationTable part = run_ablation(
        one, ModelVariant::ablation_rows(), c.model, data, in.vocab.size(), in.pretrained,
        [&c](const ModelVariant& v, Task task) {
          TrainConfig tc = default_train_config(v, task);
          tc.seed = c.train.seed;
          tc.max_epochs = c.train.max_epochs;
          tc.patience = c.train.patience;
          tc.class_weighting = c.train.class_weighting;
          return tc;
        },
        jobs);
    table.cells.insert(table.cells.end(), part.cells.begin(), part.cells.end());
    for (const auto& cell : part.cells)
      log(std::string(task_name(t)) + " " + cell.variant.label() + ": accuracy " + format_double(cell.accuracy) +
          " macro-F1 " + format_double(cell.macro_f1));
  }
  // Row-major by variant, then task.
  AblationTable ordered;
  for (const auto& v : ModelVariant::ablation_rows())
    for (Task t : tasks) ordered.cells.push_back(table.at(v, t));

  const fs::path dir(c.work_dir);
  write_text(dir / "ablation.json", ablation_json(ordered).dump(2) + "\n");
  write_text(dir / "ablation.txt", ablation_text(ordered));
  write_text(dir / "ablation.csv", ablation_csv(ordered));
  return stage.finish({dir / "ablation.json", dir / "ablation.txt", dir / "ablation.csv"});
}

StageOutcome run_predict(const RunConfig& c, const fs::path& input, const fs::path& out) {
  const fs::path ckpt_path = paths::run_dir(c) / "checkpoint.json";
  require(ckpt_path, "train");
  if (!fs::exists(input)) throw ValidationError("input file " + input.string() + " does not exist");
  const Checkpoint ckpt = load_checkpoint(ckpt_path);

  std::optional<NodeEmbeddingTable> nodes;
  if (ckpt.params.variant.network && ckpt.node_table_path) {
    if (!fs::exists(*ckpt.node_table_path)) throw MissingArtifact(*ckpt.node_table_path, "embed-graph");
    if (ckpt.node_table_sha256 && sha256_file(*ckpt.node_table_path) != *ckpt.node_table_sha256)
      throw ValidationError("node embeddings changed since training: " + *ckpt.node_table_path);
    nodes = load_node_table(*ckpt.node_table_path, ckpt.params.config.node_dim);
  }

  PreprocessConfig pc;
  pc.stopwords = ckpt.stopwords;
  const IngestResult ingested = ingest(input, c.lenient);
  for (const auto& e : ingested.errors) log("skipped " + e);
  const auto names = class_names(ckpt.task);

  std::ostringstream lines;
  for (const auto& r : ingested.records) {
    const EncodedUser u = encode_user_inputs(tokenize(r, pc), ckpt.vocab, ckpt.text, nodes ? &*nodes : nullptr,
                                             ckpt.params.config.node_dim);
    const Tensor p = predict_proba(u, ckpt.params);
    json probs = json::object();
    for (std::size_t k = 0; k < kNumClasses; ++k) probs[std::string(names[k])] = p[k];
    lines << json{{"user_id", r.user_id},
                  {"task", std::string(task_name(ckpt.task))},
                  {"label", std::string(names[argmax(p.data())])},
                  {"probabilities", probs}}
                 .dump()
          << '\n';
  }
  write_text(out, lines.str());
  log("predict: wrote " + std::to_string(ingested.records.size()) + " predictions to " + out.string());
  return StageOutcome{false, {out}};
}

}  // namespace yun
