#include "yun/config.hpp"

#include <fstream>
#include <set>

#include "yun/errors.hpp"
#include "yun/hashing.hpp"

namespace yun {

using nlohmann::json;

namespace {

// Reads keys out of one JSON object and fails on any key left unread.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError("config: '" + path_ + "' must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ValidationError("config: '" + where(key) + "' has the wrong type");
    }
  }

  void read_optional_string(const char* key, std::optional<std::string>& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    if (j_[key].is_null()) {
      out.reset();
      return;
    }
    if (!j_[key].is_string()) throw ValidationError("config: '" + where(key) + "' must be a string or null");
    out = j_[key].get<std::string>();
  }

  std::optional<Section> child(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    return Section(j_[key], where(key));
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& raw(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.contains(k)) throw ValidationError("config: unknown key '" + where(k) + "'");
  }

  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError("config: " + what);
}

}  // namespace

json model_config_json(const ModelConfig& c) {
  return json{{"word_dim", c.word_dim},       {"lstm_size", c.lstm_size}, {"attention_size", c.attention_size},
              {"node_dim", c.node_dim},       {"net_size", c.net_size},   {"hidden_sizes", c.hidden_sizes},
              {"init_scale", c.init_scale},   {"embedding_init", c.embedding_init}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  Section s(j, "model");
  s.read("word_dim", c.word_dim);
  s.read("lstm_size", c.lstm_size);
  s.read("attention_size", c.attention_size);
  s.read("node_dim", c.node_dim);
  s.read("net_size", c.net_size);
  s.read("hidden_sizes", c.hidden_sizes);
  s.read("init_scale", c.init_scale);
  s.read("embedding_init", c.embedding_init);
  s.finish();
  c.validate();
  return c;
}

json text_config_json(const TextConfig& c) {
  return json{{"max_len_description", c.max_len_description},
              {"max_len_location", c.max_len_location},
              {"max_len_tweets", c.max_len_tweets},
              {"min_count", c.min_count}};
}

TextConfig text_config_from_json(const json& j) {
  TextConfig c;
  Section s(j, "text");
  s.read("max_len_description", c.max_len_description);
  s.read("max_len_location", c.max_len_location);
  s.read("max_len_tweets", c.max_len_tweets);
  s.read("min_count", c.min_count);
  s.finish();
  c.validate();
  return c;
}

void RunConfig::apply_seed(std::uint64_t s) {
  seed = s;
  node2vec.walks.seed = s;
  node2vec.skipgram.seed = s;
  train.seed = s;
  split.seed = s;
}

void RunConfig::validate() const {
  text.validate();
  model.validate();
  node2vec.walks.validate();
  require(node2vec.skipgram.dim >= 1, "node2vec.dimension must be >= 1");
  require(node2vec.skipgram.window >= 1, "node2vec.window must be >= 1");
  require(node2vec.skipgram.negatives >= 1, "node2vec.negatives must be >= 1");
  require(node2vec.skipgram.learning_rate > 0, "node2vec.learning_rate must be > 0");
  require(node2vec.min_count >= 1, "node2vec.min_count must be >= 1");
  require(node2vec.skipgram.dim == model.node_dim, "node2vec.dimension must equal model.node_dim");
  train.validate();
  split.validate();
  require(!grid.learning_rates.empty() && !grid.weight_decays.empty(), "grid lists must be non-empty");
  for (double lr : grid.learning_rates) require(lr > 0, "grid learning rates must be > 0");
  for (double wd : grid.weight_decays) require(wd >= 0, "grid weight decays must be >= 0");
  require(!data.empty() && !work_dir.empty(), "data and work_dir must be non-empty");
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  Section root(j, "");
  std::uint64_t seed = c.seed;
  root.read("seed", seed);
  c.apply_seed(seed);
  root.read("data", c.data);
  root.read("work_dir", c.work_dir);
  root.read("lenient", c.lenient);

  if (auto s = root.child("resources")) {
    s->read_optional_string("stopwords", c.stopwords);
    s->read_optional_string("pretrained_vectors", c.pretrained_vectors);
    s->read_optional_string("edge_list", c.edge_list);
    s->finish();
  }
  if (root.has("text")) c.text = text_config_from_json(root.raw("text"));
  if (root.has("model")) c.model = model_config_from_json(root.raw("model"));
  c.node2vec.skipgram.dim = c.model.node_dim;

  if (auto s = root.child("node2vec")) {
    s->read("dimension", c.node2vec.skipgram.dim);
    s->read("walks_per_node", c.node2vec.walks.walks_per_node);
    s->read("walk_length", c.node2vec.walks.walk_length);
    s->read("p", c.node2vec.walks.p);
    s->read("q", c.node2vec.walks.q);
    s->read("window", c.node2vec.skipgram.window);
    s->read("negatives", c.node2vec.skipgram.negatives);
    s->read("epochs", c.node2vec.skipgram.epochs);
    s->read("learning_rate", c.node2vec.skipgram.learning_rate);
    s->read("min_count", c.node2vec.min_count);
    s->finish();
  }

  if (auto s = root.child("train")) {
    std::string task(task_name(c.train.task)), variant = c.train.variant.name(),
        optimizer(optimizer_name(c.train.optimizer.kind));
    s->read("task", task);
    s->read("variant", variant);
    s->read("optimizer", optimizer);
    c.train.task = parse_task(task);
    c.train.variant = ModelVariant::parse(variant);
    c.train.optimizer.kind = parse_optimizer(optimizer);
    s->read("learning_rate", c.train.optimizer.learning_rate);
    s->read("weight_decay", c.train.optimizer.weight_decay);
    s->read("rho", c.train.optimizer.rho);
    s->read("epsilon", c.train.optimizer.epsilon);
    s->read("momentum", c.train.optimizer.momentum);
    s->read("max_epochs", c.train.max_epochs);
    if (s->has("patience")) {
      const json& p = s->raw("patience");
      if (p.is_null()) c.train.patience = kNoPatience;
      else if (p.is_number_unsigned()) c.train.patience = p.get<std::size_t>();
      else throw ValidationError("config: 'train.patience' must be a positive integer or null");
    }
    s->read("class_weighting", c.train.class_weighting);
    s->finish();
  }

  if (auto s = root.child("split")) {
    s->read("train", c.split.train);
    s->read("validation", c.split.validation);
    s->read("test", c.split.test);
    s->finish();
  }
  if (auto s = root.child("grid")) {
    s->read("learning_rates", c.grid.learning_rates);
    s->read("weight_decays", c.grid.weight_decays);
    s->finish();
  }
  root.finish();
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

json RunConfig::to_json() const {
  auto opt = [](const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); };
  json j;
  j["seed"] = seed;
  j["data"] = data;
  j["work_dir"] = work_dir;
  j["lenient"] = lenient;
  j["resources"] = {{"stopwords", opt(stopwords)}, {"pretrained_vectors", opt(pretrained_vectors)},
                    {"edge_list", opt(edge_list)}};
  j["text"] = text_config_json(text);
  j["model"] = model_config_json(model);
  j["node2vec"] = {{"dimension", node2vec.skipgram.dim},
                   {"walks_per_node", node2vec.walks.walks_per_node},
                   {"walk_length", node2vec.walks.walk_length},
                   {"p", node2vec.walks.p},
                   {"q", node2vec.walks.q},
                   {"window", node2vec.skipgram.window},
                   {"negatives", node2vec.skipgram.negatives},
                   {"epochs", node2vec.skipgram.epochs},
                   {"learning_rate", node2vec.skipgram.learning_rate},
                   {"min_count", node2vec.min_count}};
  j["train"] = {{"task", std::string(task_name(train.task))},
                {"variant", train.variant.name()},
                {"optimizer", std::string(optimizer_name(train.optimizer.kind))},
                {"learning_rate", train.optimizer.learning_rate},
                {"weight_decay", train.optimizer.weight_decay},
                {"rho", train.optimizer.rho},
                {"epsilon", train.optimizer.epsilon},
                {"momentum", train.optimizer.momentum},
                {"max_epochs", train.max_epochs},
                {"patience", train.patience == kNoPatience ? json(nullptr) : json(train.patience)},
                {"class_weighting", train.class_weighting}};
  j["split"] = {{"train", split.train}, {"validation", split.validation}, {"test", split.test}};
  j["grid"] = {{"learning_rates", grid.learning_rates}, {"weight_decays", grid.weight_decays}};
  return j;
}

std::string RunConfig::hash() const { return sha256_hex(to_json().dump()); }

}  // namespace yun
