#include "yun/checkpoint.hpp"

#include <fstream>
#include <map>

#include <json.hpp>

#include "yun/config.hpp"
#include "yun/errors.hpp"

namespace yun {

using nlohmann::json;

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  json tensors = json::array();
  for (const Parameter* p : ckpt.params.parameters())
    tensors.push_back({{"name", p->name},
                       {"shape", p->value.shape()},
                       {"trainable", p->trainable},
                       {"values", p->value.values()}});
  std::vector<std::size_t> counts;
  for (std::size_t i = 0; i < ckpt.vocab.size(); ++i) counts.push_back(ckpt.vocab.count(i));
  json j{{"format", "yun-checkpoint"},
         {"version", kCheckpointVersion},
         {"task", std::string(task_name(ckpt.task))},
         {"variant", ckpt.params.variant.name()},
         {"model", model_config_json(ckpt.params.config)},
         {"text", text_config_json(ckpt.text)},
         {"vocabulary", {{"tokens", ckpt.vocab.tokens()}, {"counts", counts}}},
         {"stopwords", std::vector<std::string>(ckpt.stopwords.begin(), ckpt.stopwords.end())},
         {"node_embeddings",
          {{"path", ckpt.node_table_path ? json(*ckpt.node_table_path) : json(nullptr)},
           {"sha256", ckpt.node_table_sha256 ? json(*ckpt.node_table_sha256) : json(nullptr)}}},
         {"tensors", tensors}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << j.dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("checkpoint " + path.string() + ": " + e.what());
  }
  try {
    if (j.at("format") != "yun-checkpoint") throw ValidationError("not a yun checkpoint: " + path.string());
    if (j.at("version") != kCheckpointVersion)
      throw ValidationError("unsupported checkpoint version " + j["version"].dump());

    Checkpoint c;
    c.task = parse_task(j.at("task").get<std::string>());
    c.text = text_config_from_json(j.at("text"));
    c.vocab = Vocabulary::from_tokens(j.at("vocabulary").at("tokens").get<std::vector<std::string>>(),
                                      j.at("vocabulary").at("counts").get<std::vector<std::size_t>>());
    for (const auto& s : j.at("stopwords")) c.stopwords.insert(s.get<std::string>());
    const json& nodes = j.at("node_embeddings");
    if (!nodes.at("path").is_null()) c.node_table_path = nodes["path"].get<std::string>();
    if (!nodes.at("sha256").is_null()) c.node_table_sha256 = nodes["sha256"].get<std::string>();

    const ModelConfig model = model_config_from_json(j.at("model"));
    const ModelVariant variant = ModelVariant::parse(j.at("variant").get<std::string>());

    std::map<std::string, const json*> stored;
    for (const auto& t : j.at("tensors")) stored[t.at("name").get<std::string>()] = &t;
    const json* emb = stored.count("embedding") ? stored["embedding"] : nullptr;
    if (!emb) throw ValidationError("checkpoint has no embedding tensor");
    const auto emb_shape = emb->at("shape").get<std::vector<std::size_t>>();
    if (emb_shape.size() != 2 || emb_shape[0] != c.vocab.size())
      throw ValidationError("checkpoint embedding rows do not match vocabulary size");

    c.params = YunParams::init(model, variant, c.vocab.size(), 0);
    std::size_t matched = 0;
    for (Parameter* p : c.params.parameters()) {
      auto it = stored.find(p->name);
      if (it == stored.end()) throw ValidationError("checkpoint is missing tensor '" + p->name + "'");
      const json& t = *it->second;
      const auto shape = t.at("shape").get<std::vector<std::size_t>>();
      if (shape != p->value.shape())
        throw ValidationError("checkpoint tensor '" + p->name + "' has shape mismatch");
      p->value = Tensor(shape[0], shape[1], t.at("values").get<std::vector<double>>());
      p->trainable = t.at("trainable").get<bool>();
      ++matched;
    }
    if (matched != stored.size()) throw ValidationError("checkpoint has tensors the model does not use");
    return c;
  } catch (const json::exception& e) {
    throw ParseError("checkpoint " + path.string() + ": " + e.what());
  }
}

}  // namespace yun
