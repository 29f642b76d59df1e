#pragma once

// Run configuration document. Every section and key is optional and falls
// back to the defaults below; unknown keys and out-of-range values are
// rejected at load time.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "yun/features.hpp"
#include "yun/graph.hpp"
#include "yun/model.hpp"
#include "yun/train.hpp"

namespace yun {

struct Node2VecConfig {
  WalkConfig walks;      // seed comes from RunConfig::seed
  SkipGramConfig skipgram;
  std::size_t min_count = 1;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::string data = "data.jsonl";
  std::string work_dir = "work";
  bool lenient = false;
  std::optional<std::string> stopwords;
  std::optional<std::string> pretrained_vectors;
  std::optional<std::string> edge_list;

  TextConfig text;
  ModelConfig model;
  Node2VecConfig node2vec;
  TrainConfig train;
  SplitSpec split;
  GridSpec grid;

  /// Propagates `seed` into every seeded sub-config.
  void apply_seed(std::uint64_t s);
  void validate() const;

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  /// SHA-256 of the canonical JSON form.
  std::string hash() const;
};

nlohmann::json model_config_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j);
nlohmann::json text_config_json(const TextConfig& c);
TextConfig text_config_from_json(const nlohmann::json& j);

}  // namespace yun
