#pragma once

// Self-describing model archive: a single JSON document holding the
// configuration, vocabulary, stopwords, every parameter tensor and a
// reference to the node-embedding table it was trained with.

#include <filesystem>
#include <optional>
#include <set>
#include <string>

#include "yun/features.hpp"
#include "yun/model.hpp"
#include "yun/records.hpp"
#include "yun/text.hpp"

namespace yun {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  Task task = Task::UserType;
  TextConfig text;
  Vocabulary vocab;
  std::set<std::string, std::less<>> stopwords;
  std::optional<std::string> node_table_path;
  std::optional<std::string> node_table_sha256;
  YunParams params;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

/// Throws ParseError on a malformed archive, ValidationError on an unknown
/// version or on tensors that do not match the declared configuration.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace yun
