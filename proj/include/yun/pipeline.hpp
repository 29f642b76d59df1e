#pragma once

// Command stages. Each reads its inputs from the run config and the work
// directory, writes its artifacts there, and records a manifest
// (manifests/<stage>.json) with the config hash, seed and SHA-256 of every
// input and output. A stage whose manifest matches its current inputs is
// skipped unless forced.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "yun/config.hpp"
#include "yun/errors.hpp"
#include "yun/synth.hpp"

namespace yun {

/// A stage needs a file that an earlier command produces.
class MissingArtifact : public ValidationError {
 public:
  MissingArtifact(const std::filesystem::path& path, const std::string& producer)
      : ValidationError("missing " + path.string() + "; run `yun " + producer + "` first"),
        producer(producer) {}
  std::string producer;
};

struct StageOptions {
  bool force = false;
};

struct StageOutcome {
  bool skipped = false;
  std::vector<std::filesystem::path> outputs;
};

namespace paths {
std::filesystem::path tokens(const RunConfig& c);
std::filesystem::path vocab(const RunConfig& c);
std::filesystem::path graph(const RunConfig& c);
std::filesystem::path node_embeddings(const RunConfig& c);
/// runs/<task>-<variant>
std::filesystem::path run_dir(const RunConfig& c);
std::filesystem::path manifest(const RunConfig& c, const std::string& stage);
}  // namespace paths

StageOutcome run_synth(const SyntheticSpec& spec, const std::filesystem::path& out);

StageOutcome run_preprocess(const RunConfig& c, const StageOptions& o = {});
StageOutcome run_build_graph(const RunConfig& c, const StageOptions& o = {});
StageOutcome run_embed_graph(const RunConfig& c, const StageOptions& o = {});
/// checkpoint.json, metrics.json and curves.csv under the run directory.
StageOutcome run_train(const RunConfig& c, const StageOptions& o = {});
/// Test-split metrics of the trained checkpoint: evaluation.json/.csv.
StageOutcome run_evaluate(const RunConfig& c, const StageOptions& o = {});
StageOutcome run_gridsearch(const RunConfig& c, const StageOptions& o = {}, std::size_t jobs = 1);
/// ablation.json, ablation.txt and ablation.csv in the work directory.
StageOutcome run_ablate(const RunConfig& c, const StageOptions& o = {}, std::size_t jobs = 1);
/// One JSON line per input record: user_id, label and class probabilities.
StageOutcome run_predict(const RunConfig& c, const std::filesystem::path& input, const std::filesystem::path& out);

}  // namespace yun
