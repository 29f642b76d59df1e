#pragma once

// Splitting, the training loop with early stopping, grid search and the
// view ablation runner.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "yun/errors.hpp"
#include "yun/metrics.hpp"
#include "yun/model.hpp"
#include "yun/optim.hpp"

namespace yun {

struct SplitSpec {
  double train = 0.6;
  double validation = 0.2;
  double test = 0.2;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SplitIndices {
  std::vector<std::size_t> train, validation, test;
};

/// Shuffles [0, n) with the seed and cuts floor(train*n), floor(validation*n)
/// and the remainder. Requires n >= 5.
SplitIndices split_indices(std::size_t n, const SplitSpec& spec);

template <typename T>
struct Splits {
  std::vector<T> train, validation, test;
};

template <typename T>
Splits<T> split(const std::vector<T>& items, const SplitSpec& spec) {
  const SplitIndices idx = split_indices(items.size(), spec);
  Splits<T> out;
  for (std::size_t i : idx.train) out.train.push_back(items[i]);
  for (std::size_t i : idx.validation) out.validation.push_back(items[i]);
  for (std::size_t i : idx.test) out.test.push_back(items[i]);
  return out;
}

using DataSplits = Splits<EncodedUser>;

inline constexpr std::size_t kNoPatience = std::numeric_limits<std::size_t>::max();

struct TrainConfig {
  Task task = Task::UserType;
  ModelVariant variant;
  OptimizerConfig optimizer;
  std::size_t max_epochs = 30;
  /// Stop after this many consecutive epochs with validation loss above the
  /// running minimum. kNoPatience disables early stopping.
  std::size_t patience = 3;
  std::uint64_t seed = 1;
  bool class_weighting = false;

  void validate() const;
};

/// Hyperparameters of the per-variant settings table: Adadelta with lr 0.01
/// and weight decay 1e-4 everywhere except the location-only model, which
/// uses SGD with momentum and no weight decay.
TrainConfig default_train_config(const ModelVariant& variant, Task task);

struct EpochRecord {
  std::size_t epoch = 0;
  Evaluation train;
  Evaluation validation;
};

struct MetricsReport {
  std::string variant;
  Task task = Task::UserType;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  bool stopped_early = false;
  std::optional<Evaluation> test;
};

struct TrainResult {
  YunParams params;  // from the best validation-loss epoch
  MetricsReport report;
};

class TrainingDiverged : public NumericError {
 public:
  TrainingDiverged(const std::string& what, std::optional<std::size_t> last_good_epoch)
      : NumericError(what), last_good_epoch(last_good_epoch) {}
  std::optional<std::size_t> last_good_epoch;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mean loss, accuracy and macro-F1 of the model on labeled users.
Evaluation evaluate(const YunParams& params, std::span<const EncodedUser> users, Task task);

/// Per-user stochastic updates in a freshly shuffled order every epoch.
TrainResult train(const ModelConfig& model, const TrainConfig& config, const DataSplits& data, std::size_t vocab_size,
                  const std::optional<EmbeddingTable>& pretrained = std::nullopt, const EpochCallback& on_epoch = {});

struct GridSpec {
  std::vector<double> learning_rates = {0.005, 0.01, 0.05, 0.1, 0.5};
  std::vector<double> weight_decays = {0.0, 1e-4, 1e-3, 1e-2};
};

struct GridCell {
  double learning_rate = 0.0;
  double weight_decay = 0.0;
  MetricsReport report;
  double validation_macro_f1 = 0.0;  // at the best epoch
};

struct GridResult {
  TrainConfig best;
  std::vector<GridCell> cells;  // ordered by learning rate, then weight decay
};

/// Trains every cell and keeps the one with the highest validation macro-F1;
/// ties go to the lower learning rate, then the lower weight decay.
/// `jobs` > 1 trains cells concurrently; results do not depend on it.
GridResult grid_search(const GridSpec& grid, const TrainConfig& base, const ModelConfig& model, const DataSplits& data,
                       std::size_t vocab_size, const std::optional<EmbeddingTable>& pretrained = std::nullopt,
                       std::size_t jobs = 1);

struct AblationCell {
  ModelVariant variant;
  Task task = Task::UserType;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  MetricsReport report;
};

struct AblationTable {
  std::vector<AblationCell> cells;  // row-major: variant, then task

  const AblationCell& at(const ModelVariant& v, Task task) const;
};

/// Callback that may adjust the training config of a cell.
using CellConfigurer = std::function<TrainConfig(const ModelVariant&, Task)>;

/// Trains and tests each variant for each task.
AblationTable run_ablation(std::span<const Task> tasks, std::span<const ModelVariant> variants, const ModelConfig& model,
                           const DataSplits& data, std::size_t vocab_size,
                           const std::optional<EmbeddingTable>& pretrained = std::nullopt,
                           const CellConfigurer& configure = {}, std::size_t jobs = 1);

/// The eight-row ablation over both tasks with default per-variant settings.
AblationTable run_ablation(std::span<const Task> tasks, const ModelConfig& model, const DataSplits& data,
                           std::size_t vocab_size, const std::optional<EmbeddingTable>& pretrained = std::nullopt,
                           std::uint64_t seed = 1, std::size_t jobs = 1);

}  // namespace yun
