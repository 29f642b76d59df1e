#include "yun/train.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "yun/errors.hpp"

namespace yun {

void SplitSpec::validate() const {
  if (train < 0 || validation < 0 || test < 0) throw ValidationError("split fractions must be non-negative");
  if (std::abs(train + validation + test - 1.0) > 1e-9) throw ValidationError("split fractions must sum to 1");
}

SplitIndices split_indices(std::size_t n, const SplitSpec& spec) {
  spec.validate();
  if (n < 5) throw ValidationError("split needs at least 5 records, got " + std::to_string(n));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(spec.seed, 0x5b1);
  rng.shuffle(order);
  // A tiny epsilon keeps e.g. 0.6 * 10 from flooring to 5.
  const auto n_train = static_cast<std::size_t>(std::floor(spec.train * static_cast<double>(n) + 1e-9));
  const auto n_val = static_cast<std::size_t>(std::floor(spec.validation * static_cast<double>(n) + 1e-9));
  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + n_train);
  out.validation.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  out.test.assign(order.begin() + n_train + n_val, order.end());
  return out;
}

void TrainConfig::validate() const {
  variant.validate();
  optimizer.validate();
  if (max_epochs < 1) throw ValidationError("max_epochs must be >= 1");
  if (patience < 1) throw ValidationError("patience must be >= 1");
}

TrainConfig default_train_config(const ModelVariant& variant, Task task) {
  TrainConfig c;
  c.task = task;
  c.variant = variant;
  if (variant == ModelVariant{false, true, false, false}) {
    c.optimizer.kind = OptimizerKind::SgdMomentum;
    c.optimizer.weight_decay = 0.0;
  }
  return c;
}

namespace {

std::size_t require_label(const EncodedUser& u, Task task) {
  auto l = u.label(task);
  if (!l) throw ValidationError("user '" + u.user_id + "' has no " + std::string(task_name(task)) + " label");
  return *l;
}

template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  for (std::size_t start = 0; start < n; start += jobs) {
    std::vector<std::thread> threads;
    for (std::size_t i = start; i < std::min(n, start + jobs); ++i)
      threads.emplace_back([&, i] {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

Evaluation evaluate(const YunParams& params, std::span<const EncodedUser> users, Task task) {
  if (users.empty()) throw ValidationError("evaluate: empty record set");
  std::vector<std::size_t> gold, pred;
  gold.reserve(users.size());
  pred.reserve(users.size());
  double loss = 0.0;
  for (const auto& u : users) {
    const std::size_t y = require_label(u, task);
    Tape tape;
    Var logits = classifier_logits(tape, encode_user(tape, u, params), params);
    loss += softmax_cross_entropy(logits, y).value()[0];
    gold.push_back(y);
    pred.push_back(argmax(logits.value().data()));
  }
  Evaluation e = score(gold, pred);
  e.loss = loss / static_cast<double>(users.size());
  return e;
}

TrainResult train(const ModelConfig& model, const TrainConfig& config, const DataSplits& data, std::size_t vocab_size,
                  const std::optional<EmbeddingTable>& pretrained, const EpochCallback& on_epoch) {
  config.validate();
  if (data.train.empty()) throw ValidationError("train: empty training split");
  if (data.validation.empty()) throw ValidationError("train: empty validation split");

  YunParams params = YunParams::init(model, config.variant, vocab_size, config.seed, pretrained);
  Optimizer optimizer(config.optimizer, params.trainable());

  std::vector<std::size_t> labels;
  for (const auto& u : data.train) labels.push_back(require_label(u, config.task));
  std::array<double, kNumClasses> weights{1.0, 1.0, 1.0};
  if (config.class_weighting) {
    std::array<std::size_t, kNumClasses> counts{};
    for (std::size_t y : labels) ++counts[y];
    for (std::size_t c = 0; c < kNumClasses; ++c)
      weights[c] = counts[c] ? static_cast<double>(labels.size()) / (kNumClasses * static_cast<double>(counts[c])) : 0.0;
  }

  TrainResult result{params, {}};
  result.report.variant = config.variant.name();
  result.report.task = config.task;

  std::vector<std::size_t> order(data.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(config.seed, 0x7a1);
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t worse = 0;
  std::optional<std::size_t> last_good;

  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t idx : order) {
      Tape tape;
      Var loss = user_loss(tape, data.train[idx], params, labels[idx], weights[labels[idx]]);
      if (!std::isfinite(loss.value()[0]))
        throw TrainingDiverged("training loss became non-finite in epoch " + std::to_string(epoch), last_good);
      GradientMap grads = tape.backward(loss);
      try {
        optimizer.step(grads);
      } catch (const NumericError& e) {
        throw TrainingDiverged(std::string(e.what()) + " in epoch " + std::to_string(epoch), last_good);
      }
    }

    EpochRecord rec{epoch, evaluate(params, data.train, config.task), evaluate(params, data.validation, config.task)};
    if (!std::isfinite(rec.train.loss) || !std::isfinite(rec.validation.loss))
      throw TrainingDiverged("loss became non-finite in epoch " + std::to_string(epoch), last_good);
    last_good = epoch;
    result.report.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (rec.validation.loss < best_loss) {
      best_loss = rec.validation.loss;
      result.report.best_epoch = epoch;
      result.params = params;
      worse = 0;
    } else if (rec.validation.loss > best_loss) {
      ++worse;
    }
    if (config.patience != kNoPatience && worse >= config.patience) {
      result.report.stopped_early = epoch + 1 < config.max_epochs;
      break;
    }
  }

  if (!data.test.empty()) result.report.test = evaluate(result.params, data.test, config.task);
  return result;
}

GridResult grid_search(const GridSpec& grid, const TrainConfig& base, const ModelConfig& model, const DataSplits& data,
                       std::size_t vocab_size, const std::optional<EmbeddingTable>& pretrained, std::size_t jobs) {
  if (grid.learning_rates.empty() || grid.weight_decays.empty()) throw ValidationError("grid_search: empty grid");
  std::vector<double> lrs = grid.learning_rates, wds = grid.weight_decays;
  std::sort(lrs.begin(), lrs.end());
  std::sort(wds.begin(), wds.end());

  GridResult out;
  for (double lr : lrs)
    for (double wd : wds) out.cells.push_back(GridCell{lr, wd, {}, 0.0});

  parallel_for(out.cells.size(), jobs, [&](std::size_t i) {
    GridCell& cell = out.cells[i];
    TrainConfig cfg = base;
    cfg.optimizer.learning_rate = cell.learning_rate;
    cfg.optimizer.weight_decay = cell.weight_decay;
    cell.report = train(model, cfg, data, vocab_size, pretrained).report;
    cell.validation_macro_f1 = cell.report.epochs.at(cell.report.best_epoch).validation.macro_f1;
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < out.cells.size(); ++i)
    if (out.cells[i].validation_macro_f1 > out.cells[best].validation_macro_f1) best = i;
  out.best = base;
  out.best.optimizer.learning_rate = out.cells[best].learning_rate;
  out.best.optimizer.weight_decay = out.cells[best].weight_decay;
  return out;
}

const AblationCell& AblationTable::at(const ModelVariant& v, Task task) const {
  for (const auto& c : cells)
    if (c.variant == v && c.task == task) return c;
  throw std::out_of_range("ablation table has no cell for " + v.name() + "/" + std::string(task_name(task)));
}

AblationTable run_ablation(std::span<const Task> tasks, std::span<const ModelVariant> variants, const ModelConfig& model,
                           const DataSplits& data, std::size_t vocab_size,
                           const std::optional<EmbeddingTable>& pretrained, const CellConfigurer& configure,
                           std::size_t jobs) {
  if (data.test.empty()) throw ValidationError("ablation needs a non-empty test split");
  AblationTable table;
  for (const auto& v : variants)
    for (Task t : tasks) table.cells.push_back(AblationCell{v, t, 0.0, 0.0, {}});

  parallel_for(table.cells.size(), jobs, [&](std::size_t i) {
    AblationCell& cell = table.cells[i];
    const TrainConfig cfg = configure ? configure(cell.variant, cell.task) : default_train_config(cell.variant, cell.task);
    cell.report = train(model, cfg, data, vocab_size, pretrained).report;
    cell.accuracy = cell.report.test->accuracy;
    cell.macro_f1 = cell.report.test->macro_f1;
  });
  return table;
}

AblationTable run_ablation(std::span<const Task> tasks, const ModelConfig& model, const DataSplits& data,
                           std::size_t vocab_size, const std::optional<EmbeddingTable>& pretrained, std::uint64_t seed,
                           std::size_t jobs) {
  const auto& rows = ModelVariant::ablation_rows();
  return run_ablation(
      tasks, rows, model, data, vocab_size, pretrained,
      [seed](const ModelVariant& v, Task t) {
        TrainConfig c = default_train_config(v, t);
        c.seed = seed;
        return c;
      },
      jobs);
}

}  // namespace yun
