#include "yun/metrics.hpp"

#include <stdexcept>

#include "yun/errors.hpp"

namespace yun {

void ConfusionMatrix::add(std::size_t gold, std::size_t predicted) {
  if (gold >= kNumClasses || predicted >= kNumClasses)
    throw std::out_of_range("confusion matrix: class id outside [0, 3)");
  ++counts[gold][predicted];
}

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (const auto& row : counts)
    for (std::size_t c : row) t += c;
  return t;
}

std::size_t ConfusionMatrix::support(std::size_t cls) const {
  std::size_t s = 0;
  for (std::size_t c : counts.at(cls)) s += c;
  return s;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t t = 0;
  for (std::size_t i = 0; i < kNumClasses; ++i) t += counts[i][i];
  return t;
}

ConfusionMatrix confusion_matrix(std::span<const std::size_t> gold, std::span<const std::size_t> predicted) {
  if (gold.size() != predicted.size()) throw std::invalid_argument("confusion matrix: label/prediction count mismatch");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < gold.size(); ++i) cm.add(gold[i], predicted[i]);
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  const std::size_t total = cm.total();
  if (total == 0) throw ValidationError("accuracy of an empty evaluation");
  return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

namespace {

double f1_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  const std::size_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : static_cast<double>(2 * tp) / static_cast<double>(denom);
}

}  // namespace

double class_f1(const ConfusionMatrix& cm, std::size_t cls) {
  const std::size_t tp = cm.counts[cls][cls];
  std::size_t fp = 0, fn = 0;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    if (k == cls) continue;
    fp += cm.counts[k][cls];
    fn += cm.counts[cls][k];
  }
  return f1_from_counts(tp, fp, fn);
}

double macro_f1(const ConfusionMatrix& cm) {
  double s = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) s += class_f1(cm, c);
  return s / static_cast<double>(kNumClasses);
}

Evaluation score(std::span<const std::size_t> gold, std::span<const std::size_t> predicted) {
  if (gold.empty()) throw ValidationError("evaluate: empty record set");
  Evaluation e;
  e.confusion = confusion_matrix(gold, predicted);
  e.accuracy = accuracy(e.confusion);
  e.macro_f1 = macro_f1(e.confusion);

  double direct = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      tp += gold[i] == c && predicted[i] == c;
      fp += gold[i] != c && predicted[i] == c;
      fn += gold[i] == c && predicted[i] != c;
    }
    direct += f1_from_counts(tp, fp, fn);
  }
  direct /= static_cast<double>(kNumClasses);
  if (direct != e.macro_f1) throw std::logic_error("macro-F1 cross-check failed");
  return e;
}

}  // namespace yun
