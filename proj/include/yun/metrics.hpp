#pragma once

#include <array>
#include <span>

#include "yun/records.hpp"

namespace yun {

/// counts[gold][predicted]
struct ConfusionMatrix {
  std::array<std::array<std::size_t, kNumClasses>, kNumClasses> counts{};

  void add(std::size_t gold, std::size_t predicted);
  std::size_t total() const;
  std::size_t support(std::size_t cls) const;
  std::size_t trace() const;
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion_matrix(std::span<const std::size_t> gold, std::span<const std::size_t> predicted);

double accuracy(const ConfusionMatrix& cm);
/// F1 of one class as 2tp / (2tp + fp + fn); 0 when the class is neither
/// predicted nor present.
double class_f1(const ConfusionMatrix& cm, std::size_t cls);
/// Unweighted mean of the per-class F1 over all three classes.
double macro_f1(const ConfusionMatrix& cm);

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  ConfusionMatrix confusion;
};

/// Accuracy and macro-F1 of predictions. Macro-F1 is computed from the
/// confusion matrix and cross-checked against a direct count over the
/// label pairs; a mismatch throws std::logic_error.
Evaluation score(std::span<const std::size_t> gold, std::span<const std::size_t> predicted);

}  // namespace yun
