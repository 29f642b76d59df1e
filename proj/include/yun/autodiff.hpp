#pragma once

// Reverse-mode automatic differentiation over 2-D tensors.
//
// A Tape records every operation of one forward pass. Parameters enter the
// tape as leaves that reference (never copy) the parameter's value, so a
// Parameter must outlive any tape it was registered on. Gradients flow back
// in exact reverse recording order.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "yun/tensor.hpp"

namespace yun {

struct Parameter {
  std::string name;
  Tensor value;
  bool trainable = true;
};

enum class OpKind {
  Leaf,
  Constant,
  MatMul,
  MatMulTransposed,
  Add,
  Concat,
  ConcatRows,
  Mul,
  Tanh,
  Sigmoid,
  Relu,
  Softmax,
  WeightedSum,
  Mean,
  Sum,
  CrossEntropy,
  SliceCols,
  GatherRow,
};

const char* op_name(OpKind kind);

/// Enables NaN/Inf checks on every op output. Defaults to on unless NDEBUG.
void set_finite_checks(bool enabled);
bool finite_checks();

/// Parameter -> gradient, in order of first registration on the tape.
class GradientMap {
 public:
  const Tensor* find(const Parameter& p) const;
  const Tensor& at(const Parameter& p) const;
  bool contains(const Parameter& p) const { return find(p) != nullptr; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<std::pair<const Parameter*, Tensor>>& entries() const { return entries_; }

  void insert(const Parameter& p, Tensor grad);
  /// Adds `other` entry-wise, iterating in other's order.
  void accumulate(const GradientMap& other);
  void scale(double factor);

  friend bool operator==(const GradientMap& a, const GradientMap& b);

 private:
  std::vector<std::pair<const Parameter*, Tensor>> entries_;
  std::unordered_map<const Parameter*, std::size_t> index_;
};

class Tape;

/// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;
  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  Tape* tape() const { return tape_; }
  std::size_t index() const { return index_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}
  Tape* tape_ = nullptr;
  std::size_t index_ = 0;
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Registers a parameter leaf. Registering the same parameter again
  /// returns the existing leaf. Frozen parameters become constants.
  Var parameter(const Parameter& p);
  Var constant(Tensor value);

  /// Records an op output. `backward` may be empty for ops without inputs
  /// that require gradients.
  Var record(OpKind kind, Tensor value, std::vector<std::size_t> inputs, BackwardFn backward);

  const Tensor& value(std::size_t i) const;
  /// Gradient buffer of node i, zero-allocated on first access.
  Tensor& grad(std::size_t i);
  bool requires_grad(std::size_t i) const { return nodes_[i].requires_grad; }
  std::size_t size() const { return nodes_.size(); }
  OpKind kind(std::size_t i) const { return nodes_[i].kind; }
  const std::vector<std::size_t>& inputs(std::size_t i) const { return nodes_[i].inputs; }

  /// Reverse pass from a scalar loss. A tape can be consumed once.
  GradientMap backward(Var loss);
  bool consumed() const { return consumed_; }

 private:
  struct Node {
    OpKind kind = OpKind::Constant;
    Tensor owned;
    const Tensor* borrowed = nullptr;
    const Parameter* param = nullptr;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    Tensor grad;
    bool requires_grad = false;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
  bool consumed_ = false;
};

// Operations. All operands must live on the same tape.

/// (m x k) * (k x n)
Var matmul(Var a, Var b);
/// (m x k) * (n x k)^T -> m x n
Var matmul_transposed(Var a, Var b);
/// Same-shape sum, or matrix plus a 1 x cols bias row broadcast over rows.
Var add(Var a, Var b);
/// Concatenation along columns; all parts share the row count.
Var concat(std::span<const Var> parts);
/// Stacks parts vertically; all parts share the column count.
Var concat_rows(std::span<const Var> parts);
Var mul(Var a, Var b);
Var tanh(Var a);
Var sigmoid(Var a);
Var relu(Var a);
/// Row-wise softmax.
Var softmax(Var a);
/// weights (1 x n) times rows (n x k) -> 1 x k
Var weighted_sum(Var weights, Var rows);
Var mean(Var a);
Var sum(Var a);
/// Softmax cross-entropy of a 1 x C logit row against class `target`,
/// scaled by `weight`. Uses the log-sum-exp form.
Var softmax_cross_entropy(Var logits, std::size_t target, double weight = 1.0);
Var slice_cols(Var a, std::size_t begin, std::size_t count);
/// Row `row` of `table` as a 1 x cols tensor; gradients scatter into that row.
Var gather_row(Var table, std::size_t row);

}  // namespace yun
