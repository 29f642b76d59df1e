#include "yun/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "yun/errors.hpp"

namespace yun {

namespace {

#ifdef NDEBUG
bool g_finite_checks = false;
#else
bool g_finite_checks = true;
#endif

[[noreturn]] void shape_fail(OpKind kind, const Tensor& a, const Tensor& b, const std::string& why) {
  throw ShapeError(std::string(op_name(kind)) + ": " + why + " (got " + a.shape_string() + " and " +
                   b.shape_string() + ")");
}

Tape& tape_of(Var a) {
  if (!a.valid()) throw UsageError("operation on an unbound Var");
  return *a.tape();
}

Tape& tape_of(Var a, Var b) {
  Tape& t = tape_of(a);
  if (b.tape() != &t) throw UsageError("operands recorded on different tapes");
  return t;
}

// out(m x n) += a(m x k) * b(k x n)
void gemm_nn(const Tensor& a, const Tensor& b, Tensor& out) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  for (std::size_t i = 0; i < m; ++i) {
    double* orow = &out(i, 0);
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a(i, p);
      if (av == 0.0) continue;
      const double* brow = b.row_span(p).data();
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
}

// out(m x n) += a(m x k) * b(n x k)^T
void gemm_nt(const Tensor& a, const Tensor& b, Tensor& out) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a.row_span(i).data();
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = b.row_span(j).data();
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
      out(i, j) += s;
    }
  }
}

// out(k x n) += a(m x k)^T * b(m x n)
void gemm_tn(const Tensor& a, const Tensor& b, Tensor& out) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  for (std::size_t i = 0; i < m; ++i) {
    const double* brow = b.row_span(i).data();
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a(i, p);
      if (av == 0.0) continue;
      double* orow = &out(p, 0);
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
}

template <typename F, typename D>
Var unary(Var a, OpKind kind, F f, D dfdy) {
  Tape& t = tape_of(a);
  const Tensor& x = a.value();
  Tensor y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  const std::size_t ai = a.index();
  return t.record(kind, std::move(y), {ai}, [ai, dfdy](Tape& tp, std::size_t self) {
    const Tensor& xv = tp.value(ai);
    const Tensor& yv = tp.value(self);
    const Tensor& g = tp.grad(self);
    Tensor& ga = tp.grad(ai);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * dfdy(xv[i], yv[i]);
  });
}

}  // namespace

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::Leaf: return "leaf";
    case OpKind::Constant: return "constant";
    case OpKind::MatMul: return "matmul";
    case OpKind::MatMulTransposed: return "matmul_transposed";
    case OpKind::Add: return "add";
    case OpKind::Concat: return "concat";
    case OpKind::ConcatRows: return "concat_rows";
    case OpKind::Mul: return "elementwise-mul";
    case OpKind::Tanh: return "tanh";
    case OpKind::Sigmoid: return "sigmoid";
    case OpKind::Relu: return "relu";
    case OpKind::Softmax: return "softmax";
    case OpKind::WeightedSum: return "weighted-sum";
    case OpKind::Mean: return "mean";
    case OpKind::Sum: return "sum";
    case OpKind::CrossEntropy: return "cross-entropy-loss";
    case OpKind::SliceCols: return "slice_cols";
    case OpKind::GatherRow: return "gather_row";
  }
  return "unknown";
}

void set_finite_checks(bool enabled) { g_finite_checks = enabled; }
bool finite_checks() { return g_finite_checks; }

// GradientMap

const Tensor* GradientMap::find(const Parameter& p) const {
  auto it = index_.find(&p);
  return it == index_.end() ? nullptr : &entries_[it->second].second;
}

const Tensor& GradientMap::at(const Parameter& p) const {
  const Tensor* g = find(p);
  if (!g) throw UsageError("no gradient for parameter '" + p.name + "'");
  return *g;
}

void GradientMap::insert(const Parameter& p, Tensor grad) {
  if (!grad.same_shape(p.value))
    throw ShapeError("gradient " + grad.shape_string() + " does not match parameter '" + p.name + "' " +
                     p.value.shape_string());
  auto it = index_.find(&p);
  if (it != index_.end()) {
    entries_[it->second].second = std::move(grad);
    return;
  }
  index_.emplace(&p, entries_.size());
  entries_.emplace_back(&p, std::move(grad));
}

void GradientMap::accumulate(const GradientMap& other) {
  for (const auto& [param, g] : other.entries_) {
    auto it = index_.find(param);
    if (it == index_.end()) {
      insert(*param, g);
      continue;
    }
    Tensor& mine = entries_[it->second].second;
    for (std::size_t i = 0; i < mine.size(); ++i) mine[i] += g[i];
  }
}

void GradientMap::scale(double factor) {
  for (auto& e : entries_)
    for (double& v : e.second.data()) v *= factor;
}

bool operator==(const GradientMap& a, const GradientMap& b) {
  if (a.entries_.size() != b.entries_.size()) return false;
  for (std::size_t i = 0; i < a.entries_.size(); ++i) {
    if (a.entries_[i].first->name != b.entries_[i].first->name) return false;
    if (!(a.entries_[i].second == b.entries_[i].second)) return false;
  }
  return true;
}

// Var / Tape

const Tensor& Var::value() const {
  if (!tape_) throw UsageError("value of an unbound Var");
  return tape_->value(index_);
}

Var Tape::parameter(const Parameter& p) {
  if (consumed_) throw UsageError("cannot record on a consumed tape");
  if (!p.trainable) {
    Node n;
    n.kind = OpKind::Constant;
    n.borrowed = &p.value;
    nodes_.push_back(std::move(n));
    return Var(this, nodes_.size() - 1);
  }
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return Var(this, it->second);
  Node n;
  n.kind = OpKind::Leaf;
  n.borrowed = &p.value;
  n.param = &p;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  param_nodes_.emplace(&p, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  if (consumed_) throw UsageError("cannot record on a consumed tape");
  Node n;
  n.kind = OpKind::Constant;
  n.owned = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(OpKind kind, Tensor value, std::vector<std::size_t> inputs, BackwardFn backward) {
  if (consumed_) throw UsageError("cannot record on a consumed tape");
  if (g_finite_checks && !value.all_finite())
    throw NumericError(std::string(op_name(kind)) + ": non-finite output " + value.shape_string());
  Node n;
  n.kind = kind;
  n.owned = std::move(value);
  n.inputs = std::move(inputs);
  for (std::size_t i : n.inputs) {
    if (i >= nodes_.size()) throw UsageError("op input recorded after its consumer");
    n.requires_grad = n.requires_grad || nodes_[i].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::value(std::size_t i) const {
  const Node& n = nodes_[i];
  return n.borrowed ? *n.borrowed : n.owned;
}

Tensor& Tape::grad(std::size_t i) {
  Node& n = nodes_[i];
  if (n.grad.empty()) {
    const Tensor& v = value(i);
    n.grad = Tensor(v.rows(), v.cols());
  }
  return n.grad;
}

GradientMap Tape::backward(Var loss) {
  if (consumed_) throw UsageError("backward called twice on the same tape");
  if (loss.tape() != this) throw UsageError("loss was not recorded on this tape");
  const Tensor& lv = loss.value();
  if (lv.rows() != 1 || lv.cols() != 1)
    throw ShapeError("backward: loss must be scalar, got " + lv.shape_string());
  if (loss.index() + 1 != nodes_.size()) throw UsageError("backward: loss must be the final tape output");
  consumed_ = true;

  grad(loss.index())[0] = 1.0;
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty() || !n.backward) continue;
    n.backward(*this, i);
  }

  GradientMap out;
  for (Node& n : nodes_) {
    if (n.kind != OpKind::Leaf || !n.param) continue;
    if (n.grad.empty()) n.grad = Tensor(n.borrowed->rows(), n.borrowed->cols());
    out.insert(*n.param, std::move(n.grad));
  }
  return out;
}

// Operations

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.rows()) shape_fail(OpKind::MatMul, av, bv, "inner dimensions differ");
  Tensor y(av.rows(), bv.cols());
  gemm_nn(av, bv, y);
  const std::size_t ai = a.index(), bi = b.index();
  return t.record(OpKind::MatMul, std::move(y), {ai, bi}, [ai, bi](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    if (tp.requires_grad(ai)) gemm_nt(g, tp.value(bi), tp.grad(ai));
    if (tp.requires_grad(bi)) gemm_tn(tp.value(ai), g, tp.grad(bi));
  });
}

Var matmul_transposed(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.cols())
    shape_fail(OpKind::MatMulTransposed, av, bv, "operands need equal column counts");
  Tensor y(av.rows(), bv.rows());
  gemm_nt(av, bv, y);
  const std::size_t ai = a.index(), bi = b.index();
  return t.record(OpKind::MatMulTransposed, std::move(y), {ai, bi}, [ai, bi](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    if (tp.requires_grad(ai)) gemm_nn(g, tp.value(bi), tp.grad(ai));
    if (tp.requires_grad(bi)) gemm_tn(g, tp.value(ai), tp.grad(bi));
  });
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const bool bias = !av.same_shape(bv);
  if (bias && !(bv.rows() == 1 && bv.cols() == av.cols()))
    shape_fail(OpKind::Add, av, bv, "expected equal shapes or a 1 x cols bias row");
  Tensor y = av;
  for (std::size_t r = 0; r < y.rows(); ++r) {
    auto yr = y.row_span(r);
    auto br = bv.row_span(bias ? 0 : r);
    for (std::size_t c = 0; c < yr.size(); ++c) yr[c] += br[c];
  }
  const std::size_t ai = a.index(), bi = b.index();
  return t.record(OpKind::Add, std::move(y), {ai, bi}, [ai, bi, bias](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    if (tp.requires_grad(ai)) {
      Tensor& ga = tp.grad(ai);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (tp.requires_grad(bi)) {
      Tensor& gb = tp.grad(bi);
      if (!bias) {
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
      } else {
        for (std::size_t r = 0; r < g.rows(); ++r) {
          auto gr = g.row_span(r);
          for (std::size_t c = 0; c < gr.size(); ++c) gb[c] += gr[c];
        }
      }
    }
  });
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat: no operands");
  Tape& t = tape_of(parts[0]);
  const std::size_t rows = parts[0].rows();
  std::size_t cols = 0;
  std::vector<std::size_t> inputs;
  std::vector<std::size_t> offsets;
  for (const Var& p : parts) {
    if (p.tape() != &t) throw UsageError("operands recorded on different tapes");
    if (p.rows() != rows) shape_fail(OpKind::Concat, parts[0].value(), p.value(), "row counts differ");
    inputs.push_back(p.index());
    offsets.push_back(cols);
    cols += p.cols();
  }
  Tensor y(rows, cols);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& v = parts[k].value();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy(v.row_span(r).begin(), v.row_span(r).end(), &y(r, offsets[k]));
  }
  auto ins = inputs;
  return t.record(OpKind::Concat, std::move(y), std::move(inputs),
                  [ins = std::move(ins), offsets = std::move(offsets)](Tape& tp, std::size_t self) {
                    const Tensor& g = tp.grad(self);
                    for (std::size_t k = 0; k < ins.size(); ++k) {
                      if (!tp.requires_grad(ins[k])) continue;
                      Tensor& gk = tp.grad(ins[k]);
                      for (std::size_t r = 0; r < gk.rows(); ++r)
                        for (std::size_t c = 0; c < gk.cols(); ++c) gk(r, c) += g(r, offsets[k] + c);
                    }
                  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no operands");
  Tape& t = tape_of(parts[0]);
  const std::size_t cols = parts[0].cols();
  std::size_t rows = 0;
  std::vector<std::size_t> inputs;
  std::vector<std::size_t> offsets;
  for (const Var& p : parts) {
    if (p.tape() != &t) throw UsageError("operands recorded on different tapes");
    if (p.cols() != cols)
      shape_fail(OpKind::ConcatRows, parts[0].value(), p.value(), "column counts differ");
    inputs.push_back(p.index());
    offsets.push_back(rows);
    rows += p.rows();
  }
  Tensor y(rows, cols);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& v = parts[k].value();
    std::copy(v.data().begin(), v.data().end(), &y(offsets[k], 0));
  }
  auto ins = inputs;
  return t.record(OpKind::ConcatRows, std::move(y), std::move(inputs),
                  [ins = std::move(ins), offsets = std::move(offsets)](Tape& tp, std::size_t self) {
                    const Tensor& g = tp.grad(self);
                    for (std::size_t k = 0; k < ins.size(); ++k) {
                      if (!tp.requires_grad(ins[k])) continue;
                      Tensor& gk = tp.grad(ins[k]);
                      const double* src = g.row_span(offsets[k]).data();
                      for (std::size_t i = 0; i < gk.size(); ++i) gk[i] += src[i];
                    }
                  });
}

Var mul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (!av.same_shape(bv)) shape_fail(OpKind::Mul, av, bv, "shapes differ");
  Tensor y(av.rows(), av.cols());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] * bv[i];
  const std::size_t ai = a.index(), bi = b.index();
  return t.record(OpKind::Mul, std::move(y), {ai, bi}, [ai, bi](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    if (tp.requires_grad(ai)) {
      const Tensor& bv2 = tp.value(bi);
      Tensor& ga = tp.grad(ai);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv2[i];
    }
    if (tp.requires_grad(bi)) {
      const Tensor& av2 = tp.value(ai);
      Tensor& gb = tp.grad(bi);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av2[i];
    }
  });
}

Var tanh(Var a) {
  return unary(
      a, OpKind::Tanh, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Var a) {
  return unary(
      a, OpKind::Sigmoid,
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var relu(Var a) {
  return unary(
      a, OpKind::Relu, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var softmax(Var a) {
  Tape& t = tape_of(a);
  const Tensor& x = a.value();
  Tensor y(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto xr = x.row_span(r);
    auto yr = y.row_span(r);
    const double mx = *std::max_element(xr.begin(), xr.end());
    double z = 0.0;
    for (std::size_t c = 0; c < xr.size(); ++c) z += (yr[c] = std::exp(xr[c] - mx));
    for (double& v : yr) v /= z;
  }
  const std::size_t ai = a.index();
  return t.record(OpKind::Softmax, std::move(y), {ai}, [ai](Tape& tp, std::size_t self) {
    const Tensor& yv = tp.value(self);
    const Tensor& g = tp.grad(self);
    Tensor& ga = tp.grad(ai);
    for (std::size_t r = 0; r < yv.rows(); ++r) {
      auto yr = yv.row_span(r);
      auto gr = g.row_span(r);
      double dot = 0.0;
      for (std::size_t c = 0; c < yr.size(); ++c) dot += yr[c] * gr[c];
      for (std::size_t c = 0; c < yr.size(); ++c) ga(r, c) += yr[c] * (gr[c] - dot);
    }
  });
}

Var weighted_sum(Var weights, Var rows) {
  const Tensor& w = weights.value();
  const Tensor& h = rows.value();
  if (w.rows() != 1 || w.cols() != h.rows())
    shape_fail(OpKind::WeightedSum, w, h, "expected 1 x n weights over n rows");
  Tape& t = tape_of(weights, rows);
  Tensor y(1, h.cols());
  gemm_nn(w, h, y);
  const std::size_t wi = weights.index(), hi = rows.index();
  return t.record(OpKind::WeightedSum, std::move(y), {wi, hi}, [wi, hi](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    if (tp.requires_grad(wi)) gemm_nt(g, tp.value(hi), tp.grad(wi));
    if (tp.requires_grad(hi)) gemm_tn(tp.value(wi), g, tp.grad(hi));
  });
}

Var mean(Var a) {
  Tape& t = tape_of(a);
  const Tensor& x = a.value();
  double s = 0.0;
  for (double v : x.data()) s += v;
  const double n = static_cast<double>(x.size());
  const std::size_t ai = a.index();
  return t.record(OpKind::Mean, Tensor::scalar(s / n), {ai}, [ai, n](Tape& tp, std::size_t self) {
    const double g = tp.grad(self)[0] / n;
    for (double& v : tp.grad(ai).data()) v += g;
  });
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  const std::size_t ai = a.index();
  return t.record(OpKind::Sum, Tensor::scalar(s), {ai}, [ai](Tape& tp, std::size_t self) {
    const double g = tp.grad(self)[0];
    for (double& v : tp.grad(ai).data()) v += g;
  });
}

Var softmax_cross_entropy(Var logits, std::size_t target, double weight) {
  Tape& t = tape_of(logits);
  const Tensor& x = logits.value();
  if (x.rows() != 1) throw ShapeError("cross-entropy-loss: expected a 1 x C logit row, got " + x.shape_string());
  if (target >= x.cols())
    throw ShapeError("cross-entropy-loss: target " + std::to_string(target) + " outside " + x.shape_string());
  const double mx = *std::max_element(x.data().begin(), x.data().end());
  double z = 0.0;
  for (double v : x.data()) z += std::exp(v - mx);
  const double lse = mx + std::log(z);
  const std::size_t ai = logits.index();
  return t.record(OpKind::CrossEntropy, Tensor::scalar(weight * (lse - x[target])), {ai},
                  [ai, target, lse, weight](Tape& tp, std::size_t self) {
                    const double g = tp.grad(self)[0] * weight;
                    const Tensor& xv = tp.value(ai);
                    Tensor& ga = tp.grad(ai);
                    for (std::size_t c = 0; c < xv.cols(); ++c)
                      ga[c] += g * (std::exp(xv[c] - lse) - (c == target ? 1.0 : 0.0));
                  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t count) {
  Tape& t = tape_of(a);
  const Tensor& x = a.value();
  if (count == 0 || begin + count > x.cols())
    throw ShapeError("slice_cols: columns [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                     ") outside " + x.shape_string());
  Tensor y(x.rows(), count);
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < count; ++c) y(r, c) = x(r, begin + c);
  const std::size_t ai = a.index();
  return t.record(OpKind::SliceCols, std::move(y), {ai}, [ai, begin](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& ga = tp.grad(ai);
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (std::size_t c = 0; c < g.cols(); ++c) ga(r, begin + c) += g(r, c);
  });
}

Var gather_row(Var table, std::size_t row) {
  Tape& t = tape_of(table);
  const Tensor& x = table.value();
  if (row >= x.rows())
    throw std::out_of_range("gather_row: row " + std::to_string(row) + " outside " + x.shape_string());
  Tensor y(1, x.cols());
  std::copy(x.row_span(row).begin(), x.row_span(row).end(), y.data().begin());
  const std::size_t ai = table.index();
  return t.record(OpKind::GatherRow, std::move(y), {ai}, [ai, row](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    auto dst = tp.grad(ai).row_span(row);
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += g[c];
  });
}

}  // namespace yun
