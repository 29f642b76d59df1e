#include "yun/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "yun/errors.hpp"

namespace yun {

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {
  if (rows == 0 || cols == 0)
    throw ShapeError("tensor dimensions must be positive, got [" + std::to_string(rows) + " x " +
                     std::to_string(cols) + "]");
}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows == 0 || cols == 0)
    throw ShapeError("tensor dimensions must be positive, got [" + std::to_string(rows) + " x " +
                     std::to_string(cols) + "]");
  if (values_.size() != rows * cols)
    throw ShapeError("tensor " + shape_string() + " needs " + std::to_string(rows * cols) +
                     " values, got " + std::to_string(values_.size()));
}

Tensor Tensor::row(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor(1, n, std::move(values));
}

void Tensor::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double Tensor::squared_norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return s;
}

std::string Tensor::shape_string() const {
  return "[" + std::to_string(rows_) + " x " + std::to_string(cols_) + "]";
}

}  // namespace yun
