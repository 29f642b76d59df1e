#include "yun/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "yun/errors.hpp"

namespace yun {

namespace {

double evaluate(const LossFn& fn) {
  Tape tape;
  Var loss = fn(tape);
  const Tensor& v = loss.value();
  if (v.size() != 1) throw ShapeError("grad_check: loss must be scalar, got " + v.shape_string());
  return v[0];
}

}  // namespace

GradCheckResult grad_check_detailed(const LossFn& fn, std::span<Parameter* const> params, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("grad_check: step must be positive");

  const double base = evaluate(fn);
  if (evaluate(fn) != base) throw UsageError("grad_check: loss function is not deterministic");

  GradientMap analytic;
  {
    Tape tape;
    Var loss = fn(tape);
    analytic = tape.backward(loss);
  }

  GradCheckResult result;
  for (Parameter* p : params) {
    const Tensor* g = analytic.find(*p);
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double original = p->value[i];
      p->value[i] = original + step;
      const double up = evaluate(fn);
      p->value[i] = original - step;
      const double down = evaluate(fn);
      p->value[i] = original;

      const double numeric = (up - down) / (2.0 * step);
      const double a = g ? (*g)[i] : 0.0;
      const double err = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
      ++result.coordinates;
      if (err > result.max_relative_error) {
        result.max_relative_error = err;
        char detail[96];
        std::snprintf(detail, sizeof detail, "] analytic %.6g numeric %.6g", a, numeric);
        result.worst = p->name + "[" + std::to_string(i) + detail;
      }
    }
  }
  return result;
}

}  // namespace yun
