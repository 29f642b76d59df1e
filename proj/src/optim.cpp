#include "yun/optim.hpp"

#include <cmath>

#include "yun/errors.hpp"

namespace yun {

std::string_view optimizer_name(OptimizerKind kind) {
  return kind == OptimizerKind::Adadelta ? "adadelta" : "sgd_momentum";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "adadelta") return OptimizerKind::Adadelta;
  if (name == "sgd_momentum") return OptimizerKind::SgdMomentum;
  throw ValidationError("unknown optimizer '" + std::string(name) + "' (expected adadelta or sgd_momentum)");
}

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
  if (!(weight_decay >= 0.0)) throw ValidationError("weight_decay must be >= 0");
  if (!(rho >= 0.0 && rho < 1.0)) throw ValidationError("rho must be in [0, 1)");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ValidationError("momentum must be in [0, 1)");
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be > 0");
}

namespace {

void check_shapes(const Tensor& param, const Tensor& grad) {
  if (!param.same_shape(grad))
    throw ShapeError("optimizer: gradient " + grad.shape_string() + " does not match parameter " +
                     param.shape_string());
}

}  // namespace

void adadelta_update(Tensor& param, const Tensor& grad, AdadeltaState& state, const OptimizerConfig& config) {
  check_shapes(param, grad);
  if (state.sq_grad.empty()) {
    state.sq_grad = Tensor(param.rows(), param.cols());
    state.sq_update = Tensor(param.rows(), param.cols());
  }
  const double rho = config.rho, eps = config.epsilon;
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i] + config.weight_decay * param[i];
    state.sq_grad[i] = rho * state.sq_grad[i] + (1.0 - rho) * g * g;
    const double dx = -std::sqrt(state.sq_update[i] + eps) / std::sqrt(state.sq_grad[i] + eps) * g;
    state.sq_update[i] = rho * state.sq_update[i] + (1.0 - rho) * dx * dx;
    param[i] += config.learning_rate * dx;
  }
}

void sgd_momentum_update(Tensor& param, const Tensor& grad, MomentumState& state, const OptimizerConfig& config) {
  check_shapes(param, grad);
  if (state.velocity.empty()) state.velocity = Tensor(param.rows(), param.cols());
  for (std::size_t i = 0; i < param.size(); ++i) {
    double& v = state.velocity[i];
    v = config.momentum * v + (grad[i] + config.weight_decay * param[i]);
    param[i] -= config.learning_rate * v;
  }
}

Optimizer::Optimizer(const OptimizerConfig& config, std::vector<Parameter*> params)
    : config_(config), params_(std::move(params)) {
  config_.validate();
  if (config_.kind == OptimizerKind::Adadelta)
    adadelta_.resize(params_.size());
  else
    momentum_.resize(params_.size());
}

void Optimizer::step(const GradientMap& grads) {
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Parameter& p = *params_[k];
    const Tensor* g = grads.find(p);
    Tensor zero;
    if (!g) {
      zero = Tensor(p.value.rows(), p.value.cols());
      g = &zero;
    } else if (!g->all_finite()) {
      throw NumericError("optimizer: non-finite gradient for parameter '" + p.name + "' " + g->shape_string());
    }
    if (config_.kind == OptimizerKind::Adadelta)
      adadelta_update(p.value, *g, adadelta_[k], config_);
    else
      sgd_momentum_update(p.value, *g, momentum_[k], config_);
  }
}

}  // namespace yun
