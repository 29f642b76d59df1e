#pragma once

#include <string_view>
#include <vector>

#include "yun/autodiff.hpp"

namespace yun {

enum class OptimizerKind { Adadelta, SgdMomentum };

std::string_view optimizer_name(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adadelta;
  double learning_rate = 0.01;
  double weight_decay = 1e-4;  // L2 coefficient added to the gradient
  double rho = 0.9;
  double epsilon = 1e-6;
  double momentum = 0.9;

  void validate() const;
  friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

struct AdadeltaState {
  Tensor sq_grad;    // E[g^2]
  Tensor sq_update;  // E[dx^2]
};

struct MomentumState {
  Tensor velocity;
};

/// g <- g + wd*x; E[g^2] <- rho E[g^2] + (1-rho) g^2;
/// dx = -sqrt(E[dx^2]+eps)/sqrt(E[g^2]+eps) g; E[dx^2] <- rho E[dx^2] + (1-rho) dx^2;
/// x <- x + lr*dx.
void adadelta_update(Tensor& param, const Tensor& grad, AdadeltaState& state, const OptimizerConfig& config);

/// v <- mu v + (g + wd*x); x <- x - lr v.
void sgd_momentum_update(Tensor& param, const Tensor& grad, MomentumState& state, const OptimizerConfig& config);

/// Per-parameter optimizer state over a fixed parameter list. Parameters
/// absent from a GradientMap are stepped with a zero gradient.
class Optimizer {
 public:
  Optimizer(const OptimizerConfig& config, std::vector<Parameter*> params);

  /// Throws NumericError naming the parameter if a gradient is not finite.
  void step(const GradientMap& grads);
  const OptimizerConfig& config() const { return config_; }

 private:
  OptimizerConfig config_;
  std::vector<Parameter*> params_;
  std::vector<AdadeltaState> adadelta_;
  std::vector<MomentumState> momentum_;
};

}  // namespace yun
