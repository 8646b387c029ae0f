#pragma once

#include <cmath>
#include <span>

#include "pubench/classifier.hpp"
#include "pubench/error.hpp"

namespace pubench {

// SGD with heavy-ball momentum. Weight decay enters here, not in the loss.
struct OptimizerState {
  double learning_rate = 1e-3;
  double momentum = 0.9;
  double weight_decay = 0.0;
  Vector velocity;

  static OptimizerState for_classifier(const Classifier& clf, double learning_rate,
                                       double momentum, double weight_decay) {
    if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ValidationError("momentum must be in [0, 1)");
    if (!(weight_decay >= 0.0)) throw ValidationError("weight decay must be >= 0");
    return {learning_rate, momentum, weight_decay, Vector(clf.parameter_count(), 0.0)};
  }
};

// velocity <- momentum * velocity + grad + weight_decay * theta
// theta    <- theta - learning_rate * velocity
// Leaves both untouched and throws NonFiniteError if the update is not finite.
inline void sgd_step(Classifier& clf, std::span<const double> grad, OptimizerState& opt) {
  Vector& theta = clf.parameters();
  if (grad.size() != theta.size() || opt.velocity.size() != theta.size()) {
    throw ValidationError("sgd_step: gradient, velocity and parameter shapes differ");
  }
  Vector velocity(theta.size());
  Vector next(theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j) {
    velocity[j] = opt.momentum * opt.velocity[j] + grad[j] + opt.weight_decay * theta[j];
    next[j] = theta[j] - opt.learning_rate * velocity[j];
    if (!std::isfinite(next[j]) || !std::isfinite(velocity[j])) {
      throw NonFiniteError("non-finite parameter update at coordinate " + std::to_string(j));
    }
  }
  opt.velocity = std::move(velocity);
  theta = std::move(next);
}

}  // namespace pubench
