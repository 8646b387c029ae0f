#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pubench/error.hpp"
#include "pubench/loss.hpp"
#include "pubench/matrix.hpp"
#include "pubench/random.hpp"

namespace pubench {

struct Architecture {
  enum class Kind { Linear, Mlp };

  Kind kind = Kind::Linear;
  std::size_t input_dim = 1;
  std::size_t hidden = 0;  // Mlp only

  static Architecture linear(std::size_t d) { return {Kind::Linear, d, 0}; }
  static Architecture mlp(std::size_t d, std::size_t h) { return {Kind::Mlp, d, h}; }

  std::size_t parameter_count() const {
    return kind == Kind::Linear ? input_dim + 1 : hidden * (input_dim + 1) + hidden + 1;
  }

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

// Scorer f: R^d -> R with a flat parameter vector.
//
// Linear layout: [w_0 .. w_{d-1}, b].
// Mlp layout:    [W1 (h x d, row-major), b1 (h), w2 (h), b2], tanh hidden units.
class Classifier {
 public:
  Classifier() = default;

  explicit Classifier(Architecture arch)
      : arch_(arch), params_(arch.parameter_count(), 0.0) {
    if (arch.input_dim < 1) throw ValidationError("classifier input dim must be >= 1");
    if (arch.kind == Architecture::Kind::Mlp && arch.hidden < 1) {
      throw ValidationError("mlp hidden width must be >= 1");
    }
  }

  Classifier(Architecture arch, Vector params) : Classifier(arch) {
    if (params.size() != params_.size()) {
      throw ValidationError("expected " + std::to_string(params_.size()) +
                            " parameters, got " + std::to_string(params.size()));
    }
    params_ = std::move(params);
  }

  // Hidden weights ~ U(+-1/sqrt(d)), output weights ~ U(+-1/sqrt(h)), biases 0.
  // A linear model uses the hidden-layer rule for its weights.
  static Classifier initialized(Architecture arch, Rng& rng) {
    Classifier c(arch);
    const std::size_t d = arch.input_dim;
    const double in_bound = 1.0 / std::sqrt(static_cast<double>(d));
    if (arch.kind == Architecture::Kind::Linear) {
      for (std::size_t j = 0; j < d; ++j) c.params_[j] = rng.uniform(-in_bound, in_bound);
      return c;
    }
    const std::size_t h = arch.hidden;
    const double out_bound = 1.0 / std::sqrt(static_cast<double>(h));
    for (std::size_t k = 0; k < h * d; ++k) c.params_[k] = rng.uniform(-in_bound, in_bound);
    for (std::size_t k = 0; k < h; ++k) {
      c.params_[h * d + h + k] = rng.uniform(-out_bound, out_bound);
    }
    return c;
  }

  const Architecture& architecture() const noexcept { return arch_; }
  std::size_t input_dim() const noexcept { return arch_.input_dim; }
  std::size_t parameter_count() const noexcept { return params_.size(); }
  const Vector& parameters() const noexcept { return params_; }
  Vector& parameters() noexcept { return params_; }

  double score(std::span<const double> x) const {
    const std::size_t d = arch_.input_dim;
    if (arch_.kind == Architecture::Kind::Linear) {
      double s = params_[d];
      for (std::size_t j = 0; j < d; ++j) s += params_[j] * x[j];
      return s;
    }
    const std::size_t h = arch_.hidden;
    double s = params_[h * d + 2 * h];
    for (std::size_t k = 0; k < h; ++k) s += params_[h * d + h + k] * hidden_unit(k, x);
    return s;
  }

  Vector score_batch(const Matrix& X) const {
    check_dim(X);
    Vector out(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) out[i] = score(X.row(i));
    return out;
  }

  // sum_i coeff[i] * d f(x_i) / d theta.
  Vector gradient(const Matrix& X, std::span<const double> coeff) const {
    check_dim(X);
    if (coeff.size() != X.rows()) throw ValidationError("gradient: coefficient count mismatch");
    Vector grad(params_.size(), 0.0);
    const std::size_t d = arch_.input_dim;
    if (arch_.kind == Architecture::Kind::Linear) {
      for (std::size_t i = 0; i < X.rows(); ++i) {
        const double g = coeff[i];
        if (g == 0.0) continue;
        auto x = X.row(i);
        for (std::size_t j = 0; j < d; ++j) grad[j] += g * x[j];
        grad[d] += g;
      }
      return grad;
    }
    const std::size_t h = arch_.hidden;
    const std::size_t b1 = h * d, w2 = h * d + h, b2 = h * d + 2 * h;
    for (std::size_t i = 0; i < X.rows(); ++i) {
      const double g = coeff[i];
      if (g == 0.0) continue;
      auto x = X.row(i);
      grad[b2] += g;
      for (std::size_t k = 0; k < h; ++k) {
        const double a = hidden_unit(k, x);
        grad[w2 + k] += g * a;
        const double delta = g * params_[w2 + k] * (1.0 - a * a);
        grad[b1 + k] += delta;
        for (std::size_t j = 0; j < d; ++j) grad[k * d + j] += delta * x[j];
      }
    }
    return grad;
  }

  bool all_finite() const {
    for (double v : params_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  friend bool operator==(const Classifier&, const Classifier&) = default;

 private:
  double hidden_unit(std::size_t k, std::span<const double> x) const {
    const std::size_t d = arch_.input_dim;
    double pre = params_[arch_.hidden * d + k];
    const double* w = params_.data() + k * d;
    for (std::size_t j = 0; j < d; ++j) pre += w[j] * x[j];
    return std::tanh(pre);
  }

  void check_dim(const Matrix& X) const {
    if (X.cols() != arch_.input_dim) {
      throw ValidationError("input has " + std::to_string(X.cols()) +
                            " features, classifier expects " +
                            std::to_string(arch_.input_dim));
    }
  }

  Architecture arch_;
  Vector params_;
};

struct LossAndGrad {
  double value = 0.0;
  Vector grad;
};

// value = sum_i weights[i] * l(f(x_i), signs[i]) and its exact parameter
// gradient. Weights may be negative.
inline LossAndGrad weighted_loss_and_grad(const Classifier& clf, const Matrix& X,
                                          std::span<const int> signs,
                                          std::span<const double> weights,
                                          const SurrogateLoss& loss) {
  if (signs.size() != X.rows() || weights.size() != X.rows()) {
    throw ValidationError("weighted_loss_and_grad: " + std::to_string(X.rows()) + " rows, " +
                          std::to_string(signs.size()) + " signs, " +
                          std::to_string(weights.size()) + " weights");
  }
  const Vector scores = clf.score_batch(X);
  LossAndGrad out;
  Vector coeff(X.rows(), 0.0);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    if (weights[i] == 0.0) continue;
    out.value += weights[i] * loss.value(scores[i], signs[i]);
    coeff[i] = weights[i] * loss.derivative(scores[i], signs[i]);
  }
  out.grad = clf.gradient(X, coeff);
  if (!std::isfinite(out.value)) throw NonFiniteError("weighted loss is not finite");
  for (double g : out.grad) {
    if (!std::isfinite(g)) throw NonFiniteError("weighted loss gradient is not finite");
  }
  return out;
}

}  // namespace pubench
