#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

#include "pubench/error.hpp"

namespace pubench {

enum class LossKind { Logistic, Sigmoid, Squared };

inline std::string_view to_string(LossKind k) {
  switch (k) {
    case LossKind::Logistic: return "logistic";
    case LossKind::Sigmoid: return "sigmoid";
    case LossKind::Squared: return "squared";
  }
  return "?";
}

inline LossKind parse_loss(std::string_view token) {
  if (token == "logistic") return LossKind::Logistic;
  if (token == "sigmoid") return LossKind::Sigmoid;
  if (token == "squared") return LossKind::Squared;
  throw ValidationError("unknown loss '" + std::string(token) +
                        "' (expected logistic|sigmoid|squared)");
}

namespace detail {

// 1 / (1 + exp(-t)) without overflow.
inline double logistic_fn(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// log(1 + exp(t)) without overflow.
inline double softplus(double t) {
  return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
}

}  // namespace detail

// Surrogate loss l(z, y) for score z and label y in {+1, -1}.
//   logistic: log(1 + exp(-yz))
//   sigmoid:  1 / (1 + exp(yz))
//   squared:  (1 - yz)^2 / 4
class SurrogateLoss {
 public:
  constexpr explicit SurrogateLoss(LossKind kind = LossKind::Logistic) : kind_(kind) {}

  LossKind kind() const noexcept { return kind_; }

  double value(double z, int y) const {
    const double m = static_cast<double>(y) * z;
    switch (kind_) {
      case LossKind::Logistic: return detail::softplus(-m);
      case LossKind::Sigmoid: return detail::logistic_fn(-m);
      case LossKind::Squared: return 0.25 * (1.0 - m) * (1.0 - m);
    }
    return 0.0;
  }

  // d/dz l(z, y).
  double derivative(double z, int y) const {
    const double sy = static_cast<double>(y);
    const double m = sy * z;
    switch (kind_) {
      case LossKind::Logistic: return -sy * detail::logistic_fn(-m);
      case LossKind::Sigmoid: {
        const double s = detail::logistic_fn(-m);
        return -sy * s * (1.0 - s);
      }
      case LossKind::Squared: return -0.5 * sy * (1.0 - m);
    }
    return 0.0;
  }

 private:
  LossKind kind_;
};

}  // namespace pubench
