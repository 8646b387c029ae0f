#pragma once

// Closed-form quantities for linear scorers f(x) = w.x + b on isotropic
// Gaussian class conditionals. These are ground truth for tests and the
// acceptance suite; none of the estimators depend on them.

#include <cmath>
#include <numbers>
#include <span>

#include "pubench/data.hpp"

namespace pubench::gaussian {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// P(w.x + b >= 0 | y = +1) and P(w.x + b < 0 | y = -1).
inline double true_positive_rate(const GaussianMixtureSpec& spec, std::span<const double> w,
                                 double b) {
  const double norm = std::sqrt(dot(w, w));
  return normal_cdf((dot(w, spec.mean_pos) + b) / (spec.scale_pos * norm));
}

inline double true_negative_rate(const GaussianMixtureSpec& spec, std::span<const double> w,
                                 double b) {
  const double norm = std::sqrt(dot(w, w));
  return normal_cdf(-(dot(w, spec.mean_neg) + b) / (spec.scale_neg * norm));
}

inline double linear_accuracy(const GaussianMixtureSpec& spec, std::span<const double> w,
                              double b) {
  return spec.prior * true_positive_rate(spec, w, b) +
         (1.0 - spec.prior) * true_negative_rate(spec, w, b);
}

// P(w.x+ > w.x-); continuous scores, so ties have probability zero.
inline double linear_auc(const GaussianMixtureSpec& spec, std::span<const double> w) {
  const double norm = std::sqrt(dot(w, w));
  double gap = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) gap += w[j] * (spec.mean_pos[j] - spec.mean_neg[j]);
  const double spread =
      norm * std::sqrt(spec.scale_pos * spec.scale_pos + spec.scale_neg * spec.scale_neg);
  return normal_cdf(gap / spread);
}

struct LinearRule {
  Vector weights;
  double bias = 0.0;
};

// Bayes-optimal rule; requires equal class scales.
inline LinearRule bayes_rule(const GaussianMixtureSpec& spec) {
  spec.validate();
  if (spec.scale_pos != spec.scale_neg) {
    throw ValidationError("bayes_rule needs equal class scales");
  }
  const double var = spec.scale_pos * spec.scale_pos;
  LinearRule rule;
  rule.weights.resize(spec.dim);
  double sq_pos = 0.0, sq_neg = 0.0;
  for (std::size_t j = 0; j < spec.dim; ++j) {
    rule.weights[j] = (spec.mean_pos[j] - spec.mean_neg[j]) / var;
    sq_pos += spec.mean_pos[j] * spec.mean_pos[j];
    sq_neg += spec.mean_neg[j] * spec.mean_neg[j];
  }
  rule.bias = -(sq_pos - sq_neg) / (2.0 * var) + std::log(spec.prior / (1.0 - spec.prior));
  return rule;
}

inline double bayes_accuracy(const GaussianMixtureSpec& spec) {
  const LinearRule rule = bayes_rule(spec);
  return linear_accuracy(spec, rule.weights, rule.bias);
}

}  // namespace pubench::gaussian
