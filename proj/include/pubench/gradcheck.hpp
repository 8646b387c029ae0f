#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "pubench/classifier.hpp"

namespace pubench {

// Max over coordinates of |analytic - numeric| / max(1e-8, |analytic| + |numeric|),
// numeric being the central difference with step h.
inline double finite_diff_check(const Classifier& clf, const Matrix& X,
                                std::span<const int> signs, std::span<const double> weights,
                                const SurrogateLoss& loss, double h) {
  if (!(h > 0.0)) throw ValidationError("finite-difference step must be > 0");
  const Vector analytic = weighted_loss_and_grad(clf, X, signs, weights, loss).grad;
  Classifier probe = clf;
  double worst = 0.0;
  for (std::size_t j = 0; j < clf.parameter_count(); ++j) {
    const double orig = probe.parameters()[j];
    probe.parameters()[j] = orig + h;
    const double up = weighted_loss_and_grad(probe, X, signs, weights, loss).value;
    probe.parameters()[j] = orig - h;
    const double down = weighted_loss_and_grad(probe, X, signs, weights, loss).value;
    probe.parameters()[j] = orig;
    const double numeric = (up - down) / (2.0 * h);
    const double err = std::abs(analytic[j] - numeric) /
                       std::max(1e-8, std::abs(analytic[j]) + std::abs(numeric));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace pubench
