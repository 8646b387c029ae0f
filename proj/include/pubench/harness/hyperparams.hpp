#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "pubench/error.hpp"
#include "pubench/random.hpp"

namespace pubench::harness {

// One point of the random search. batch_size is the total mini-batch; it is
// split between D_P and D_U in proportion to their sizes (see batch_split).
struct HyperparamDraw {
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  double tolerance = 0.0;

  friend bool operator==(const HyperparamDraw&, const HyperparamDraw&) = default;
};

// lr = 10^U(-4.5, -2.5), batch = round(2^U(4, 7)).
inline HyperparamDraw sample_hyperparams(Rng& rng, double weight_decay = 1e-4,
                                         double tolerance = 0.0) {
  HyperparamDraw h;
  h.learning_rate = std::pow(10.0, rng.uniform(-4.5, -2.5));
  h.batch_size = static_cast<std::size_t>(std::lround(std::exp2(rng.uniform(4.0, 7.0))));
  h.weight_decay = weight_decay;
  h.tolerance = tolerance;
  return h;
}

struct BatchSplit {
  std::size_t positive = 1;
  std::size_t unlabeled = 1;
};

// Splits a total batch so that P and U appear in the proportions of the
// training pools. Drawing fixed equal halves instead would make the
// replenished batch U u P a biased sample of the marginal under OS.
inline BatchSplit batch_split(std::size_t total, std::size_t n_positive,
                              std::size_t n_unlabeled) {
  if (n_positive < 1 || n_unlabeled < 1) {
    throw ValidationError("batch_split needs nonempty pools");
  }
  if (total < 2) throw ValidationError("total batch size must be >= 2");
  const double frac = static_cast<double>(n_positive) /
                      static_cast<double>(n_positive + n_unlabeled);
  BatchSplit b;
  b.positive = static_cast<std::size_t>(std::lround(frac * static_cast<double>(total)));
  b.positive = std::clamp<std::size_t>(b.positive, 1, total - 1);
  b.unlabeled = total - b.positive;
  b.positive = std::min(b.positive, n_positive);
  b.unlabeled = std::min(b.unlabeled, n_unlabeled);
  return b;
}

}  // namespace pubench::harness
