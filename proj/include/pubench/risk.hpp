#pragma once

// Cost-sensitive PU risk estimators.
//
// Every estimator here is a weighted sum of l(f(x), +1) and l(f(x), -1)
// over a positive batch P (size p) and an unlabeled batch U (size u):
//
//   uPU         (pi/p) sum_P [l(f,+1) - l(f,-1)] + (1/u) sum_U l(f,-1)
//   calibrated  (pi/p) sum_P [l(f,+1) + (c-1) l(f,-1)] + ((1-c pi)/u) sum_U l(f,-1)
//   nnPU        (pi/p) sum_P l(f,+1) + max(0, A) with
//               A = (1/u) sum_U l(f,-1) - (pi/p) sum_P l(f,-1)
//
// The calibrated form is unbiased when D_U follows the OS unlabeled density
// (class prior (1-c)pi/(1-c pi)). With c = p / (pi (p + u)) it equals uPU
// evaluated on the replenished unlabeled batch U u P, which is what the
// calibrated training loop does.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pubench/classifier.hpp"
#include "pubench/data.hpp"
#include "pubench/loss.hpp"
#include "pubench/optimizer.hpp"

namespace pubench {

struct RiskBatch {
  const Matrix& positives;
  const Matrix& unlabeled;
  double prior;
  std::optional<double> label_frequency;

  void validate() const {
    if (positives.rows() < 1 || unlabeled.rows() < 1) {
      throw ValidationError("risk batch needs at least one positive and one unlabeled row");
    }
    if (positives.cols() != unlabeled.cols()) {
      throw ValidationError("risk batch: positive and unlabeled dimensions differ");
    }
    require_prior(prior);
  }
};

struct RiskValue {
  double total = 0.0;
  double positive_part = 0.0;  // (pi/p) sum_P l(f,+1)
  double negative_part = 0.0;  // total - positive_part
};

enum class BaseEstimator { Upu, Nnpu, NnpuGa };

inline std::string_view to_string(BaseEstimator b) {
  switch (b) {
    case BaseEstimator::Upu: return "upu";
    case BaseEstimator::Nnpu: return "nnpu";
    case BaseEstimator::NnpuGa: return "nnpu-ga";
  }
  return "?";
}

struct EstimatorKind {
  BaseEstimator base = BaseEstimator::Upu;
  bool calibrated = false;  // replenish U with P on every mini-batch
  bool direct_formula = false;  // evaluate the calibrated formula instead of replenishing

  void validate() const {
    if (direct_formula && (base != BaseEstimator::Upu || !calibrated)) {
      throw ValidationError("direct calibrated evaluation is only defined for calibrated uPU");
    }
  }
};

namespace detail {

inline void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NonFiniteError(std::string(what) + " is not finite");
}

// Scores and per-row losses for one batch.
struct BatchLosses {
  Vector score_p, score_u;
  Vector pos_on_p;  // l(f(x), +1), x in P
  Vector neg_on_p;  // l(f(x), -1), x in P
  Vector neg_on_u;  // l(f(x), -1), x in U
  double mean_pos_on_p = 0.0, mean_neg_on_p = 0.0, mean_neg_on_u = 0.0;

  BatchLosses(const Matrix& P, const Matrix& U, const Classifier& clf,
              const SurrogateLoss& loss)
      : score_p(clf.score_batch(P)), score_u(clf.score_batch(U)) {
    pos_on_p.resize(score_p.size());
    neg_on_p.resize(score_p.size());
    neg_on_u.resize(score_u.size());
    for (std::size_t i = 0; i < score_p.size(); ++i) {
      pos_on_p[i] = loss.value(score_p[i], +1);
      neg_on_p[i] = loss.value(score_p[i], -1);
      mean_pos_on_p += pos_on_p[i];
      mean_neg_on_p += neg_on_p[i];
    }
    for (std::size_t j = 0; j < score_u.size(); ++j) {
      neg_on_u[j] = loss.value(score_u[j], -1);
      mean_neg_on_u += neg_on_u[j];
    }
    mean_pos_on_p /= static_cast<double>(score_p.size());
    mean_neg_on_p /= static_cast<double>(score_p.size());
    mean_neg_on_u /= static_cast<double>(score_u.size());
    require_finite(mean_pos_on_p + mean_neg_on_p + mean_neg_on_u, "batch loss");
  }
};

}  // namespace detail

inline RiskValue upu_risk(const RiskBatch& batch, const Classifier& clf,
                          const SurrogateLoss& loss) {
  batch.validate();
  const detail::BatchLosses L(batch.positives, batch.unlabeled, clf, loss);
  RiskValue r;
  r.positive_part = batch.prior * L.mean_pos_on_p;
  r.negative_part = L.mean_neg_on_u - batch.prior * L.mean_neg_on_p;
  r.total = r.positive_part + r.negative_part;
  return r;
}

inline RiskValue calibrated_risk(const RiskBatch& batch, const Classifier& clf,
                                 const SurrogateLoss& loss) {
  batch.validate();
  if (!batch.label_frequency) {
    throw ValidationError("calibrated risk needs a label frequency c");
  }
  const double c = *batch.label_frequency;
  const double pi = batch.prior;
  const detail::BatchLosses L(batch.positives, batch.unlabeled, clf, loss);
  RiskValue r;
  r.positive_part = pi * L.mean_pos_on_p;
  r.negative_part = pi * (c - 1.0) * L.mean_neg_on_p + (1.0 - c * pi) * L.mean_neg_on_u;
  r.total = r.positive_part + r.negative_part;
  return r;
}

struct NnpuRisk {
  RiskValue value;
  bool corrected = false;
};

// A = negative_part of uPU. Kept as is while A >= -tolerance, clamped to
// zero otherwise.
inline NnpuRisk nnpu_risk(const RiskBatch& batch, const Classifier& clf,
                          const SurrogateLoss& loss, double tolerance = 0.0) {
  const RiskValue u = upu_risk(batch, clf, loss);
  NnpuRisk out;
  out.value.positive_part = u.positive_part;
  if (u.negative_part >= -tolerance) {
    out.value = u;
  } else {
    out.value.negative_part = 0.0;
    out.value.total = u.positive_part;
    out.corrected = true;
  }
  return out;
}

// U u P: unlabeled rows first, positives appended, no deduplication.
inline Matrix replenish_batch(const Matrix& positive_batch, const Matrix& unlabeled_batch) {
  if (positive_batch.rows() < 1) throw ValidationError("replenish_batch: empty positive batch");
  if (positive_batch.cols() != unlabeled_batch.cols()) {
    throw ValidationError("replenish_batch: dimension mismatch");
  }
  return vstack(unlabeled_batch, positive_batch);
}

// Training objective for one mini-batch: the value the optimizer sees and
// the gradient it steps along.
struct Objective {
  RiskValue value;
  bool corrected = false;  // nnPU clamp or nnPU-GA ascent branch taken
  Vector grad;
};

struct ObjectiveOptions {
  double tolerance = 0.0;     // nnPU / nnPU-GA
  double ascent_scale = 1.0;  // nnPU-GA
};

// Objective for `kind` on (P, U). With kind.calibrated the unlabeled batch
// is replenished (or, with direct_formula, the calibrated formula is used with
// the batch estimate c = p / (pi (p + u))).
inline Objective evaluate_objective(const EstimatorKind& kind, const RiskBatch& batch,
                                    const Classifier& clf, const SurrogateLoss& loss,
                                    const ObjectiveOptions& opts = {}) {
  kind.validate();
  batch.validate();
  const double pi = batch.prior;
  const Matrix* U = &batch.unlabeled;
  Matrix replenished;
  if (kind.calibrated && !kind.direct_formula) {
    replenished = replenish_batch(batch.positives, batch.unlabeled);
    U = &replenished;
  }
  const Matrix& P = batch.positives;
  const detail::BatchLosses L(P, *U, clf, loss);
  const double p = static_cast<double>(P.rows());
  const double u = static_cast<double>(U->rows());

  // Coefficients on l(., +1) over P, l(., -1) over P, l(., -1) over U.
  const double w_pos = pi / p;
  double w_neg_p = -pi / p;
  double w_neg_u = 1.0 / u;
  if (kind.direct_formula) {
    const double c = p / (pi * (p + u));
    w_neg_p = pi * (c - 1.0) / p;
    w_neg_u = (1.0 - c * pi) / u;
  }

  Objective out;
  out.value.positive_part = pi * L.mean_pos_on_p;
  double negative = 0.0;
  for (double v : L.neg_on_p) negative += w_neg_p * v;
  for (double v : L.neg_on_u) negative += w_neg_u * v;

  // Scale applied to the positive and negative gradients.
  double pos_scale = 1.0, neg_scale = 1.0;
  out.value.negative_part = negative;
  if (kind.base != BaseEstimator::Upu && negative < -opts.tolerance) {
    out.corrected = true;
    out.value.negative_part = 0.0;
    if (kind.base == BaseEstimator::Nnpu) {
      neg_scale = 0.0;
    } else {
      // Gradient ascent on A: descend on -ascent_scale * A.
      pos_scale = 0.0;
      neg_scale = -opts.ascent_scale;
    }
  }
  out.value.total = out.value.positive_part + out.value.negative_part;
  detail::require_finite(out.value.total, "objective");

  Vector coeff_p(P.rows()), coeff_u(U->rows());
  for (std::size_t i = 0; i < P.rows(); ++i) {
    coeff_p[i] = pos_scale * w_pos * loss.derivative(L.score_p[i], +1) +
                 neg_scale * w_neg_p * loss.derivative(L.score_p[i], -1);
  }
  for (std::size_t j = 0; j < U->rows(); ++j) {
    coeff_u[j] = neg_scale * w_neg_u * loss.derivative(L.score_u[j], -1);
  }
  out.grad = clf.gradient(P, coeff_p);
  const Vector grad_u = clf.gradient(*U, coeff_u);
  for (std::size_t k = 0; k < out.grad.size(); ++k) {
    out.grad[k] += grad_u[k];
    detail::require_finite(out.grad[k], "objective gradient");
  }
  return out;
}

// One nnPU-GA update: descent on the nnPU objective while
// A >= -tolerance, otherwise ascent on A scaled by ascent_scale.
inline bool nnpu_ga_step(const RiskBatch& batch, Classifier& clf, OptimizerState& opt,
                         const SurrogateLoss& loss, double tolerance, double ascent_scale) {
  const Objective obj = evaluate_objective({BaseEstimator::NnpuGa, false, false}, batch, clf,
                                           loss, {tolerance, ascent_scale});
  sgd_step(clf, obj.grad, opt);
  return obj.corrected;
}

// ---------------------------------------------------------------------------
// Monte-Carlo references on a Gaussian mixture

struct McEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

namespace detail {

struct MeanVar {
  double mean = 0.0, var = 0.0;
};

inline MeanVar loss_moments(const GaussianMixtureSpec& spec, int cls, int target,
                            const Classifier& clf, const SurrogateLoss& loss,
                            std::size_t n, Rng& rng) {
  Vector row(spec.dim);
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sample_class_conditional_row(spec, cls, rng, row);
    const double v = loss.value(clf.score(row), target);
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  return {mean, n > 1 ? m2 / static_cast<double>(n - 1) : 0.0};
}

}  // namespace detail

// R(f) = pi E_{p(x|+1)}[l(f,+1)] + (1-pi) E_{p(x|-1)}[l(f,-1)] with mc_n
// draws per class.
inline McEstimate monte_carlo_risk(const GaussianMixtureSpec& spec, const Classifier& clf,
                                   const SurrogateLoss& loss, std::size_t mc_n, Rng& rng) {
  spec.validate();
  if (mc_n < 2) throw ValidationError("monte_carlo_risk needs mc_n >= 2");
  const auto pos = detail::loss_moments(spec, +1, +1, clf, loss, mc_n, rng);
  const auto neg = detail::loss_moments(spec, -1, -1, clf, loss, mc_n, rng);
  const double pi = spec.prior;
  const double n = static_cast<double>(mc_n);
  return {pi * pos.mean + (1.0 - pi) * neg.mean,
          std::sqrt(pi * pi * pos.var / n + (1.0 - pi) * (1.0 - pi) * neg.var / n)};
}

// Expected bias of uPU under OS sampling:
//   (pi_bar - pi) (E_{p(x|+1)}[l(f,-1)] - E_{p(x|-1)}[l(f,-1)]).
inline McEstimate expected_bias_oracle(const GaussianMixtureSpec& spec, const Classifier& clf,
                                       const SurrogateLoss& loss, double c, std::size_t mc_n,
                                       Rng& rng) {
  spec.validate();
  if (mc_n < 10000) throw ValidationError("expected_bias_oracle needs mc_n >= 10^4");
  const double shift = os_prior(spec.prior, c) - spec.prior;
  const auto pos = detail::loss_moments(spec, +1, -1, clf, loss, mc_n, rng);
  const auto neg = detail::loss_moments(spec, -1, -1, clf, loss, mc_n, rng);
  const double n = static_cast<double>(mc_n);
  return {shift * (pos.mean - neg.mean), std::abs(shift) * std::sqrt(pos.var / n + neg.var / n)};
}

// ---------------------------------------------------------------------------
// PUSB thresholding

// Threshold t such that "score >= t" marks the top floor(pi m) scores as
// positive. Ties at t are all positive, so the count can exceed floor(pi m).
// With floor(pi m) = 0 the threshold sits just above the maximum.
inline double pusb_threshold(std::span<const double> scores, double prior) {
  if (scores.empty()) throw ValidationError("pusb_threshold: empty score vector");
  require_prior(prior);
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  const auto k = static_cast<std::size_t>(std::floor(prior * static_cast<double>(m)));
  if (k == 0) return std::nextafter(sorted.back(), std::numeric_limits<double>::infinity());
  return sorted[m - k];
}

}  // namespace pubench
