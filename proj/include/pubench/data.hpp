#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pubench/error.hpp"
#include "pubench/matrix.hpp"
#include "pubench/random.hpp"

namespace pubench {

// How D_P and D_U were generated.
//   TS: D_P ~ p(x|y=+1) and D_U ~ p(x), independently.
//   OS: one marginal sample; each positive is labeled with probability c.
enum class Setting { OS, TS };

inline std::string_view to_string(Setting s) { return s == Setting::OS ? "OS" : "TS"; }

inline Setting parse_setting(std::string_view token) {
  if (token == "OS" || token == "os") return Setting::OS;
  if (token == "TS" || token == "ts") return Setting::TS;
  throw ValidationError("unknown setting '" + std::string(token) + "' (expected OS or TS)");
}

inline void require_prior(double prior, const char* what = "prior") {
  if (!(prior > 0.0 && prior < 1.0)) {
    throw ValidationError(std::string(what) + " must lie in (0, 1), got " +
                          std::to_string(prior));
  }
}

inline void require_label_frequency(double c) {
  if (!(c > 0.0 && c <= 1.0)) {
    throw ValidationError("label frequency must lie in (0, 1], got " + std::to_string(c));
  }
}

struct LabeledDataset {
  Matrix features;
  std::vector<int> labels;  // +1 / -1

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return features.cols(); }

  std::size_t positive_count() const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  }

  void validate() const {
    if (features.rows() != labels.size()) {
      throw ValidationError("features have " + std::to_string(features.rows()) +
                            " rows but there are " + std::to_string(labels.size()) +
                            " labels");
    }
    if (features.cols() < 1) throw ValidationError("dataset needs at least one feature");
    if (!features.all_finite()) throw ValidationError("dataset contains non-finite features");
    for (int y : labels) {
      if (y != 1 && y != -1) throw ValidationError("labels must be +1 or -1");
    }
  }

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;
};

// Isotropic Gaussian class conditionals with class prior `prior`.
struct GaussianMixtureSpec {
  std::size_t dim = 0;
  Vector mean_pos;
  Vector mean_neg;
  double scale_pos = 1.0;
  double scale_neg = 1.0;
  double prior = 0.5;

  void validate() const {
    if (dim < 1) throw ValidationError("mixture dim must be >= 1");
    if (mean_pos.size() != dim || mean_neg.size() != dim) {
      throw ValidationError("mixture means must have length dim=" + std::to_string(dim));
    }
    for (double v : mean_pos) {
      if (!std::isfinite(v)) throw ValidationError("mean_pos has a non-finite entry");
    }
    for (double v : mean_neg) {
      if (!std::isfinite(v)) throw ValidationError("mean_neg has a non-finite entry");
    }
    if (!(scale_pos > 0.0) || !std::isfinite(scale_pos) || !(scale_neg > 0.0) ||
        !std::isfinite(scale_neg)) {
      throw ValidationError("mixture scales must be positive and finite");
    }
    require_prior(prior);
  }
};

// Borrowed view of the PU-visible part of a dataset. Training code takes
// this instead of PuDataset so it cannot reach the oracle labels.
struct ObservedPu {
  const Matrix& positives;
  const Matrix& unlabeled;
  Setting setting;
  double prior;
  std::optional<double> label_frequency;
};

struct PuDataset {
  Matrix positives;
  Matrix unlabeled;
  Setting setting = Setting::TS;
  double prior = 0.5;
  std::optional<double> label_frequency;
  std::optional<std::vector<int>> oracle_unlabeled_labels;

  std::size_t n_positive() const noexcept { return positives.rows(); }
  std::size_t n_unlabeled() const noexcept { return unlabeled.rows(); }
  std::size_t dim() const noexcept { return positives.cols(); }
  bool has_oracle() const noexcept { return oracle_unlabeled_labels.has_value(); }

  ObservedPu observed() const {
    return {positives, unlabeled, setting, prior, label_frequency};
  }

  PuDataset without_oracle() const {
    PuDataset copy = *this;
    copy.oracle_unlabeled_labels.reset();
    return copy;
  }

  void validate() const {
    if (positives.rows() < 1 || unlabeled.rows() < 1) {
      throw ValidationError("PU dataset needs n_P >= 1 and n_U >= 1");
    }
    if (positives.cols() != unlabeled.cols()) {
      throw ValidationError("positive and unlabeled feature dimensions differ");
    }
    if (!positives.all_finite() || !unlabeled.all_finite()) {
      throw ValidationError("PU dataset contains non-finite features");
    }
    require_prior(prior);
    if (setting == Setting::OS && !label_frequency) {
      throw ValidationError("OS dataset requires a label frequency");
    }
    if (label_frequency) require_label_frequency(*label_frequency);
    if (oracle_unlabeled_labels) {
      if (oracle_unlabeled_labels->size() != unlabeled.rows()) {
        throw ValidationError("oracle label count does not match n_U");
      }
      for (int y : *oracle_unlabeled_labels) {
        if (y != 1 && y != -1) throw ValidationError("oracle labels must be +1 or -1");
      }
    }
  }

  friend bool operator==(const PuDataset&, const PuDataset&) = default;
};

struct PuSplit {
  PuDataset train;
  PuDataset validation;
};

// Class prior of D_U in the OS setting: (1-c)pi / (1-c pi).
inline double os_prior(double prior, double c) {
  require_prior(prior);
  require_label_frequency(c);
  return (1.0 - c) * prior / (1.0 - c * prior);
}

struct LabelFrequencyEstimate {
  double value = 1.0;  // clipped into (0, 1]
  double raw = 1.0;
  bool clipped = false;
};

// c = n_P / (pi (n_P + n_U)).
inline LabelFrequencyEstimate estimate_label_frequency(std::size_t n_positive,
                                                       std::size_t n_unlabeled,
                                                       double prior) {
  if (n_positive < 1 || n_unlabeled < 1) {
    throw ValidationError("label frequency estimate needs n_P >= 1 and n_U >= 1");
  }
  require_prior(prior);
  LabelFrequencyEstimate est;
  est.raw = static_cast<double>(n_positive) /
            (prior * static_cast<double>(n_positive + n_unlabeled));
  est.clipped = est.raw > 1.0;
  est.value = est.clipped ? 1.0 : est.raw;
  return est;
}

// ---------------------------------------------------------------------------
// Sampling

inline void sample_class_conditional_row(const GaussianMixtureSpec& spec, int label,
                                         Rng& rng, std::span<double> out) {
  const Vector& mean = label > 0 ? spec.mean_pos : spec.mean_neg;
  const double scale = label > 0 ? spec.scale_pos : spec.scale_neg;
  for (std::size_t j = 0; j < spec.dim; ++j) out[j] = rng.normal(mean[j], scale);
}

// n i.i.d. rows from p(x | y = label).
inline Matrix sample_class_conditional(const GaussianMixtureSpec& spec, int label,
                                       std::size_t n, Rng& rng) {
  spec.validate();
  Matrix out(n, spec.dim);
  for (std::size_t i = 0; i < n; ++i) sample_class_conditional_row(spec, label, rng, out.row(i));
  return out;
}

inline LabeledDataset synthesize_labeled(const GaussianMixtureSpec& spec, std::size_t n,
                                         Rng& rng) {
  spec.validate();
  if (n < 1) throw ValidationError("synthesize_labeled needs n >= 1");
  LabeledDataset ds;
  ds.features = Matrix(n, spec.dim);
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = rng.bernoulli(spec.prior) ? 1 : -1;
    ds.labels[i] = y;
    sample_class_conditional_row(spec, y, rng, ds.features.row(i));
  }
  return ds;
}

inline PuDataset make_ts_pu(const GaussianMixtureSpec& spec, std::size_t n_positive,
                            std::size_t n_unlabeled, Rng& rng) {
  spec.validate();
  if (n_positive < 1 || n_unlabeled < 1) {
    throw ValidationError("make_ts_pu needs n_P >= 1 and n_U >= 1");
  }
  PuDataset pu;
  pu.setting = Setting::TS;
  pu.prior = spec.prior;
  pu.positives = sample_class_conditional(spec, 1, n_positive, rng);
  LabeledDataset marginal = synthesize_labeled(spec, n_unlabeled, rng);
  pu.unlabeled = std::move(marginal.features);
  pu.oracle_unlabeled_labels = std::move(marginal.labels);
  return pu;
}

inline PuDataset make_os_pu(const GaussianMixtureSpec& spec, std::size_t n, double c,
                            Rng& rng) {
  spec.validate();
  require_label_frequency(c);
  if (n < 2) throw ValidationError("make_os_pu needs n >= 2");
  PuDataset pu;
  pu.setting = Setting::OS;
  pu.prior = spec.prior;
  pu.label_frequency = c;
  pu.positives.reshape_empty(spec.dim);
  pu.unlabeled.reshape_empty(spec.dim);
  std::vector<int> oracle;
  Vector row(spec.dim);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = rng.bernoulli(spec.prior) ? 1 : -1;
    sample_class_conditional_row(spec, y, rng, row);
    if (y > 0 && rng.bernoulli(c)) {
      pu.positives.append_row(row);
    } else {
      pu.unlabeled.append_row(row);
      oracle.push_back(y);
    }
  }
  if (pu.positives.empty() || pu.unlabeled.empty()) {
    throw DegenerateDraw("degenerate draw: OS sample of n=" + std::to_string(n) +
                         " produced n_P=" + std::to_string(pu.positives.rows()) +
                         ", n_U=" + std::to_string(pu.unlabeled.rows()));
  }
  pu.oracle_unlabeled_labels = std::move(oracle);
  return pu;
}

// TS sampling from a finite labeled pool. D_P and D_U are drawn
// independently without replacement, so they may share rows.
inline PuDataset make_ts_pu_from_pool(const LabeledDataset& pool, double prior,
                                      std::size_t n_positive, std::size_t n_unlabeled,
                                      Rng& rng) {
  pool.validate();
  require_prior(prior);
  std::vector<std::size_t> pos_idx;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool.labels[i] > 0) pos_idx.push_back(i);
  }
  if (n_positive < 1 || n_positive > pos_idx.size()) {
    throw ValidationError("pool has " + std::to_string(pos_idx.size()) +
                          " positives, cannot draw n_P=" + std::to_string(n_positive));
  }
  if (n_unlabeled < 1 || n_unlabeled > pool.size()) {
    throw ValidationError("pool has " + std::to_string(pool.size()) +
                          " rows, cannot draw n_U=" + std::to_string(n_unlabeled));
  }
  rng.shuffle(std::span(pos_idx));
  pos_idx.resize(n_positive);
  std::vector<std::size_t> all_idx(pool.size());
  std::iota(all_idx.begin(), all_idx.end(), std::size_t{0});
  rng.shuffle(std::span(all_idx));
  all_idx.resize(n_unlabeled);

  PuDataset pu;
  pu.setting = Setting::TS;
  pu.prior = prior;
  pu.positives = select_rows(pool.features, pos_idx);
  pu.unlabeled = select_rows(pool.features, all_idx);
  std::vector<int> oracle;
  oracle.reserve(all_idx.size());
  for (std::size_t i : all_idx) oracle.push_back(pool.labels[i]);
  pu.oracle_unlabeled_labels = std::move(oracle);
  return pu;
}

// OS sampling from a finite labeled pool: every positive row is labeled
// with probability c.
inline PuDataset make_os_pu_from_pool(const LabeledDataset& pool, double prior, double c,
                                      Rng& rng) {
  pool.validate();
  require_prior(prior);
  require_label_frequency(c);
  PuDataset pu;
  pu.setting = Setting::OS;
  pu.prior = prior;
  pu.label_frequency = c;
  pu.positives.reshape_empty(pool.dim());
  pu.unlabeled.reshape_empty(pool.dim());
  std::vector<int> oracle;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool.labels[i] > 0 && rng.bernoulli(c)) {
      pu.positives.append_row(pool.features.row(i));
    } else {
      pu.unlabeled.append_row(pool.features.row(i));
      oracle.push_back(pool.labels[i]);
    }
  }
  if (pu.positives.empty() || pu.unlabeled.empty()) {
    throw DegenerateDraw("degenerate draw: OS labeling of a " + std::to_string(pool.size()) +
                         "-row pool left D_P or D_U empty");
  }
  pu.oracle_unlabeled_labels = std::move(oracle);
  return pu;
}

// Holds out each row independently with probability `rate`.
inline std::pair<LabeledDataset, LabeledDataset> split_labeled(const LabeledDataset& ds,
                                                               double rate, Rng& rng) {
  if (!(rate > 0.0 && rate < 1.0)) throw ValidationError("split rate must lie in (0, 1)");
  LabeledDataset keep, held;
  keep.features.reshape_empty(ds.dim());
  held.features.reshape_empty(ds.dim());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    LabeledDataset& dst = rng.bernoulli(rate) ? held : keep;
    dst.features.append_row(ds.features.row(i));
    dst.labels.push_back(ds.labels[i]);
  }
  return {std::move(keep), std::move(held)};
}

// Per-row Bernoulli(rate) assignment to the validation half. Under OS this
// keeps D'_P u D'_U an i.i.d. sample of the marginal.
inline PuSplit split_validation(const PuDataset& pu, double rate, Rng& rng) {
  pu.validate();
  if (!(rate > 0.0 && rate < 1.0)) {
    throw ValidationError("validation rate must lie strictly inside (0, 1)");
  }
  PuSplit split;
  for (PuDataset* half : {&split.train, &split.validation}) {
    half->setting = pu.setting;
    half->prior = pu.prior;
    half->label_frequency = pu.label_frequency;
    half->positives.reshape_empty(pu.dim());
    half->unlabeled.reshape_empty(pu.dim());
    if (pu.oracle_unlabeled_labels) half->oracle_unlabeled_labels.emplace();
  }
  for (std::size_t i = 0; i < pu.n_positive(); ++i) {
    PuDataset& dst = rng.bernoulli(rate) ? split.validation : split.train;
    dst.positives.append_row(pu.positives.row(i));
  }
  for (std::size_t i = 0; i < pu.n_unlabeled(); ++i) {
    PuDataset& dst = rng.bernoulli(rate) ? split.validation : split.train;
    dst.unlabeled.append_row(pu.unlabeled.row(i));
    if (pu.oracle_unlabeled_labels) {
      dst.oracle_unlabeled_labels->push_back((*pu.oracle_unlabeled_labels)[i]);
    }
  }
  for (const PuDataset* half : {&split.train, &split.validation}) {
    if (half->positives.empty() || half->unlabeled.empty()) {
      throw DegenerateDraw("degenerate split: a half has an empty D_P or D_U (n_P=" +
                           std::to_string(pu.n_positive()) +
                           ", n_U=" + std::to_string(pu.n_unlabeled()) +
                           ", rate=" + std::to_string(rate) + ")");
    }
  }
  return split;
}

}  // namespace pubench
