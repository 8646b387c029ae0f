#pragma once

// Model-selection criteria computable from a PU validation set.
//
//   PA   (2 pi / n'_P) #{P : f >= 0} + mean over U (TS) or P u U (OS) of 1(f < 0)
//        E[PA] = ACC + pi, so PA ranks classifiers like accuracy does.
//   PAUC AUC of P against U treated as negatives; needs no prior.
//        E[PAUC] = (1 - pi_eff) AUC + pi_eff / 2, pi_eff the class prior of U.
//   OA   accuracy against the hidden labels; benchmark-only.

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pubench/classifier.hpp"
#include "pubench/data.hpp"
#include "pubench/metrics.hpp"
#include "pubench/random.hpp"

namespace pubench {

enum class Criterion { Pa, Pauc, Oa };

inline std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::Pa: return "pa";
    case Criterion::Pauc: return "pauc";
    case Criterion::Oa: return "oa";
  }
  return "?";
}

inline Criterion parse_criterion(std::string_view token) {
  if (token == "pa") return Criterion::Pa;
  if (token == "pauc") return Criterion::Pauc;
  if (token == "oa") return Criterion::Oa;
  throw ValidationError("unknown criterion '" + std::string(token) + "' (expected pa|pauc|oa)");
}

inline double proxy_accuracy(std::span<const double> scores_p, std::span<const double> scores_u,
                             Setting setting, double prior) {
  require_prior(prior);
  if (scores_p.empty() || scores_u.empty()) {
    throw ValidationError("proxy accuracy needs nonempty D'_P and D'_U");
  }
  std::size_t p_hit = 0, p_neg = 0, u_neg = 0;
  for (double s : scores_p) {
    if (s >= 0.0) {
      ++p_hit;
    } else {
      ++p_neg;
    }
  }
  for (double s : scores_u) {
    if (s < 0.0) ++u_neg;
  }
  const double pos_term =
      2.0 * prior * static_cast<double>(p_hit) / static_cast<double>(scores_p.size());
  if (setting == Setting::TS) {
    return pos_term + static_cast<double>(u_neg) / static_cast<double>(scores_u.size());
  }
  return pos_term + static_cast<double>(p_neg + u_neg) /
                        static_cast<double>(scores_p.size() + scores_u.size());
}

inline double proxy_auc(std::span<const double> scores_p, std::span<const double> scores_u) {
  if (scores_p.empty() || scores_u.empty()) {
    throw ValidationError("proxy AUC needs nonempty D'_P and D'_U");
  }
  std::vector<double> scores(scores_p.begin(), scores_p.end());
  scores.insert(scores.end(), scores_u.begin(), scores_u.end());
  std::vector<int> labels(scores_p.size(), 1);
  labels.resize(scores.size(), -1);
  return auc(scores, labels);
}

inline double oracle_accuracy(std::span<const double> scores_p, std::span<const double> scores_u,
                              std::span<const int> oracle_u, Setting setting) {
  if (oracle_u.size() != scores_u.size()) {
    throw ValidationError("oracle accuracy: oracle label count does not match D'_U");
  }
  if (scores_u.empty()) throw ValidationError("oracle accuracy needs a nonempty D'_U");
  std::size_t correct = 0;
  for (std::size_t j = 0; j < scores_u.size(); ++j) {
    if ((oracle_u[j] > 0) == (scores_u[j] >= 0.0)) ++correct;
  }
  if (setting == Setting::TS) {
    return static_cast<double>(correct) / static_cast<double>(scores_u.size());
  }
  for (double s : scores_p) {
    if (s >= 0.0) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(scores_p.size() + scores_u.size());
}

inline double proxy_accuracy(const Classifier& clf, const PuDataset& val, double prior) {
  return proxy_accuracy(clf.score_batch(val.positives), clf.score_batch(val.unlabeled),
                        val.setting, prior);
}

inline double proxy_auc(const Classifier& clf, const PuDataset& val) {
  return proxy_auc(clf.score_batch(val.positives), clf.score_batch(val.unlabeled));
}

inline double oracle_accuracy(const Classifier& clf, const PuDataset& val) {
  if (!val.oracle_unlabeled_labels) {
    throw ValidationError("oracle accuracy needs oracle labels on the validation set");
  }
  return oracle_accuracy(clf.score_batch(val.positives), clf.score_batch(val.unlabeled),
                         *val.oracle_unlabeled_labels, val.setting);
}

// ACC estimate from PA: PA - pi.
inline double pa_to_acc(double pa, double prior) {
  require_prior(prior);
  return pa - prior;
}

// AUC estimate from PAUC: PAUC / (1 - pi_eff) - pi_eff / (2 - 2 pi_eff).
// pi_eff is pi under TS and the unlabeled prior (1-c)pi/(1-c pi) under OS.
inline double pauc_to_auc(double pauc, double pi_eff) {
  if (!(pi_eff >= 0.0 && pi_eff < 1.0)) {
    throw ValidationError("effective prior must lie in [0, 1)");
  }
  return pauc / (1.0 - pi_eff) - pi_eff / (2.0 - 2.0 * pi_eff);
}

// Bootstrap standard error of PA or PAUC, resampling D'_P and D'_U
// independently with replacement. No coverage guarantee is implied.
inline double bootstrap_standard_error(Criterion criterion, std::span<const double> scores_p,
                                       std::span<const double> scores_u, Setting setting,
                                       double prior, std::size_t resamples, Rng& rng) {
  if (criterion == Criterion::Oa) {
    throw ValidationError("bootstrap is only offered for PU-visible criteria");
  }
  if (resamples < 2) throw ValidationError("bootstrap needs at least 2 resamples");
  std::vector<double> bp(scores_p.size()), bu(scores_u.size());
  double mean = 0.0, m2 = 0.0;
  for (std::size_t b = 0; b < resamples; ++b) {
    for (auto& s : bp) s = scores_p[rng.index(scores_p.size())];
    for (auto& s : bu) s = scores_u[rng.index(scores_u.size())];
    const double v = criterion == Criterion::Pa ? proxy_accuracy(bp, bu, setting, prior)
                                                : proxy_auc(bp, bu);
    const double delta = v - mean;
    mean += delta / static_cast<double>(b + 1);
    m2 += delta * (v - mean);
  }
  return std::sqrt(m2 / static_cast<double>(resamples - 1));
}

}  // namespace pubench
