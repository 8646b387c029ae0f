#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pubench/error.hpp"

namespace pubench {

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// Predicted positive iff score >= threshold.
inline ConfusionCounts confusion(std::span<const double> scores, std::span<const int> labels,
                                 double threshold = 0.0) {
  if (scores.size() != labels.size()) {
    throw ValidationError("confusion: " + std::to_string(scores.size()) + " scores vs " +
                          std::to_string(labels.size()) + " labels");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i] > 0) {
      predicted ? ++c.tp : ++c.fn;
    } else {
      predicted ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

// A ratio whose denominator may vanish; value is 0 with degenerate = true then.
struct Rate {
  double value = 0.0;
  bool degenerate = false;
};

inline Rate accuracy(const ConfusionCounts& c) {
  if (c.total() == 0) return {0.0, true};
  return {static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total()), false};
}

inline Rate precision(const ConfusionCounts& c) {
  if (c.tp + c.fp == 0) return {0.0, true};
  return {static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp), false};
}

inline Rate recall(const ConfusionCounts& c) {
  if (c.tp + c.fn == 0) return {0.0, true};
  return {static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn), false};
}

inline Rate f1(const ConfusionCounts& c) {
  const Rate p = precision(c), r = recall(c);
  if (p.degenerate || r.degenerate || p.value + r.value == 0.0) return {0.0, true};
  return {2.0 * p.value * r.value / (p.value + r.value), false};
}

namespace detail {

// Twice the Mann-Whitney U statistic of the positives:
// 2 * sum over (pos, neg) pairs of [1(s+ > s-) + 1/2 1(s+ = s-)],
// from midranks in O(m log m). Integer arithmetic keeps it exact.
inline std::uint64_t twice_mann_whitney(std::span<const double> scores,
                                        std::span<const int> labels, std::uint64_t& n_pos,
                                        std::uint64_t& n_neg) {
  const std::size_t m = scores.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  n_pos = 0;
  n_neg = 0;
  std::uint64_t twice_rank_sum = 0;  // sum of 2 * midrank over positives
  std::size_t i = 0;
  while (i < m) {
    std::size_t j = i;
    std::uint64_t pos_in_group = 0;
    while (j < m && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]] > 0) ++pos_in_group;
      ++j;
    }
    // 1-based ranks i+1 .. j share midrank (i+1+j)/2.
    twice_rank_sum += pos_in_group * static_cast<std::uint64_t>(i + 1 + j);
    n_pos += pos_in_group;
    i = j;
  }
  n_neg = m - n_pos;
  return twice_rank_sum - n_pos * (n_pos + 1);
}

}  // namespace detail

// Probability that a positive outranks a negative, ties counted 1/2.
inline double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ValidationError("auc: length mismatch");
  std::uint64_t n_pos = 0, n_neg = 0;
  const std::uint64_t u2 = detail::twice_mann_whitney(scores, labels, n_pos, n_neg);
  if (n_pos == 0 || n_neg == 0) {
    throw ValidationError("auc is undefined without both positive and negative labels");
  }
  return static_cast<double>(u2) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

enum class Metric { Acc, Auc, F1, Precision, Recall };

inline std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::Acc: return "acc";
    case Metric::Auc: return "auc";
    case Metric::F1: return "f1";
    case Metric::Precision: return "precision";
    case Metric::Recall: return "recall";
  }
  return "?";
}

inline Metric parse_metric(std::string_view token) {
  if (token == "acc") return Metric::Acc;
  if (token == "auc") return Metric::Auc;
  if (token == "f1") return Metric::F1;
  if (token == "precision") return Metric::Precision;
  if (token == "recall") return Metric::Recall;
  throw ValidationError("unknown metric '" + std::string(token) +
                        "' (expected acc|auc|f1|precision|recall)");
}

// Metric over scores thresholded at 0. AUC of a single-class set is reported
// as 0.5.
inline double evaluate_metric(Metric m, std::span<const double> scores,
                              std::span<const int> labels) {
  if (m == Metric::Auc) {
    const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
    const bool has_neg = std::find(labels.begin(), labels.end(), -1) != labels.end();
    return has_pos && has_neg ? auc(scores, labels) : 0.5;
  }
  const ConfusionCounts c = confusion(scores, labels);
  switch (m) {
    case Metric::Acc: return accuracy(c).value;
    case Metric::F1: return f1(c).value;
    case Metric::Precision: return precision(c).value;
    case Metric::Recall: return recall(c).value;
    case Metric::Auc: break;
  }
  return 0.0;
}

}  // namespace pubench
