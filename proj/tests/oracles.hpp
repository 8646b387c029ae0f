#pragma once

// Independent reference computations used only by tests. Nothing here calls
// into the estimator or metric code it is checking.

#include <cmath>
#include <span>
#include <vector>

#include "pubench/classifier.hpp"
#include "pubench/loss.hpp"
#include "pubench/matrix.hpp"

namespace pubench::oracle {

// O(n_pos * n_neg) pairwise AUC with half credit for ties.
inline double brute_force_auc(std::span<const double> scores, std::span<const int> labels) {
  double hits = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] <= 0) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] > 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) {
        hits += 1.0;
      } else if (scores[i] == scores[j]) {
        hits += 0.5;
      }
    }
  }
  return hits / pairs;
}

inline double brute_force_pauc(std::span<const double> sp, std::span<const double> su) {
  double hits = 0.0;
  for (double a : sp) {
    for (double b : su) hits += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
  }
  return hits / (static_cast<double>(sp.size()) * static_cast<double>(su.size()));
}

// Plain uPU by direct substitution, one row at a time.
inline double direct_upu(const Matrix& P, const Matrix& U, double pi, const Classifier& f,
                         const SurrogateLoss& l) {
  double sp = 0.0, su = 0.0;
  for (std::size_t i = 0; i < P.rows(); ++i) {
    const double z = f.score(P.row(i));
    sp += l.value(z, +1) - l.value(z, -1);
  }
  for (std::size_t j = 0; j < U.rows(); ++j) su += l.value(f.score(U.row(j)), -1);
  return pi / static_cast<double>(P.rows()) * sp + su / static_cast<double>(U.rows());
}

inline double direct_calibrated(const Matrix& P, const Matrix& U, double pi, double c,
                                const Classifier& f, const SurrogateLoss& l) {
  double sp = 0.0, su = 0.0;
  for (std::size_t i = 0; i < P.rows(); ++i) {
    const double z = f.score(P.row(i));
    sp += l.value(z, +1) + (c - 1.0) * l.value(z, -1);
  }
  for (std::size_t j = 0; j < U.rows(); ++j) su += l.value(f.score(U.row(j)), -1);
  return pi / static_cast<double>(P.rows()) * sp +
         (1.0 - c * pi) / static_cast<double>(U.rows()) * su;
}

// Central finite-difference gradient of an arbitrary objective of theta.
template <typename F>
std::vector<double> numeric_gradient(const Classifier& clf, F&& objective, double h) {
  Classifier probe = clf;
  std::vector<double> g(clf.parameter_count());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double orig = probe.parameters()[j];
    probe.parameters()[j] = orig + h;
    const double up = objective(probe);
    probe.parameters()[j] = orig - h;
    const double down = objective(probe);
    probe.parameters()[j] = orig;
    g[j] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace pubench::oracle
