#pragma once

// Statistical and exact property checks shared by `pubench check` and the
// acceptance binary. Each check returns pass/fail plus a one-line detail.
// With fast = true sample sizes shrink and tolerances widen accordingly.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "pubench/gaussian.hpp"
#include "pubench/gradcheck.hpp"
#include "pubench/harness/report.hpp"
#include "pubench/risk.hpp"
#include "pubench/selection.hpp"
#include "pubench/train.hpp"

namespace pubench::checks {

struct CheckResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

struct CheckOptions {
  bool fast = false;
  std::uint64_t seed = 20240611;
};

namespace detail {

inline std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

struct Moments {
  double mean = 0.0, m2 = 0.0;
  std::size_t n = 0;
  void add(double v) {
    ++n;
    const double d = v - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (v - mean);
  }
  double se() const { return std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n)); }
};

// Two well-separated 2-D classes; the frozen classifier below treats them
// asymmetrically, so E_+ l(f,-1) differs from E_- l(f,-1).
inline GaussianMixtureSpec risk_spec() { return {2, {1.0, 0.0}, {-1.0, 0.0}, 1.0, 1.0, 0.5}; }

inline Classifier frozen_classifier() {
  return Classifier(Architecture::linear(2), {1.5, 0.3, -0.1});
}

}  // namespace detail

// OS sampler: the unlabeled pool's positive fraction is (1-c)pi/(1-c pi).
inline CheckResult os_sampler_prior(const CheckOptions& o) {
  const std::size_t n = o.fast ? 20000 : 200000;
  const double tol = o.fast ? 0.015 : 0.005;
  const GaussianMixtureSpec spec{1, {1.0}, {-1.0}, 1.0, 1.0, 0.5};
  Rng rng(child_seed(o.seed, 1));
  const PuDataset pu = make_os_pu(spec, n, 0.4, rng);
  std::size_t pos = 0;
  for (int y : *pu.oracle_unlabeled_labels) pos += y > 0;
  const double frac = static_cast<double>(pos) / static_cast<double>(pu.n_unlabeled());
  return {1, "os-sampler-prior", std::abs(frac - 0.375) <= tol,
          detail::fmt("unlabeled positive fraction %.5f, target 0.375 +- %.3f", frac, tol)};
}

// Mean of an estimator over resampled datasets against the Monte-Carlo
// population risk.
inline CheckResult upu_unbiased_ts(const CheckOptions& o) {
  const std::size_t reps = o.fast ? 300 : 2000;
  const std::size_t mc = o.fast ? 100000 : 1000000;
  const auto spec = detail::risk_spec();
  const auto f = detail::frozen_classifier();
  const SurrogateLoss loss;
  Rng rng(child_seed(o.seed, 2));
  detail::Moments m;
  for (std::size_t r = 0; r < reps; ++r) {
    const PuDataset pu = make_ts_pu(spec, 100, 400, rng);
    m.add(upu_risk({pu.positives, pu.unlabeled, spec.prior, {}}, f, loss).total);
  }
  const auto truth = monte_carlo_risk(spec, f, loss, mc, rng);
  const double se = std::hypot(m.se(), truth.standard_error);
  const double gap = std::abs(m.mean - truth.value);
  return {2, "upu-unbiased-ts", gap <= 3.0 * se,
          detail::fmt("mean %.5f vs R(f) %.5f, |gap| %.5f <= 3 SE = %.5f", m.mean, truth.value,
                      gap, 3.0 * se)};
}

inline CheckResult upu_bias_os(const CheckOptions& o) {
  const std::size_t reps = o.fast ? 300 : 2000;
  const std::size_t mc = o.fast ? 100000 : 1000000;
  const double c = 0.5;
  const auto spec = detail::risk_spec();
  const auto f = detail::frozen_classifier();
  const SurrogateLoss loss;
  Rng rng(child_seed(o.seed, 3));
  detail::Moments m;
  for (std::size_t r = 0; r < reps; ++r) {
    const PuDataset pu = make_os_pu(spec, 500, c, rng);
    m.add(upu_risk({pu.positives, pu.unlabeled, spec.prior, {}}, f, loss).total);
  }
  const auto truth = monte_carlo_risk(spec, f, loss, mc, rng);
  const auto oracle = expected_bias_oracle(spec, f, loss, c, mc, rng);
  const double bias = m.mean - truth.value;
  const double se_bias = std::hypot(m.se(), truth.standard_error);
  const double se = std::hypot(se_bias, oracle.standard_error);
  const double gap = std::abs(bias - oracle.value);
  const bool matches = gap <= 3.0 * se;
  const bool nonzero = std::abs(bias) >= 3.0 * se_bias;
  return {3, "upu-bias-os", matches && nonzero,
          detail::fmt("empirical bias %.5f vs closed form %.5f (|gap| %.5f <= 3 SE = %.5f); "
                      "|bias| / SE = %.1f >= 3",
                      bias, oracle.value, gap, 3.0 * se, std::abs(bias) / se_bias)};
}

inline CheckResult calibrated_unbiased_os(const CheckOptions& o) {
  const std::size_t reps = o.fast ? 300 : 2000;
  const std::size_t mc = o.fast ? 100000 : 1000000;
  const double c = 0.5;
  const auto spec = detail::risk_spec();
  const auto f = detail::frozen_classifier();
  const SurrogateLoss loss;
  Rng rng(child_seed(o.seed, 4));
  detail::Moments m;
  for (std::size_t r = 0; r < reps; ++r) {
    const PuDataset pu = make_os_pu(spec, 500, c, rng);
    m.add(calibrated_risk({pu.positives, pu.unlabeled, spec.prior, c}, f, loss).total);
  }
  const auto truth = monte_carlo_risk(spec, f, loss, mc, rng);
  const double se = std::hypot(m.se(), truth.standard_error);
  const double gap = std::abs(m.mean - truth.value);
  return {4, "calibrated-unbiased-os", gap <= 3.0 * se,
          detail::fmt("mean %.5f vs R(f) %.5f, |gap| %.5f <= 3 SE = %.5f", m.mean, truth.value,
                      gap, 3.0 * se)};
}

inline CheckResult estimator_equivalence(const CheckOptions& o) {
  Rng rng(child_seed(o.seed, 5));
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t p = 1 + rng.index(50), u = 1 + rng.index(150), d = 1 + rng.index(6);
    Matrix P(p, d), U(u, d);
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < d; ++j) P(i, j) = rng.normal(0.5, 1.0);
    }
    for (std::size_t i = 0; i < u; ++i) {
      for (std::size_t j = 0; j < d; ++j) U(i, j) = rng.normal();
    }
    const auto f = rng.bernoulli(0.5)
                       ? Classifier::initialized(Architecture::linear(d), rng)
                       : Classifier::initialized(Architecture::mlp(d, 1 + rng.index(16)), rng);
    const SurrogateLoss loss(static_cast<LossKind>(rng.index(3)));
    const double pi = rng.uniform(0.05, 0.95);
    const double c = static_cast<double>(p) / (pi * static_cast<double>(p + u));
    const double cal = calibrated_risk({P, U, pi, c}, f, loss).total;
    const Matrix UP = replenish_batch(P, U);
    const double rep = upu_risk({P, UP, pi, {}}, f, loss).total;
    worst = std::max(worst, std::abs(cal - rep) / (1.0 + std::abs(rep)));
  }
  return {5, "estimator-equivalence", worst <= 1e-9,
          detail::fmt("worst relative gap %.3e over 100 instances (<= 1e-9)", worst)};
}

namespace detail {

struct ValidationSets {
  PuDataset ts, os;
  double c;
};

inline const GaussianMixtureSpec& selection_spec() {
  static const GaussianMixtureSpec spec{2, {1.0, 0.0}, {-1.0, 0.0}, 1.0, 1.0, 0.3};
  return spec;
}

inline ValidationSets validation_sets(const CheckOptions& o, std::uint64_t tag) {
  const std::size_t n = o.fast ? 10000 : 50000;
  Rng rng(child_seed(o.seed, tag));
  const double c = 0.8;
  return {make_ts_pu(selection_spec(), n / 2, n / 2, rng),
          make_os_pu(selection_spec(), n, c, rng), c};
}

inline std::vector<Classifier> random_linear(std::size_t k, Rng& rng) {
  std::vector<Classifier> out;
  for (std::size_t i = 0; i < k; ++i) {
    out.emplace_back(Architecture::linear(2),
                     Vector{rng.normal(), rng.normal(), rng.uniform(-1.0, 1.0)});
  }
  return out;
}

}  // namespace detail

inline CheckResult proxy_accuracy_identity(const CheckOptions& o) {
  const double tol = o.fast ? 0.025 : 0.01;
  const auto sets = detail::validation_sets(o, 6);
  const auto& spec = detail::selection_spec();
  Rng rng(child_seed(o.seed, 60));
  double worst = 0.0;
  for (const auto& f : detail::random_linear(5, rng)) {
    const auto p = f.parameters();
    const double acc = gaussian::linear_accuracy(spec, std::vector<double>{p[0], p[1]}, p[2]);
    for (const PuDataset* val : {&sets.ts, &sets.os}) {
      worst = std::max(worst, std::abs(pa_to_acc(proxy_accuracy(f, *val, spec.prior),
                                                 spec.prior) - acc));
    }
  }
  return {6, "proxy-accuracy-identity", worst <= tol,
          detail::fmt("max |(PA - pi) - ACC| = %.4f over 5 classifiers x {TS, OS} (<= %.3f)",
                      worst, tol)};
}

inline CheckResult proxy_auc_identity(const CheckOptions& o) {
  const double tol = o.fast ? 0.025 : 0.01;
  const auto sets = detail::validation_sets(o, 7);
  const auto& spec = detail::selection_spec();
  Rng rng(child_seed(o.seed, 70));
  double worst = 0.0;
  for (const auto& f : detail::random_linear(5, rng)) {
    const auto p = f.parameters();
    const double auc = gaussian::linear_auc(spec, std::vector<double>{p[0], p[1]});
    worst = std::max(worst, std::abs(pauc_to_auc(proxy_auc(f, sets.ts), spec.prior) - auc));
    worst = std::max(worst, std::abs(pauc_to_auc(proxy_auc(f, sets.os),
                                                 os_prior(spec.prior, sets.c)) - auc));
  }
  return {7, "proxy-auc-identity", worst <= tol,
          detail::fmt("max |AUC from PAUC - AUC| = %.4f over 5 classifiers x {TS, OS} (<= %.3f)",
                      worst, tol)};
}

// Under OS, uPU trained on D_U drifts with c while replenished uPU tracks a
// TS-trained baseline with the same n_P. Linear model, squared loss.
inline CheckResult calibration_trend(const CheckOptions& o) {
  using namespace harness;
  const std::vector<double> cs{0.2, 0.4, 0.6, 0.8};
  const std::size_t n = 4000;
  ExperimentConfig base;
  base.seed = child_seed(o.seed, 8);
  base.dataset.dim = 2;
  base.dataset.mean_pos = {1.4, 0.0};
  base.dataset.mean_neg = {-1.4, 0.0};
  base.dataset.n = n;
  base.dataset.n_test = 20000;
  base.pi = 0.5;
  base.loss = LossKind::Squared;
  base.model = Architecture::linear(2);
  base.weight_decay = 0.0;
  base.learning_rate = 0.01;
  base.batch_size = 128;
  base.iterations = 2000;
  base.eval_every = 2000;
  base.splits = 3;
  base.draws = 1;
  base.criteria = {Criterion::Pa};
  base.metrics = {Metric::Acc};

  ExperimentConfig os = base;
  os.setting = Setting::OS;
  os.algorithms = {parse_algorithm("upu"), parse_algorithm("upu-c")};
  os.sweep = SweepConfig{"c", cs};
  const auto os_rows = run_benchmark(os).summary.rows;

  std::vector<double> ts_acc;
  for (double c : cs) {
    ExperimentConfig ts = base;
    ts.setting = Setting::TS;
    ts.algorithms = {parse_algorithm("upu")};
    ts.dataset.n_p = static_cast<std::size_t>(std::lround(c * base.pi * n));
    ts.dataset.n_u = n - ts.dataset.n_p;
    ts_acc.push_back(run_benchmark(ts).summary.rows.at(0).cells.at(0)->mean);
  }

  auto os_acc = [&](const std::string& algo, double c) {
    for (const auto& r : os_rows) {
      if (r.algorithm == algo && r.sweep_value == c) return r.cells.at(0)->mean;
    }
    throw ValidationError("missing summary row");
  };
  const double drop = os_acc("upu", 0.2) - os_acc("upu", 0.8);
  bool b_ok = true, c_ok = true;
  std::string table;
  for (std::size_t k = 0; k < cs.size(); ++k) {
    const double u = os_acc("upu", cs[k]), cal = os_acc("upu-c", cs[k]);
    b_ok &= std::abs(cal - ts_acc[k]) <= 0.015;
    if (cs[k] >= 0.4) c_ok &= cal >= u;
    table += detail::fmt(" c=%.1f upu %.4f upu-c %.4f ts %.4f;", cs[k], u, cal, ts_acc[k]);
  }
  const bool a_ok = drop >= 0.02;
  return {8, "calibration-trend", a_ok && b_ok && c_ok,
          detail::fmt("(a) drop %.4f >= 0.02 %s, (b) %s, (c) %s;", drop, a_ok ? "ok" : "FAIL",
                      b_ok ? "ok" : "FAIL", c_ok ? "ok" : "FAIL") +
              table};
}

inline CheckResult gradient_check(const CheckOptions& o) {
  Rng rng(child_seed(o.seed, 9));
  double worst_mlp = 0.0, worst_lin = 0.0;
  for (int t = 0; t < 20; ++t) {
    for (bool mlp : {true, false}) {
      const std::size_t m = 10, d = 4;
      Matrix X(m, d);
      std::vector<int> signs(m);
      std::vector<double> w(m);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < d; ++j) X(i, j) = rng.normal();
        signs[i] = rng.bernoulli(0.5) ? 1 : -1;
        w[i] = rng.uniform(-1.0, 1.0);
      }
      if (mlp) {
        const auto f = Classifier::initialized(Architecture::mlp(d, 8), rng);
        worst_mlp = std::max(worst_mlp, finite_diff_check(f, X, signs, w, SurrogateLoss(), 1e-5));
      } else {
        const auto f = Classifier::initialized(Architecture::linear(d), rng);
        worst_lin = std::max(worst_lin, finite_diff_check(f, X, signs, w,
                                                          SurrogateLoss(LossKind::Squared), 1e-5));
      }
    }
  }
  return {9, "gradient-check", worst_mlp <= 1e-4 && worst_lin <= 1e-7,
          detail::fmt("mlp+logistic %.2e (<= 1e-4), linear+squared %.2e (<= 1e-7)", worst_mlp,
                      worst_lin)};
}

inline CheckResult metric_oracles(const CheckOptions& o) {
  Rng rng(child_seed(o.seed, 10));
  // Midrank AUC against the pairwise definition, with ties.
  std::size_t auc_mismatch = 0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t m = 2 + rng.index(300);
    std::vector<double> s(m);
    std::vector<int> y(m);
    for (std::size_t i = 0; i < m; ++i) {
      s[i] = std::round(rng.normal() * 3.0);
      y[i] = rng.bernoulli(0.4) ? 1 : -1;
    }
    y[0] = 1;
    y[1] = -1;
    double hits = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (y[i] < 0) continue;
      for (std::size_t j = 0; j < m; ++j) {
        if (y[j] > 0) continue;
        pairs += 1.0;
        hits += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
    }
    auc_mismatch += auc(s, y) != hits / pairs;
  }

  // nnPU objective against uPU on every batch of a training run.
  const GaussianMixtureSpec spec{2, {1.0, 0.5}, {-1.0, -0.5}, 1.0, 1.0, 0.4};
  const PuDataset pu = make_ts_pu(spec, 100, 300, rng);
  const auto init = Classifier::initialized(Architecture::mlp(2, 16), rng);
  TrainSchedule sched;
  sched.iterations = o.fast ? 500 : 2000;
  sched.eval_every = 100;
  sched.batch_p = 16;
  sched.batch_u = 48;
  const SurrogateLoss loss;
  std::size_t batches = 0, violations = 0, corrected = 0;
  train_ts({BaseEstimator::Nnpu, false, false}, pu.observed(), init,
           OptimizerState::for_classifier(init, 0.05, 0.9, 0.0), loss, sched, rng, {},
           [&](const StepInfo& s) {
             const double u = upu_risk({s.positive_batch, s.unlabeled_batch, spec.prior, {}},
                                       s.classifier, loss)
                                  .total;
             ++batches;
             // Both sums are formed in different orders; allow rounding.
             violations += s.objective.value.total < u - 1e-12 * (1.0 + std::abs(u));
             corrected += s.objective.corrected;
           });

  // PUSB positive count within [floor(pi m), floor(pi m) + ties at threshold].
  std::size_t band_violations = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t m = 1 + rng.index(500);
    const double pi = rng.uniform(0.01, 0.99);
    std::vector<double> s(m);
    for (auto& v : s) v = std::round(rng.normal() * (t % 2 ? 2.0 : 100.0));
    const double thr = pusb_threshold(s, pi);
    const auto k = static_cast<std::size_t>(std::floor(pi * static_cast<double>(m)));
    std::size_t count = 0, ties = 0;
    for (double v : s) {
      count += v >= thr;
      ties += v == thr;
    }
    band_violations += count < k || count > k + ties;
  }
  return {10, "metric-oracles", auc_mismatch == 0 && violations == 0 && band_violations == 0,
          detail::fmt("AUC mismatches %zu/50; nnPU < uPU on %zu/%zu batches (%zu clamped); "
                      "PUSB band violations %zu/200",
                      auc_mismatch, violations, batches, corrected, band_violations)};
}

namespace detail {

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace detail

// Two benchmark runs of the same config, 1 and 4 workers, must write
// byte-identical summary.csv files.
inline CheckResult harness_determinism(const CheckOptions& o,
                                       const std::filesystem::path& scratch) {
  using namespace harness;
  auto cfg = parse_config(
      "setting = OS\nc = 0.5\npi = 0.4\ndataset.n = 1200\ndataset.n_test = 1000\n"
      "algo = upu, upu-c, nnpu, nnpu-ga-c, pusb\nmodel = mlp:8\niterations = 300\n"
      "eval_every = 100\nsplits = 3\ndraws = 2\noracle_mode = true\ncriteria = pa, pauc, oa\n");
  cfg.seed = child_seed(o.seed, 11);
  std::ostringstream quiet;
  cfg.workers = 1;
  emit_report(run_benchmark(cfg), scratch / "w1", quiet);
  cfg.workers = 4;
  emit_report(run_benchmark(cfg), scratch / "w4", quiet);
  const auto a = detail::read_file(scratch / "w1" / "summary.csv");
  const auto b = detail::read_file(scratch / "w4" / "summary.csv");
  return {11, "harness-determinism", !a.empty() && a == b,
          detail::fmt("summary.csv %zu bytes (1 worker) vs %zu bytes (4 workers), %s", a.size(),
                      b.size(), a == b ? "identical" : "DIFFERENT")};
}

// Checks 1-7, 9 and 10; the end-to-end ones (8, 11) only without `fast`.
inline std::vector<CheckResult> run_all(const CheckOptions& o,
                                        const std::filesystem::path& scratch,
                                        const std::function<void(const CheckResult&)>& report) {
  std::vector<std::function<CheckResult()>> list{
      [&] { return os_sampler_prior(o); },     [&] { return upu_unbiased_ts(o); },
      [&] { return upu_bias_os(o); },          [&] { return calibrated_unbiased_os(o); },
      [&] { return estimator_equivalence(o); }, [&] { return proxy_accuracy_identity(o); },
      [&] { return proxy_auc_identity(o); },
  };
  if (!o.fast) list.push_back([&] { return calibration_trend(o); });
  list.push_back([&] { return gradient_check(o); });
  list.push_back([&] { return metric_oracles(o); });
  if (!o.fast) list.push_back([&] { return harness_determinism(o, scratch); });
  std::vector<CheckResult> out;
  for (auto& fn : list) {
    out.push_back(fn());
    if (report) report(out.back());
  }
  return out;
}

}  // namespace pubench::checks
