#pragma once

// Split x draw x algorithm grid on a bounded worker pool, then per-split
// selection and mean +- std across splits.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "pubench/harness/trial.hpp"

namespace pubench::harness {

// Runs fn(0..count-1) on up to `workers` threads. Results must be written to
// slots keyed by index. The exception of the lowest failing index is
// rethrown after all threads join.
inline void parallel_for(std::size_t count, std::size_t workers,
                         const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::min(workers, count);
  if (n_threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct Cell {
  double mean = 0.0;
  double std = 0.0;  // population std across splits
  std::size_t n = 0;
};

struct SummaryRow {
  std::string algorithm;
  std::optional<double> sweep_value;
  std::vector<std::optional<Cell>> cells;  // criteria-major, metrics-minor
};

struct Summary {
  std::optional<std::string> sweep_name;
  std::vector<std::string> criteria;
  std::vector<std::string> metrics;
  std::vector<SummaryRow> rows;
  std::vector<std::string> failures;

  bool empty() const {
    for (const auto& r : rows) {
      for (const auto& c : r.cells) {
        if (c) return false;
      }
    }
    return true;
  }
};

struct BenchmarkResult {
  std::vector<TrialResult> trials;
  Summary summary;
};

// Canonical column order: criteria pa, pauc, oa; metrics acc, auc, f1,
// precision, recall.
inline std::vector<std::string> canonical_criteria(std::vector<std::string> names) {
  std::sort(names.begin(), names.end(), [](const std::string& a, const std::string& b) {
    return parse_criterion(a) < parse_criterion(b);
  });
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return names;
}

inline std::vector<std::string> canonical_metrics(std::vector<std::string> names) {
  std::sort(names.begin(), names.end(), [](const std::string& a, const std::string& b) {
    return parse_metric(a) < parse_metric(b);
  });
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return names;
}

// For each (sweep value, algorithm) and criterion: per split, the (draw,
// checkpoint) with the largest criterion value over non-failed trials, ties
// to the earliest draw and then the earliest checkpoint; then mean and
// population std of the test metrics at the selected points across splits.
inline Summary aggregate(const std::vector<TrialResult>& trials,
                         const std::vector<std::string>& criteria,
                         const std::vector<std::string>& metrics) {
  Summary s;
  s.criteria = canonical_criteria(criteria);
  s.metrics = canonical_metrics(metrics);

  struct Group {
    std::size_t algorithm_index;
    std::string algorithm;
    std::optional<double> sweep_value;
    std::vector<const TrialResult*> members;
  };
  std::vector<Group> groups;
  for (const auto& t : trials) {
    if (t.sweep_name) s.sweep_name = t.sweep_name;
    if (t.failed) {
      s.failures.push_back(t.algorithm + " split " + std::to_string(t.split) + " draw " +
                           std::to_string(t.draw) + ": " + t.failure);
    }
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
      return g.algorithm_index == t.algorithm_index && g.algorithm == t.algorithm &&
             g.sweep_value == t.sweep_value;
    });
    if (it == groups.end()) {
      groups.push_back({t.algorithm_index, t.algorithm, t.sweep_value, {}});
      it = std::prev(groups.end());
    }
    it->members.push_back(&t);
  }

  for (auto& g : groups) {
    std::stable_sort(g.members.begin(), g.members.end(),
                     [](const TrialResult* a, const TrialResult* b) {
                       return std::tie(a->split, a->draw) < std::tie(b->split, b->draw);
                     });
    SummaryRow row{g.algorithm, g.sweep_value, {}};
    for (const auto& cr : s.criteria) {
      // Selected test metrics, one vector per split that has a usable trial.
      std::vector<std::vector<double>> picked;
      std::size_t i = 0;
      while (i < g.members.size()) {
        const std::size_t split = g.members[i]->split;
        const CheckpointRecord* best = nullptr;
        double best_value = 0.0;
        for (; i < g.members.size() && g.members[i]->split == split; ++i) {
          const TrialResult& t = *g.members[i];
          if (t.failed) continue;
          for (const auto& ck : t.checkpoints) {
            const double v = ck.criteria.at(cr);
            if (best == nullptr || v > best_value) {
              best = &ck;
              best_value = v;
            }
          }
        }
        if (best == nullptr) continue;
        std::vector<double> vals;
        for (const auto& m : s.metrics) vals.push_back(best->metrics.at(m));
        picked.push_back(std::move(vals));
      }
      for (std::size_t m = 0; m < s.metrics.size(); ++m) {
        if (picked.empty()) {
          row.cells.emplace_back();
          continue;
        }
        Cell c;
        c.n = picked.size();
        double sum = 0.0;
        for (const auto& v : picked) sum += v[m];
        c.mean = sum / static_cast<double>(c.n);
        double sq = 0.0;
        for (const auto& v : picked) sq += (v[m] - c.mean) * (v[m] - c.mean);
        c.std = std::sqrt(sq / static_cast<double>(c.n));
        row.cells.push_back(c);
      }
    }
    s.rows.push_back(std::move(row));
  }
  return s;
}

inline std::vector<std::string> criterion_names(const ExperimentConfig& cfg) {
  std::vector<std::string> out;
  for (Criterion c : cfg.criteria) out.emplace_back(to_string(c));
  return out;
}

inline std::vector<std::string> metric_names(const ExperimentConfig& cfg) {
  std::vector<std::string> out;
  for (Metric m : cfg.metrics) out.emplace_back(to_string(m));
  return out;
}

inline BenchmarkResult run_benchmark(const ExperimentConfig& cfg) {
  cfg.validate();
  std::optional<LabeledDataset> pool;
  if (cfg.dataset.source == DataSource::Csv) pool = csv::load_labeled(cfg.dataset.path);

  std::vector<ExperimentConfig> variants;
  std::vector<std::optional<double>> sweep_values;
  if (cfg.sweep) {
    for (double v : cfg.sweep->values) {
      variants.push_back(cfg.at_sweep(v));
      sweep_values.emplace_back(v);
    }
  } else {
    variants.push_back(cfg);
    sweep_values.emplace_back();
  }

  const std::size_t n_splits = cfg.splits;
  std::vector<std::optional<SplitData>> data(variants.size() * n_splits);
  std::vector<std::string> data_failure(data.size());
  parallel_for(data.size(), cfg.workers, [&](std::size_t k) {
    try {
      data[k] = prepare_split(variants[k / n_splits], k % n_splits, pool ? &*pool : nullptr);
    } catch (const DegenerateDraw& e) {
      data_failure[k] = e.what();
    }
  });

  const std::size_t n_algos = cfg.algorithms.size();
  const std::size_t per_variant = n_algos * n_splits * cfg.draws;
  BenchmarkResult out;
  out.trials.resize(variants.size() * per_variant);
  parallel_for(out.trials.size(), cfg.workers, [&](std::size_t idx) {
    const std::size_t v = idx / per_variant;
    std::size_t rest = idx % per_variant;
    const std::size_t a = rest / (n_splits * cfg.draws);
    rest %= n_splits * cfg.draws;
    const std::size_t split = rest / cfg.draws;
    const std::size_t draw = rest % cfg.draws;
    const auto& algo = cfg.algorithms[a];
    const auto& d = data[v * n_splits + split];
    TrialResult t = d ? run_trial(variants[v], algo, *d, split, draw)
                      : failed_trial(cfg, algo, split, draw, data_failure[v * n_splits + split]);
    if (cfg.sweep) {
      t.sweep_name = cfg.sweep->name;
      t.sweep_value = sweep_values[v];
    }
    t.algorithm_index = a;
    out.trials[idx] = std::move(t);
  });
  out.summary = aggregate(out.trials, criterion_names(cfg), metric_names(cfg));
  return out;
}

}  // namespace pubench::harness
