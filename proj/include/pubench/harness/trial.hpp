#pragma once

// One (split, hyperparameter draw, algorithm) training run with checkpoint
// evaluation.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pubench/csv.hpp"
#include "pubench/harness/config.hpp"
#include "pubench/harness/hyperparams.hpp"
#include "pubench/train.hpp"

namespace pubench::harness {

// Data for one split, shared read-only by every draw and algorithm.
struct SplitData {
  PuSplit pu;
  LabeledDataset test;
  Architecture model;
};

// Seeds: data from (seed, split); the draw and the training run from
// (seed, split, draw), so every algorithm sees the same data and draws.
inline std::uint64_t data_seed(std::uint64_t master, std::size_t split) {
  return child_seed(master, split);
}

inline std::uint64_t trial_seed(std::uint64_t master, std::size_t split, std::size_t draw) {
  return child_seed(master, split, draw);
}

// `pool` is the labeled CSV pool when dataset.source = csv.
inline SplitData prepare_split(const ExperimentConfig& cfg, std::size_t split,
                               const LabeledDataset* pool = nullptr) {
  Rng rng(data_seed(cfg.seed, split));
  PuDataset full;
  SplitData out;
  if (cfg.dataset.source == DataSource::Synthetic) {
    const GaussianMixtureSpec spec = cfg.mixture();
    full = cfg.setting == Setting::TS ? make_ts_pu(spec, cfg.dataset.n_p, cfg.dataset.n_u, rng)
                                      : make_os_pu(spec, cfg.dataset.n, *cfg.c, rng);
    out.test = synthesize_labeled(spec, cfg.dataset.n_test, rng);
  } else {
    if (pool == nullptr) throw ValidationError("csv source needs a loaded pool");
    auto [train_pool, test] = split_labeled(*pool, cfg.dataset.test_rate, rng);
    if (train_pool.size() == 0 || test.size() == 0) {
      throw DegenerateDraw("degenerate draw: train/test split left a side empty");
    }
    full = cfg.setting == Setting::TS
               ? make_ts_pu_from_pool(train_pool, cfg.pi, cfg.dataset.n_p, cfg.dataset.n_u, rng)
               : make_os_pu_from_pool(train_pool, cfg.pi, *cfg.c, rng);
    out.test = std::move(test);
  }
  out.pu = split_validation(full, cfg.val_rate, rng);
  out.model = cfg.model;
  out.model.input_dim = full.dim();
  return out;
}

struct CheckpointRecord {
  std::size_t iteration = 0;
  double objective = 0.0;            // mean mini-batch objective since the last checkpoint
  std::optional<double> threshold;   // PUSB decision threshold
  std::map<std::string, double> criteria;
  std::map<std::string, double> metrics;

  friend bool operator==(const CheckpointRecord&, const CheckpointRecord&) = default;
};

struct TrialResult {
  std::string algorithm;
  std::size_t algorithm_index = 0;  // position in the config's algo list
  std::optional<std::string> sweep_name;
  std::optional<double> sweep_value;
  std::uint64_t master_seed = 0;
  std::size_t split = 0;
  std::size_t draw = 0;
  HyperparamDraw hyperparams;
  std::size_t batch_p = 0;
  std::size_t batch_u = 0;
  std::vector<CheckpointRecord> checkpoints;
  std::map<std::string, std::size_t> selected;  // criterion -> checkpoint index
  bool failed = false;
  std::string failure;

  friend bool operator==(const TrialResult&, const TrialResult&) = default;
};

// Earliest index of the maximum.
inline std::size_t select_checkpoint(std::span<const double> values) {
  if (values.empty()) throw ValidationError("select_checkpoint needs at least one record");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

inline std::vector<double> criterion_series(const TrialResult& t, const std::string& criterion) {
  std::vector<double> out;
  out.reserve(t.checkpoints.size());
  for (const auto& c : t.checkpoints) out.push_back(c.criteria.at(criterion));
  return out;
}

namespace detail {

// Moves the decision boundary to score = threshold. The last parameter is
// the output bias for every architecture.
inline Classifier shifted(const Classifier& f, double threshold) {
  Classifier g = f;
  g.parameters().back() -= threshold;
  return g;
}

inline double pusb_threshold_for(const Classifier& f, const PuDataset& train, bool replenish,
                                 double prior) {
  std::vector<double> scores = f.score_batch(train.unlabeled);
  if (replenish) {
    const auto sp = f.score_batch(train.positives);
    scores.insert(scores.end(), sp.begin(), sp.end());
  }
  return pusb_threshold(scores, prior);
}

}  // namespace detail

inline TrialResult run_trial(const ExperimentConfig& cfg, const AlgorithmSpec& algo,
                             const SplitData& data, std::size_t split, std::size_t draw) {
  TrialResult result;
  result.algorithm = algo.name;
  result.master_seed = cfg.seed;
  result.split = split;
  result.draw = draw;

  Rng rng(trial_seed(cfg.seed, split, draw));
  HyperparamDraw hp = sample_hyperparams(rng, cfg.weight_decay, cfg.tolerance);
  if (cfg.learning_rate) hp.learning_rate = *cfg.learning_rate;
  if (cfg.batch_size) hp.batch_size = *cfg.batch_size;
  result.hyperparams = hp;

  const PuDataset& train = data.pu.train;
  const PuDataset& val = data.pu.validation;
  const Classifier init = Classifier::initialized(data.model, rng);
  const BatchSplit bs = batch_split(hp.batch_size, train.n_positive(), train.n_unlabeled());
  result.batch_p = bs.positive;
  result.batch_u = bs.unlabeled;

  TrainSchedule schedule;
  schedule.iterations = cfg.iterations;
  schedule.eval_every = cfg.eval_every;
  schedule.batch_p = bs.positive;
  schedule.batch_u = bs.unlabeled;
  schedule.objective = {hp.tolerance, cfg.ascent_scale};

  auto on_checkpoint = [&](std::size_t iteration, const Classifier& f) {
    CheckpointRecord rec;
    rec.iteration = iteration;
    const Classifier* eval = &f;
    Classifier adjusted;
    if (algo.pusb) {
      const double t = detail::pusb_threshold_for(f, train, algo.kind.calibrated, cfg.pi);
      rec.threshold = t;
      adjusted = detail::shifted(f, t);
      eval = &adjusted;
    }
    const auto sp = eval->score_batch(val.positives);
    const auto su = eval->score_batch(val.unlabeled);
    for (Criterion cr : cfg.criteria) {
      double v = 0.0;
      switch (cr) {
        case Criterion::Pa: v = proxy_accuracy(sp, su, val.setting, cfg.pi); break;
        case Criterion::Pauc: v = proxy_auc(sp, su); break;
        case Criterion::Oa:
          if (!cfg.oracle_mode || !val.oracle_unlabeled_labels) {
            throw ValidationError("criterion oa needs oracle_mode and oracle labels");
          }
          v = oracle_accuracy(sp, su, *val.oracle_unlabeled_labels, val.setting);
          break;
      }
      rec.criteria[std::string(to_string(cr))] = v;
    }
    const auto st = eval->score_batch(data.test.features);
    for (Metric m : cfg.metrics) {
      rec.metrics[std::string(to_string(m))] = evaluate_metric(m, st, data.test.labels);
    }
    result.checkpoints.push_back(std::move(rec));
  };

  const TrainResult tr =
      train_ts(algo.kind, train.observed(), init,
               OptimizerState::for_classifier(init, hp.learning_rate, hp.momentum,
                                              hp.weight_decay),
               SurrogateLoss(cfg.loss), schedule, rng, on_checkpoint);
  for (std::size_t i = 0; i < tr.log.size(); ++i) {
    result.checkpoints[i].objective = tr.log[i].mean_objective;
  }
  if (tr.failed) {
    result.failed = true;
    result.failure = "training diverged at " + tr.failure;
    return result;
  }
  for (Criterion cr : cfg.criteria) {
    const std::string name(to_string(cr));
    result.selected[name] = select_checkpoint(criterion_series(result, name));
  }
  return result;
}

inline TrialResult failed_trial(const ExperimentConfig& cfg, const AlgorithmSpec& algo,
                                std::size_t split, std::size_t draw, std::string reason) {
  TrialResult r;
  r.algorithm = algo.name;
  r.master_seed = cfg.seed;
  r.split = split;
  r.draw = draw;
  r.failed = true;
  r.failure = std::move(reason);
  return r;
}

}  // namespace pubench::harness
