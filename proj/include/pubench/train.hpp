#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "pubench/risk.hpp"

namespace pubench {

struct TrainSchedule {
  std::size_t iterations = 2000;
  std::size_t batch_p = 64;
  std::size_t batch_u = 64;
  std::size_t eval_every = 100;
  ObjectiveOptions objective;
};

// Handed to the step observer before each parameter update.
struct StepInfo {
  std::size_t iteration;          // 1-based
  const Matrix& positive_batch;
  const Matrix& unlabeled_batch;  // as fetched, before replenishment
  const Classifier& classifier;   // parameters the objective was evaluated at
  const Objective& objective;
};

using StepObserver = std::function<void(const StepInfo&)>;
using CheckpointObserver = std::function<void(std::size_t iteration, const Classifier&)>;

struct CheckpointEntry {
  std::size_t iteration = 0;
  double mean_objective = 0.0;  // over the steps since the previous checkpoint
};

struct TrainResult {
  Classifier classifier;
  std::vector<CheckpointEntry> log;
  std::size_t completed_iterations = 0;
  bool failed = false;
  std::string failure;
};

// Shuffled pass over a pool of row indices; a pass that cannot fill the next
// batch is dropped and the pool is reshuffled.
class BatchCycler {
 public:
  BatchCycler(std::size_t pool_size, std::size_t batch_size, Rng& rng)
      : order_(pool_size), batch_(batch_size) {
    if (batch_size < 1 || batch_size > pool_size) {
      throw ValidationError("batch size " + std::to_string(batch_size) +
                            " must be in [1, " + std::to_string(pool_size) + "]");
    }
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    rng.shuffle(std::span(order_));
  }

  std::span<const std::size_t> next(Rng& rng) {
    if (cursor_ + batch_ > order_.size()) {
      rng.shuffle(std::span(order_));
      cursor_ = 0;
    }
    std::span<const std::size_t> out(order_.data() + cursor_, batch_);
    cursor_ += batch_;
    return out;
  }

 private:
  std::vector<std::size_t> order_;
  std::size_t batch_;
  std::size_t cursor_ = 0;
};

// Mini-batch training of a TS estimator, optionally calibrated by
// replenishing each unlabeled mini-batch with the current positive one.
// A non-finite objective or update ends the run with failed = true.
inline TrainResult train_ts(const EstimatorKind& kind, const ObservedPu& data,
                            Classifier classifier, OptimizerState opt,
                            const SurrogateLoss& loss, const TrainSchedule& schedule, Rng& rng,
                            const CheckpointObserver& on_checkpoint = {},
                            const StepObserver& on_step = {}) {
  kind.validate();
  if (schedule.eval_every < 1) throw ValidationError("eval_every must be >= 1");
  TrainResult result;
  if (schedule.iterations == 0) {
    result.classifier = std::move(classifier);
    return result;
  }
  BatchCycler pos_cycle(data.positives.rows(), schedule.batch_p, rng);
  BatchCycler unl_cycle(data.unlabeled.rows(), schedule.batch_u, rng);

  double window_sum = 0.0;
  std::size_t window_len = 0;
  for (std::size_t it = 1; it <= schedule.iterations; ++it) {
    const Matrix p_batch = select_rows(data.positives, pos_cycle.next(rng));
    const Matrix u_batch = select_rows(data.unlabeled, unl_cycle.next(rng));
    const RiskBatch batch{p_batch, u_batch, data.prior, data.label_frequency};
    try {
      const Objective obj = evaluate_objective(kind, batch, classifier, loss, schedule.objective);
      if (on_step) on_step(StepInfo{it, p_batch, u_batch, classifier, obj});
      sgd_step(classifier, obj.grad, opt);
      window_sum += obj.value.total;
      ++window_len;
    } catch (const NonFiniteError& e) {
      result.failed = true;
      result.failure = "iteration " + std::to_string(it) + ": " + e.what();
      break;
    }
    result.completed_iterations = it;
    if (it % schedule.eval_every == 0) {
      result.log.push_back({it, window_sum / static_cast<double>(window_len)});
      window_sum = 0.0;
      window_len = 0;
      if (on_checkpoint) on_checkpoint(it, classifier);
    }
  }
  result.classifier = std::move(classifier);
  return result;
}

}  // namespace pubench
