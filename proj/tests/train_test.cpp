#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "pubench/train.hpp"

namespace pubench {
namespace {

const GaussianMixtureSpec kSpec{2, {1.0, 0.5}, {-1.0, -0.5}, 1.0, 1.0, 0.4};

struct Fixture {
  PuDataset data;
  Classifier init;
};

Fixture make_fixture(std::uint64_t seed, Architecture arch = Architecture::linear(2)) {
  Rng rng(seed);
  Fixture f{make_ts_pu(kSpec, 300, 700, rng), {}};
  f.init = Classifier::initialized(arch, rng);
  return f;
}

TrainSchedule schedule(std::size_t iterations, std::size_t eval_every) {
  TrainSchedule s;
  s.iterations = iterations;
  s.eval_every = eval_every;
  s.batch_p = 20;
  s.batch_u = 40;
  return s;
}

TEST(Train, ZeroIterationsReturnsInput) {
  const auto f = make_fixture(1);
  Rng rng(2);
  const auto r = train_ts({}, f.data.observed(), f.init,
                          OptimizerState::for_classifier(f.init, 0.1, 0.9, 0.0), SurrogateLoss(),
                          schedule(0, 10), rng);
  EXPECT_EQ(r.classifier, f.init);
  EXPECT_TRUE(r.log.empty());
  EXPECT_FALSE(r.failed);
}

TEST(Train, CheckpointCadence) {
  const auto f = make_fixture(3);
  Rng rng(4);
  std::vector<std::size_t> seen;
  const auto r = train_ts(
      {}, f.data.observed(), f.init, OptimizerState::for_classifier(f.init, 0.01, 0.9, 0.0),
      SurrogateLoss(), schedule(95, 20), rng,
      [&](std::size_t it, const Classifier&) { seen.push_back(it); });
  EXPECT_EQ(seen, (std::vector<std::size_t>{20, 40, 60, 80}));
  ASSERT_EQ(r.log.size(), 4u);
  EXPECT_EQ(r.completed_iterations, 95u);
}

// Every replenished step evaluates the calibrated formula with the batch
// label-frequency estimate.
TEST(Train, ReplenishedStepsEqualCalibratedFormula) {
  const auto f = make_fixture(5, Architecture::mlp(2, 8));
  Rng rng(6);
  const SurrogateLoss loss;
  std::size_t steps = 0;
  double worst = 0.0;
  train_ts({BaseEstimator::Upu, true, false}, f.data.observed(), f.init,
           OptimizerState::for_classifier(f.init, 0.05, 0.9, 1e-4), loss, schedule(200, 50), rng,
           {}, [&](const StepInfo& s) {
             const double p = static_cast<double>(s.positive_batch.rows());
             const double u = static_cast<double>(s.unlabeled_batch.rows());
             const double c = p / (kSpec.prior * (p + u));
             const double direct = oracle::direct_calibrated(
                 s.positive_batch, s.unlabeled_batch, kSpec.prior, c, s.classifier, loss);
             worst = std::max(worst, std::abs(direct - s.objective.value.total) /
                                         (1.0 + std::abs(direct)));
             ++steps;
           });
  EXPECT_EQ(steps, 200u);
  EXPECT_LE(worst, 1e-9);
}

TEST(Train, NnpuAndGaAgreeWithoutCorrections) {
  const auto f = make_fixture(7);
  const SurrogateLoss loss(LossKind::Sigmoid);
  const auto opt = OptimizerState::for_classifier(f.init, 0.005, 0.9, 0.0);
  bool any_corrected = false;
  auto watch = [&](const StepInfo& s) { any_corrected |= s.objective.corrected; };
  Rng r1(8), r2(8);
  const auto nn = train_ts({BaseEstimator::Nnpu, false, false}, f.data.observed(), f.init, opt,
                           loss, schedule(100, 50), r1, {}, watch);
  const auto ga = train_ts({BaseEstimator::NnpuGa, false, false}, f.data.observed(), f.init, opt,
                           loss, schedule(100, 50), r2, {}, watch);
  ASSERT_FALSE(any_corrected);
  EXPECT_EQ(nn.classifier, ga.classifier);
}

// The logged objective is an unbiased mini-batch estimate of the empirical
// risk on the training pool. For uPU with logistic loss that empirical risk
// keeps falling while the population risk rises again.
TEST(Train, LateObjectiveTracksEmpiricalRisk) {
  const auto f = make_fixture(9);
  Rng rng(10);
  const SurrogateLoss loss;
  const auto r = train_ts({}, f.data.observed(), f.init,
                          OptimizerState::for_classifier(f.init, 0.002, 0.9, 0.0), loss,
                          schedule(1500, 500), rng);
  ASSERT_FALSE(r.failed);
  const double empirical =
      upu_risk({f.data.positives, f.data.unlabeled, kSpec.prior, {}}, r.classifier, loss).total;
  EXPECT_NEAR(r.log.back().mean_objective, empirical, 0.02);
  Rng mc(11);
  EXPECT_GT(monte_carlo_risk(kSpec, r.classifier, loss, 100000, mc).value, empirical + 0.1);
}

TEST(Train, Deterministic) {
  const auto f = make_fixture(12, Architecture::mlp(2, 5));
  const auto opt = OptimizerState::for_classifier(f.init, 0.01, 0.9, 1e-4);
  Rng r1(13), r2(13);
  const EstimatorKind k{BaseEstimator::Nnpu, true, false};
  const auto a = train_ts(k, f.data.observed(), f.init, opt, SurrogateLoss(), schedule(150, 50), r1);
  const auto b = train_ts(k, f.data.observed(), f.init, opt, SurrogateLoss(), schedule(150, 50), r2);
  EXPECT_EQ(a.classifier, b.classifier);
  ASSERT_EQ(a.log.size(), b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    EXPECT_EQ(a.log[i].mean_objective, b.log[i].mean_objective);
  }
}

TEST(Train, DivergenceIsReportedNotThrown) {
  const auto f = make_fixture(14);
  Rng rng(15);
  const auto r = train_ts({}, f.data.observed(), f.init,
                          OptimizerState::for_classifier(f.init, 1e150, 0.9, 0.0),
                          SurrogateLoss(LossKind::Squared), schedule(100, 10), rng);
  EXPECT_TRUE(r.failed);
  EXPECT_FALSE(r.failure.empty());
  EXPECT_LT(r.completed_iterations, 100u);
  EXPECT_TRUE(r.classifier.all_finite());
}

TEST(Train, RejectsOversizedBatch) {
  const auto f = make_fixture(16);
  Rng rng(17);
  auto s = schedule(10, 5);
  s.batch_p = 301;
  EXPECT_THROW(train_ts({}, f.data.observed(), f.init,
                        OptimizerState::for_classifier(f.init, 0.01, 0.9, 0.0), SurrogateLoss(),
                        s, rng),
               ValidationError);
}

}  // namespace
}  // namespace pubench
