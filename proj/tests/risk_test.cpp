#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "pubench/risk.hpp"

namespace pubench {
namespace {

Matrix column(std::initializer_list<double> xs) {
  Matrix m(0, 1);
  for (double x : xs) m.append_row(std::vector<double>{x});
  return m;
}

Matrix random_matrix(std::size_t m, std::size_t d, Rng& rng, double shift = 0.0) {
  Matrix X(m, d);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < d; ++j) X(i, j) = rng.normal() + shift;
  }
  return X;
}

const Classifier identity_1d(Architecture::linear(1), {1.0, 0.0});

TEST(Upu, HandEvaluationSquaredLoss) {
  // P at score 0: l(+1)=l(-1)=1/4. U at scores 1 and -1: l(-1) = 1 and 0.
  const Matrix P = column({0.0}), U = column({1.0, -1.0});
  const auto r = upu_risk({P, U, 0.5, {}}, identity_1d, SurrogateLoss(LossKind::Squared));
  EXPECT_NEAR(r.total, 0.5, 1e-15);
  EXPECT_NEAR(r.positive_part, 0.125, 1e-15);
  EXPECT_NEAR(r.negative_part, 0.375, 1e-15);
}

TEST(Upu, MatchesDirectSubstitution) {
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    const Matrix P = random_matrix(1 + rng.index(10), 3, rng, 1.0);
    const Matrix U = random_matrix(1 + rng.index(20), 3, rng);
    const auto clf = Classifier::initialized(Architecture::mlp(3, 4), rng);
    const double pi = rng.uniform(0.05, 0.95);
    for (LossKind k : {LossKind::Logistic, LossKind::Sigmoid, LossKind::Squared}) {
      const SurrogateLoss l(k);
      const auto r = upu_risk({P, U, pi, {}}, clf, l);
      EXPECT_NEAR(r.total, oracle::direct_upu(P, U, pi, clf, l), 1e-12);
      EXPECT_NEAR(r.total, r.positive_part + r.negative_part, 1e-12);
    }
  }
}

TEST(Upu, SigmoidLossIdentity) {
  Rng rng(2);
  const SurrogateLoss sig(LossKind::Sigmoid);
  for (int t = 0; t < 20; ++t) {
    const Matrix P = random_matrix(7, 2, rng), U = random_matrix(11, 2, rng);
    const auto clf = Classifier::initialized(Architecture::linear(2), rng);
    const double pi = 0.3;
    double mean_pos = 0, mean_u = 0;
    for (std::size_t i = 0; i < P.rows(); ++i) mean_pos += sig.value(clf.score(P.row(i)), 1) / 7;
    for (std::size_t j = 0; j < U.rows(); ++j) mean_u += sig.value(clf.score(U.row(j)), -1) / 11;
    // l(z,+1) - l(z,-1) = 2 l(z,+1) - 1 for the sigmoid loss.
    EXPECT_NEAR(upu_risk({P, U, pi, {}}, clf, sig).total, 2 * pi * mean_pos + mean_u - pi, 1e-12);
  }
}

TEST(Upu, ZeroClassifierGivesLn2) {
  Rng rng(3);
  const Matrix P = random_matrix(5, 2, rng), U = random_matrix(9, 2, rng);
  const Classifier zero(Architecture::linear(2));
  EXPECT_NEAR(upu_risk({P, U, 0.37, {}}, zero, SurrogateLoss()).total, std::numbers::ln2, 1e-15);
}

TEST(Upu, RejectsEmptyBatches) {
  const Matrix P = column({1.0});
  const Matrix empty(0, 1);
  EXPECT_THROW(upu_risk({empty, P, 0.5, {}}, identity_1d, SurrogateLoss()), ValidationError);
  EXPECT_THROW(upu_risk({P, empty, 0.5, {}}, identity_1d, SurrogateLoss()), ValidationError);
}

TEST(Calibrated, FullLabelFrequencyIsSupervisedWeighting) {
  Rng rng(4);
  const Matrix P = random_matrix(6, 2, rng), U = random_matrix(8, 2, rng);
  const auto clf = Classifier::initialized(Architecture::linear(2), rng);
  const SurrogateLoss l;
  double sp = 0, su = 0;
  for (std::size_t i = 0; i < 6; ++i) sp += l.value(clf.score(P.row(i)), 1) / 6;
  for (std::size_t j = 0; j < 8; ++j) su += l.value(clf.score(U.row(j)), -1) / 8;
  EXPECT_NEAR(calibrated_risk({P, U, 0.4, 1.0}, clf, l).total, 0.4 * sp + 0.6 * su, 1e-14);
}

TEST(Calibrated, SinglePairWithEstimatedC) {
  const Matrix P = column({0.8}), U = column({-0.3});
  const double c = estimate_label_frequency(1, 1, 0.5).value;
  ASSERT_EQ(c, 1.0);
  const SurrogateLoss l;
  const double expected = 0.5 * l.value(0.8, 1) + 0.5 * l.value(-0.3, -1);
  EXPECT_NEAR(calibrated_risk({P, U, 0.5, c}, identity_1d, l).total, expected, 1e-15);
}

TEST(Calibrated, MatchesDirectSubstitutionAndNeedsC) {
  Rng rng(5);
  const Matrix P = random_matrix(9, 3, rng), U = random_matrix(13, 3, rng);
  const auto clf = Classifier::initialized(Architecture::mlp(3, 5), rng);
  const SurrogateLoss l(LossKind::Sigmoid);
  EXPECT_NEAR(calibrated_risk({P, U, 0.6, 0.35}, clf, l).total,
              oracle::direct_calibrated(P, U, 0.6, 0.35, clf, l), 1e-12);
  EXPECT_THROW(calibrated_risk({P, U, 0.6, {}}, clf, l), ValidationError);
}

// Calibrated risk with c = p / (pi (p + u)) equals uPU on the replenished batch.
TEST(Calibrated, EquivalentToReplenishedUpu) {
  Rng rng(6);
  for (int t = 0; t < 100; ++t) {
    const std::size_t p = 1 + rng.index(40), u = 1 + rng.index(80), d = 1 + rng.index(5);
    const Matrix P = random_matrix(p, d, rng, 0.5), U = random_matrix(u, d, rng);
    const auto clf = rng.bernoulli(0.5)
                         ? Classifier::initialized(Architecture::linear(d), rng)
                         : Classifier::initialized(Architecture::mlp(d, 1 + rng.index(8)), rng);
    const SurrogateLoss l(static_cast<LossKind>(rng.index(3)));
    const double pi = rng.uniform(0.05, 0.95);
    const double c = static_cast<double>(p) / (pi * static_cast<double>(p + u));
    const double cal = calibrated_risk({P, U, pi, c}, clf, l).total;
    const Matrix UP = replenish_batch(P, U);
    const double rep = upu_risk({P, UP, pi, {}}, clf, l).total;
    EXPECT_LE(std::abs(cal - rep) / (1.0 + std::abs(rep)), 1e-9) << "instance " << t;
  }
}

TEST(Nnpu, NonNegativeBranchMatchesUpu) {
  // P at 0 and U at 1 under squared loss: A = 1 - 0.5 * 0.25 > 0.
  const Matrix P = column({0.0}), U = column({1.0});
  const SurrogateLoss l(LossKind::Squared);
  const auto u = upu_risk({P, U, 0.5, {}}, identity_1d, l);
  const auto n = nnpu_risk({P, U, 0.5, {}}, identity_1d, l);
  EXPECT_FALSE(n.corrected);
  EXPECT_EQ(n.value.total, u.total);
  EXPECT_NEAR(u.negative_part, 0.875, 1e-15);
}

TEST(Nnpu, ClampBranch) {
  // U at -1 costs nothing; P at 1 has l(-1) = 1, so A = 0 - 0.5 < 0.
  const Matrix P = column({1.0}), U = column({-1.0});
  const SurrogateLoss l(LossKind::Squared);
  const auto n = nnpu_risk({P, U, 0.5, {}}, identity_1d, l);
  EXPECT_TRUE(n.corrected);
  EXPECT_EQ(n.value.total, n.value.positive_part);
  EXPECT_EQ(n.value.positive_part, 0.0);
  // A = -0.5 is tolerated with tolerance 0.6.
  EXPECT_FALSE(nnpu_risk({P, U, 0.5, {}}, identity_1d, l, 0.6).corrected);
}

TEST(Nnpu, DominatesUpuOnRandomBatches) {
  Rng rng(7);
  int corrected = 0;
  for (int t = 0; t < 300; ++t) {
    const Matrix P = random_matrix(1 + rng.index(8), 2, rng, 1.0);
    const Matrix U = random_matrix(1 + rng.index(8), 2, rng, -1.0);
    Classifier clf = Classifier::initialized(Architecture::linear(2), rng);
    for (auto& w : clf.parameters()) w *= 4.0;
    const SurrogateLoss l(static_cast<LossKind>(rng.index(3)));
    const auto u = upu_risk({P, U, 0.5, {}}, clf, l);
    const auto n = nnpu_risk({P, U, 0.5, {}}, clf, l);
    EXPECT_GE(n.value.total, u.total);
    EXPECT_EQ(n.value.total == u.total, !n.corrected);
    EXPECT_GE(n.value.total, n.value.positive_part);
    EXPECT_GE(n.value.positive_part, 0.0);
    corrected += n.corrected;
  }
  EXPECT_GT(corrected, 0);
}

TEST(Objective, ValuesMatchEstimators) {
  Rng rng(8);
  const Matrix P = random_matrix(12, 3, rng, 0.7), U = random_matrix(30, 3, rng);
  const auto clf = Classifier::initialized(Architecture::mlp(3, 6), rng);
  const SurrogateLoss l;
  const RiskBatch b{P, U, 0.45, {}};
  EXPECT_NEAR(evaluate_objective({BaseEstimator::Upu, false, false}, b, clf, l).value.total,
              upu_risk(b, clf, l).total, 1e-13);
  const Matrix UP = replenish_batch(P, U);
  const double rep = upu_risk({P, UP, 0.45, {}}, clf, l).total;
  EXPECT_NEAR(evaluate_objective({BaseEstimator::Upu, true, false}, b, clf, l).value.total, rep,
              1e-13);
  EXPECT_NEAR(evaluate_objective({BaseEstimator::Upu, true, true}, b, clf, l).value.total, rep,
              1e-12);
  EXPECT_THROW(evaluate_objective({BaseEstimator::Nnpu, true, true}, b, clf, l), ValidationError);
}

// Gradients of every objective branch against finite differences of the
// direct formulas.
TEST(Objective, GradientsMatchFiniteDifferences) {
  Rng rng(9);
  const SurrogateLoss l(LossKind::Logistic);
  for (int t = 0; t < 10; ++t) {
    const Matrix P = random_matrix(6, 2, rng, 0.8), U = random_matrix(10, 2, rng);
    const auto clf = Classifier::initialized(Architecture::mlp(2, 5), rng);
    const double pi = 0.4;
    const RiskBatch b{P, U, pi, {}};
    const Matrix UP = replenish_batch(P, U);
    const double c = 6.0 / (pi * 16.0);

    struct Case {
      EstimatorKind kind;
      std::function<double(const Classifier&)> f;
    };
    const std::vector<Case> cases = {
        {{BaseEstimator::Upu, false, false},
         [&](const Classifier& g) { return oracle::direct_upu(P, U, pi, g, l); }},
        {{BaseEstimator::Upu, true, false},
         [&](const Classifier& g) { return oracle::direct_upu(P, UP, pi, g, l); }},
        {{BaseEstimator::Upu, true, true},
         [&](const Classifier& g) { return oracle::direct_calibrated(P, U, pi, c, g, l); }},
    };
    for (const auto& cs : cases) {
      const auto analytic = evaluate_objective(cs.kind, b, clf, l).grad;
      const auto numeric = oracle::numeric_gradient(clf, cs.f, 1e-5);
      for (std::size_t j = 0; j < analytic.size(); ++j) {
        EXPECT_NEAR(analytic[j], numeric[j], 1e-7 + 1e-5 * std::abs(numeric[j]));
      }
    }
  }
}

TEST(Objective, NnpuClampDropsNegativeGradient) {
  const Matrix P = column({1.0, 2.0}), U = column({-2.0, -1.0});
  const SurrogateLoss l(LossKind::Squared);
  const RiskBatch b{P, U, 0.5, {}};
  const auto nn = evaluate_objective({BaseEstimator::Nnpu, false, false}, b, identity_1d, l);
  ASSERT_TRUE(nn.corrected);
  // Gradient of the positive part alone: (pi/p) sum_P l'(z,+1) * (x, 1).
  double gw = 0, gb = 0;
  for (double x : {1.0, 2.0}) {
    gw += 0.25 * l.derivative(x, 1) * x;
    gb += 0.25 * l.derivative(x, 1);
  }
  EXPECT_NEAR(nn.grad[0], gw, 1e-15);
  EXPECT_NEAR(nn.grad[1], gb, 1e-15);
}

TEST(NnpuGa, AscentIncreasesNegativeRisk) {
  const Matrix P = column({3.0, 2.5}), U = column({-3.0, -2.0, -2.5});
  const SurrogateLoss l;
  const RiskBatch b{P, U, 0.5, {}};
  const double before = upu_risk(b, identity_1d, l).negative_part;
  ASSERT_LT(before, 0.0);
  for (double lr : {1e-4, 1e-3, 1e-2}) {
    Classifier clf = identity_1d;
    auto opt = OptimizerState::for_classifier(clf, lr, 0.9, 0.0);
    EXPECT_TRUE(nnpu_ga_step(b, clf, opt, l, 0.0, 1.0));
    EXPECT_GT(upu_risk(b, clf, l).negative_part, before) << "lr=" << lr;
  }
}

TEST(NnpuGa, ZeroAscentScaleLeavesParameters) {
  const Matrix P = column({3.0}), U = column({-3.0});
  Classifier clf = identity_1d;
  auto opt = OptimizerState::for_classifier(clf, 0.1, 0.9, 0.0);
  EXPECT_TRUE(nnpu_ga_step({P, U, 0.5, {}}, clf, opt, SurrogateLoss(), 0.0, 0.0));
  EXPECT_EQ(clf, identity_1d);
}

TEST(NnpuGa, DescentBranchEqualsNnpu) {
  Rng rng(10);
  const Matrix P = random_matrix(5, 2, rng, 0.5), U = random_matrix(9, 2, rng);
  const auto clf = Classifier::initialized(Architecture::linear(2), rng);
  const RiskBatch b{P, U, 0.5, {}};
  const auto ga = evaluate_objective({BaseEstimator::NnpuGa, false, false}, b, clf, SurrogateLoss());
  const auto nn = evaluate_objective({BaseEstimator::Nnpu, false, false}, b, clf, SurrogateLoss());
  ASSERT_FALSE(nn.corrected);
  EXPECT_EQ(ga.grad, nn.grad);
  EXPECT_EQ(ga.value.total, nn.value.total);
}

TEST(Replenish, ConcatenationContract) {
  Rng rng(11);
  const Matrix P = random_matrix(32, 3, rng), U = random_matrix(64, 3, rng);
  const Matrix UP = replenish_batch(P, U);
  ASSERT_EQ(UP.rows(), 96u);
  for (std::size_t i = 0; i < 64; ++i) {
    EXPECT_TRUE(std::equal(U.row(i).begin(), U.row(i).end(), UP.row(i).begin()));
  }
  for (std::size_t i = 0; i < 32; ++i) {
    EXPECT_TRUE(std::equal(P.row(i).begin(), P.row(i).end(), UP.row(64 + i).begin()));
  }
  EXPECT_THROW(replenish_batch(Matrix(0, 3), U), ValidationError);
  EXPECT_THROW(replenish_batch(random_matrix(2, 2, rng), U), ValidationError);
}

TEST(BiasOracle, VanishesWhenPriorsAgreeOrLossesAgree) {
  const GaussianMixtureSpec spec{2, {1.0, 0.0}, {-1.0, 0.0}, 1.0, 1.0, 0.5};
  Rng rng(12);
  const auto clf = Classifier::initialized(Architecture::linear(2), rng);
  const auto tiny_c = expected_bias_oracle(spec, clf, SurrogateLoss(), 1e-12, 20000, rng);
  EXPECT_LE(std::abs(tiny_c.value), 1e-9);
  const auto zero = expected_bias_oracle(spec, Classifier(Architecture::linear(2)),
                                         SurrogateLoss(), 0.5, 20000, rng);
  EXPECT_EQ(zero.value, 0.0);
  EXPECT_THROW(expected_bias_oracle(spec, clf, SurrogateLoss(), 0.5, 100, rng), ValidationError);
}

TEST(MonteCarloRisk, ZeroClassifierIsLn2) {
  const GaussianMixtureSpec spec{1, {1.0}, {-1.0}, 1.0, 1.0, 0.3};
  Rng rng(13);
  const auto r = monte_carlo_risk(spec, Classifier(Architecture::linear(1)), SurrogateLoss(),
                                  1000, rng);
  EXPECT_NEAR(r.value, std::numbers::ln2, 1e-12);
  EXPECT_NEAR(r.standard_error, 0.0, 1e-12);
}

TEST(Pusb, TopQuantile) {
  const std::vector<double> s{1, 2, 3, 4};
  const double t = pusb_threshold(s, 0.25);
  EXPECT_EQ(std::count_if(s.begin(), s.end(), [&](double v) { return v >= t; }), 1);
  EXPECT_EQ(t, 4.0);
}

TEST(Pusb, AllTiesArePositive) {
  const std::vector<double> s(10, 0.7);
  const double t = pusb_threshold(s, 0.5);
  EXPECT_EQ(std::count_if(s.begin(), s.end(), [&](double v) { return v >= t; }), 10);
}

TEST(Pusb, CountWithinTieBand) {
  Rng rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 1 + rng.index(1000);
    const double pi = rng.uniform(0.01, 0.99);
    std::vector<double> s(m);
    // Coarse rounding injects ties.
    for (auto& v : s) v = std::round(rng.normal() * (trial % 2 ? 3.0 : 1000.0));
    const double t = pusb_threshold(s, pi);
    const auto k = static_cast<std::size_t>(std::floor(pi * m));
    const auto count = std::count_if(s.begin(), s.end(), [&](double v) { return v >= t; });
    const auto ties = std::count(s.begin(), s.end(), t);
    EXPECT_GE(static_cast<std::size_t>(count), k);
    EXPECT_LE(static_cast<std::size_t>(count), k + ties);
  }
  EXPECT_THROW(pusb_threshold(std::vector<double>{}, 0.5), ValidationError);
}

}  // namespace
}  // namespace pubench
