#include <algorithm>
#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "cvc/simulate.hpp"
#include "test_util.hpp"

using namespace cvc;

TEST(Subsets, EnumerationOrder) {
  const auto c = enumerate_subsets(5);
  ASSERT_EQ(c.size(), 16u);
  EXPECT_EQ(c[0].subset().terms, std::vector<int>{0});
  EXPECT_EQ(c[1].subset().terms, (std::vector<int>{0, 1}));
  EXPECT_EQ(c[4].subset().terms, (std::vector<int>{0, 4}));
  EXPECT_EQ(c[5].subset().terms, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(c[15].subset().terms, (std::vector<int>{0, 1, 2, 3, 4}));
  std::set<std::vector<int>> distinct;
  for (const auto& m : c) distinct.insert(m.subset().terms);
  EXPECT_EQ(distinct.size(), 16u);
  EXPECT_NO_THROW(validate_candidates(c, 5));
}

TEST(Generator, MomentsMatchDesign) {
  LinearDesign design;
  design.beta = Eigen::Vector3d(1, -2, 0);
  design.intercept = 0.5;
  design.Sigma = make_sigma(SigmaKind::correlated, 3);
  const auto sim = gen_linear_data(design, 20000, 3);
  const auto& X = sim.data.X;
  const Eigen::MatrixXd Xc = X.rowwise() - X.colwise().mean();
  const Eigen::MatrixXd S = Xc.transpose() * Xc / 19999.0;
  EXPECT_LT((S - design.Sigma).cwiseAbs().maxCoeff(), 0.05);
  const Eigen::VectorXd resid = sim.data.y - X * design.beta;
  EXPECT_NEAR(resid.mean(), 0.5, 0.03);
  EXPECT_NEAR((resid.array() - resid.mean()).square().mean(), 1.0, 0.05);
}

TEST(Generator, StreamsAreReproducibleAndDistinct) {
  LinearDesign design;
  design.beta = Eigen::Vector2d(1, 1);
  design.Sigma = Eigen::Matrix2d::Identity();
  const auto a = gen_linear_data(design, 10, 5, 0);
  const auto b = gen_linear_data(design, 10, 5, 0);
  const auto c = gen_linear_data(design, 10, 5, 1);
  EXPECT_EQ(a.data.X, b.data.X);
  EXPECT_NE(a.data.X, c.data.X);
}

TEST(Generator, NoiseVariance) {
  EXPECT_EQ(noise_variance(NoiseKind::gaussian, 2.0), 4.0);
  EXPECT_EQ(noise_variance(NoiseKind::student_t3, 1.0), 3.0);
  EXPECT_EQ(noise_variance(NoiseKind::none, 1.0), 0.0);
}

TEST(Design, BetaAndSigma) {
  const auto b = make_beta(200, 5, 1, 0);
  for (Eigen::Index j = 0; j < 5; ++j) EXPECT_EQ(std::abs(b(j)), 1.0);
  EXPECT_TRUE(b.tail(190).isZero(0.0));
  const auto S = make_sigma(SigmaKind::correlated, 4);
  EXPECT_EQ(S(0, 0), 1.0);
  EXPECT_EQ(S(1, 3), 0.5);
  EXPECT_THROW(make_beta(8, 5, 1, 0), ConfigError);
}

TEST(Summaries, MedianAndQuantile) {
  EXPECT_EQ(median({3, 1, 2}), 2.0);
  EXPECT_EQ(median({4, 1, 2, 3}), 2.5);
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4, 5}, 0.25), 2.0);
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4}, 0.5), 2.5);
}

TEST(Oracle, PicksSmallestRiskLargerLambdaOnTies) {
  LambdaPath path;
  path.values = {3.0, 2.0, 1.0};
  const Eigen::Vector2d beta(1, 0);
  std::vector<LinearModel> fits(3);
  fits[0].coefficients = Eigen::Vector2d(0, 0);
  fits[1].coefficients = Eigen::Vector2d(1, 0.5);
  fits[2].coefficients = Eigen::Vector2d(1, -0.5);
  const auto I = Eigen::Matrix2d::Identity();
  EXPECT_EQ(oracle_best_lambda(path, fits, beta, 0.0, I, 1.0), 1u);
}

TEST(Sim1, SmallRunIsReproducible) {
  Sim1Config c;
  c.n = 40;
  c.reps = 4;
  c.B = 100;
  c.seed = 3;
  const auto a = run_sim1(c);
  const auto b = run_sim1(c);
  ASSERT_EQ(a.records.size(), 4u);
  EXPECT_EQ(a.true_model, 3);
  for (std::size_t r = 0; r < a.records.size(); ++r) {
    EXPECT_EQ(a.records[r].cvc_choice, b.records[r].cvc_choice);
    EXPECT_EQ(a.records[r].set_size, b.records[r].set_size);
  }
  EXPECT_EQ(enumerate_subsets(5)[static_cast<std::size_t>(a.true_model)].subset().terms,
            (std::vector<int>{0, 3}));
}

TEST(Sim1, ConfigValidation) {
  Sim1Config c;
  c.reps = 0;
  EXPECT_THROW(run_sim1(c), ConfigError);
  c = {};
  c.beta = {0, 0, 0, 4, 0};
  EXPECT_THROW(run_sim1(c), ConfigError);
  c = {};
  c.noise_scale = 3.0;
  EXPECT_THROW(run_sim1(c), ConfigError);
}

TEST(Sim2, SmallRun) {
  Sim2Config c;
  c.n = 60;
  c.p = 20;
  c.reps = 2;
  c.K = 15;
  c.B = 100;
  const auto rep = run_sim2(c);
  ASSERT_EQ(rep.records.size(), 2u);
  for (const auto& r : rep.records) {
    EXPECT_GE(r.set_size, 1u);
    EXPECT_GE(r.cv.risk, r.oracle_risk - 1e-12);
    EXPECT_GE(r.one_se.lambda, r.cv.lambda);
    EXPECT_GE(r.oracle_risk, 1.0);  // noise floor
  }
  EXPECT_GE(rep.coverage, 0.0);
  EXPECT_LE(rep.coverage, 1.0);
}

// Zero model against the fitted mean under a 50/50 split with mu = 0: plain
// validation prefers the overfit mean model a fair fraction of the time,
// while the confidence set keeps the zero model.
TEST(MeanTest, OverfitVersusConfidenceSet) {
  MeanTestConfig c;
  c.n = 100;
  c.reps = 500;
  c.seed = 17;
  const auto r = run_mean_test(c);
  EXPECT_GE(r.cv_overfit_rate, 0.1);
  EXPECT_LE(r.cv_overfit_rate, 0.5);
  EXPECT_GE(r.zero_in_set_rate, 0.9);
}

namespace {

Dataset holdout_data(std::size_t n) {
  LinearDesign design;
  design.beta = Eigen::VectorXd::Zero(8);
  design.beta(0) = 1.0;
  design.beta(3) = -0.5;
  design.Sigma = Eigen::MatrixXd::Identity(8, 8);
  return gen_linear_data(design, n, 21).data;
}

}  // namespace

TEST(Holdout, BoundaryTrainSize) {
  const auto d = holdout_data(40);
  HoldoutConfig c;
  c.train_size = 39;
  c.reps = 1;
  c.K = 10;
  c.B = 50;
  const auto rep = run_holdout(d, c);
  ASSERT_EQ(rep.records.size(), 1u);
  EXPECT_EQ(rep.records[0].test_size, 1u);
  c.train_size = 40;
  EXPECT_THROW(run_holdout(d, c), ConfigError);
}

TEST(Holdout, ReproducibleAndSummariesMatchRecords) {
  const auto d = holdout_data(80);
  HoldoutConfig c;
  c.train_size = 50;
  c.reps = 5;
  c.K = 12;
  c.B = 50;
  c.seed = 4;
  const auto a = run_holdout(d, c);
  const auto b = run_holdout(d, c);
  std::vector<double> errs;
  for (std::size_t r = 0; r < a.records.size(); ++r) {
    EXPECT_EQ(a.records[r].cvc.risk, b.records[r].cvc.risk);
    EXPECT_GE(a.records[r].cvc.lambda, a.records[r].cv.lambda);
    errs.push_back(a.records[r].cv.risk);
  }
  std::sort(errs.begin(), errs.end());
  EXPECT_DOUBLE_EQ(a.cv.median_risk, errs[2]);
  EXPECT_EQ(a.cvc.median_risk, b.cvc.median_risk);
}

TEST(Generator, DegenerateNoiseFreeMode) {
  LinearDesign design;
  design.beta = Eigen::Vector3d::Zero();
  design.Sigma = Eigen::Matrix3d::Identity();
  design.noise = NoiseKind::none;
  const auto sim = gen_linear_data(design, 50, 1);
  EXPECT_TRUE(sim.data.y.isZero(0.0));
  EXPECT_EQ(sim.noise_var, 0.0);
}

TEST(Generator, IdentityDesignIsUncorrelated) {
  LinearDesign design;
  design.beta = Eigen::Vector4d(2, 0, 0, 4);
  design.Sigma = Eigen::Matrix4d::Identity();
  const auto sim = gen_linear_data(design, 10000, 8);
  const auto& X = sim.data.X;
  const Eigen::MatrixXd Xc = X.rowwise() - X.colwise().mean();
  const Eigen::MatrixXd C = Xc.transpose() * Xc;
  for (Eigen::Index a = 0; a < 4; ++a)
    for (Eigen::Index b = a + 1; b < 4; ++b)
      EXPECT_LT(std::abs(C(a, b) / std::sqrt(C(a, a) * C(b, b))), 0.05);
  const Eigen::VectorXd e = sim.data.y - X * design.beta;
  const double var = (e.array() - e.mean()).square().sum() / 9999.0;
  EXPECT_NEAR(var, 1.0, 0.1);
}
