#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cvc/models.hpp"
#include "test_util.hpp"

using namespace cvc;

namespace {

Dataset random_regression(Eigen::Index n, Eigen::Index p, std::mt19937& rng) {
  Eigen::MatrixXd X = test::gaussian_matrix(n, p, rng);
  Eigen::VectorXd beta = test::gaussian_matrix(p, 1, rng);
  Eigen::VectorXd y = X * beta + test::gaussian_matrix(n, 1, rng) + Eigen::VectorXd::Constant(n, 1.5);
  return Dataset::from(X, y);
}

// Normal equations with an explicit intercept column, solved by LDLT.
Eigen::VectorXd normal_equations(const Dataset& d, const std::vector<int>& features) {
  Eigen::MatrixXd A(d.X.rows(), static_cast<Eigen::Index>(features.size()) + 1);
  A.col(0).setOnes();
  for (std::size_t c = 0; c < features.size(); ++c)
    A.col(static_cast<Eigen::Index>(c) + 1) = d.X.col(features[c]);
  return (A.transpose() * A).ldlt().solve(A.transpose() * d.y);
}

}  // namespace

TEST(Ols, InterceptOnlyIsMean) {
  auto rng = test::make_rng(1);
  const auto d = random_regression(20, 3, rng);
  const auto m = fit_ols_subset(d, SubsetSpec{{0}});
  EXPECT_NEAR(m.intercept, d.y.mean(), 1e-12);
  EXPECT_EQ(m.nonzeros(), 0u);
}

class OlsOracle : public ::testing::TestWithParam<int> {};

TEST_P(OlsOracle, MatchesNormalEquations) {
  auto rng = test::make_rng(static_cast<std::uint32_t>(GetParam()));
  const auto d = random_regression(40, 6, rng);
  const std::vector<int> features{0, 2, 3, 5};
  const auto m = fit_ols_subset(d, SubsetSpec::from_features(features));
  const auto ref = normal_equations(d, features);
  EXPECT_NEAR(m.intercept, ref(0), 1e-8);
  for (std::size_t c = 0; c < features.size(); ++c)
    EXPECT_NEAR(m.coefficients(features[c]), ref(static_cast<Eigen::Index>(c) + 1), 1e-8);
  EXPECT_EQ(m.coefficients(1), 0.0);
  EXPECT_EQ(m.coefficients(4), 0.0);
}

INSTANTIATE_TEST_SUITE_P(Random, OlsOracle, ::testing::Range(0, 20));

TEST(Ols, RejectsSingularAndUnderdetermined) {
  auto rng = test::make_rng(2);
  auto d = random_regression(30, 3, rng);
  d.X.col(2) = 2.0 * d.X.col(1);
  EXPECT_THROW(fit_ols_subset(d, SubsetSpec{{0, 2, 3}}), FitError);
  EXPECT_NO_THROW(fit_ols_subset(d, SubsetSpec{{0, 1}}));
  const auto small = random_regression(3, 3, rng);
  EXPECT_THROW(fit_ols_subset(small, SubsetSpec{{0, 1, 2, 3}}), FitError);
}

TEST(Ols, ConstantResponseGivesZeroSlopes) {
  auto rng = test::make_rng(3);
  auto d = random_regression(25, 3, rng);
  d.y.setConstant(4.0);
  const auto m = fit_ols_subset(d, SubsetSpec{{0, 1, 2, 3}});
  EXPECT_LT(m.coefficients.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(m.intercept, 4.0, 1e-12);
}

TEST(Lasso, SoftThreshold) {
  EXPECT_EQ(detail::soft_threshold(3.0, 1.0), 2.0);
  EXPECT_EQ(detail::soft_threshold(-3.0, 1.0), -2.0);
  EXPECT_EQ(detail::soft_threshold(0.5, 1.0), 0.0);
}

TEST(Lasso, OrthogonalDesignClosedForm) {
  // columns with mean 0, population sd 1 and orthogonal: solution is the
  // soft-thresholded correlation
  const Eigen::Index n = 8;
  Eigen::MatrixXd X(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, 0) = i < 4 ? 1 : -1;
    X(i, 1) = (i / 2) % 2 == 0 ? 1 : -1;
    X(i, 2) = i % 2 == 0 ? 1 : -1;
  }
  ASSERT_TRUE((X.transpose() * X).isApprox(n * Eigen::MatrixXd::Identity(3, 3)));
  ASSERT_TRUE(X.colwise().sum().isZero());
  Eigen::VectorXd y(n);
  y << 3, -1, 2, 0.5, 1, -2, 0, 4;
  const auto d = Dataset::from(X, y);
  const double lambda = 0.4;
  const auto m = fit_lasso(d, lambda);
  const Eigen::VectorXd yc = y.array() - y.mean();
  for (Eigen::Index j = 0; j < 3; ++j)
    EXPECT_NEAR(m.coefficients(j), detail::soft_threshold(X.col(j).dot(yc) / n, lambda), 1e-9);
  EXPECT_NEAR(m.intercept, y.mean(), 1e-12);
  EXPECT_TRUE(m.converged);
}

TEST(Lasso, ZeroAtLambdaMax) {
  auto rng = test::make_rng(4);
  const auto d = random_regression(50, 10, rng);
  const auto path = lasso_path(d, 10);
  const auto m = fit_lasso(d, path.lambda_max);
  EXPECT_EQ(m.nonzeros(), 0u);
  const auto below = fit_lasso(d, 0.99 * path.lambda_max);
  EXPECT_GE(below.nonzeros(), 1u);
}

TEST(Lasso, PathShape) {
  auto rng = test::make_rng(5);
  const auto d = random_regression(50, 10, rng);
  const auto path = lasso_path(d, 50);
  ASSERT_EQ(path.values.size(), 50u);
  EXPECT_DOUBLE_EQ(path.values.front(), path.lambda_max);
  EXPECT_NEAR(path.values.back(), 1e-3 * path.lambda_max, 1e-12 * path.lambda_max);
  for (std::size_t k = 1; k < path.values.size(); ++k) {
    EXPECT_LT(path.values[k], path.values[k - 1]);
    if (k >= 2)
      EXPECT_NEAR(std::log(path.values[k - 1] / path.values[k]),
                  std::log(path.values[k - 2] / path.values[k - 1]), 1e-10);
  }
}

TEST(Lasso, DegeneratePathThrows) {
  auto rng = test::make_rng(6);
  auto d = random_regression(20, 3, rng);
  d.y.setConstant(1.0);
  EXPECT_THROW(lasso_path(d, 10), DegenerateInputError);
}

class LassoKkt : public ::testing::TestWithParam<int> {};

TEST_P(LassoKkt, PathSolutionsSatisfyOptimality) {
  auto rng = test::make_rng(static_cast<std::uint32_t>(GetParam()) + 50);
  const auto d = random_regression(60, 30, rng);
  const auto path = lasso_path(d, 20);
  const auto fits = fit_lasso_path(d, path.values);
  for (std::size_t k = 0; k < fits.size(); ++k) {
    EXPECT_TRUE(fits[k].converged);
    EXPECT_LE(lasso_kkt_violation(d, fits[k], path.values[k]), 1e-6);
    // warm start and cold start agree
    const auto cold = fit_lasso(d, path.values[k]);
    EXPECT_NEAR(lasso_objective(d, cold, path.values[k]),
                lasso_objective(d, fits[k], path.values[k]), 1e-9);
  }
}

INSTANTIATE_TEST_SUITE_P(Random, LassoKkt, ::testing::Range(0, 5));

TEST(Lasso, ObjectiveNotBeatenByPerturbation) {
  auto rng = test::make_rng(7);
  const auto d = random_regression(40, 8, rng);
  const double lambda = 0.1;
  const auto m = fit_lasso(d, lambda);
  const double best = lasso_objective(d, m, lambda);
  std::normal_distribution<double> g(0.0, 1e-3);
  for (int t = 0; t < 50; ++t) {
    LinearModel q = m;
    for (Eigen::Index j = 0; j < q.coefficients.size(); ++j) q.coefficients(j) += g(rng);
    EXPECT_GE(lasso_objective(d, q, lambda), best - 1e-12);
  }
}

TEST(Lasso, ZeroPenaltyIsLeastSquares) {
  auto rng = test::make_rng(8);
  const auto d = random_regression(50, 5, rng);
  LassoOptions opt;
  opt.tolerance = 1e-12;
  opt.kkt_tolerance = 1e-10;
  const auto lasso = fit_lasso(d, 0.0, opt);
  const auto ols = fit_ols_subset(d, SubsetSpec{{0, 1, 2, 3, 4, 5}});
  EXPECT_LT((lasso.coefficients - ols.coefficients).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_NEAR(lasso.intercept, ols.intercept, 1e-6);
}

TEST(Lasso, PathOutputAlignedWithInput) {
  auto rng = test::make_rng(9);
  const auto d = random_regression(40, 6, rng);
  const std::vector<double> lambdas{0.01, 0.5, 0.1};
  const auto fits = fit_lasso_path(d, lambdas);
  for (std::size_t k = 0; k < lambdas.size(); ++k)
    EXPECT_DOUBLE_EQ(fits[k].spec.lambda(), lambdas[k]);
  EXPECT_LE(fits[1].nonzeros(), fits[0].nonzeros());
}

TEST(PopulationRisk, HandExamples) {
  const Eigen::Vector2d beta(1, 0), bhat(2, 1);
  EXPECT_DOUBLE_EQ(population_risk(bhat, beta, Eigen::Matrix2d::Identity(), 1.0), 3.0);
  Eigen::Matrix2d S;
  S << 1, 0.5, 0.5, 1;
  EXPECT_DOUBLE_EQ(population_risk(bhat, beta, S, 1.0), 4.0);
  LinearModel m;
  m.coefficients = bhat;
  m.intercept = 3.0;
  EXPECT_DOUBLE_EQ(population_risk(m, beta, 1.0, S, 1.0), 8.0);
  EXPECT_THROW(population_risk(Eigen::Vector3d::Zero(), beta, S, 1.0), ConfigError);
}

TEST(Ols, ResidualsOrthogonalToSelectedColumns) {
  auto rng = test::make_rng(10);
  const auto d = random_regression(50, 5, rng);
  const std::vector<int> features{1, 2, 4};
  const auto m = fit_ols_subset(d, SubsetSpec::from_features(features));
  const Eigen::VectorXd r = d.y - m.predict(d.X);
  for (int j : features)
    EXPECT_LT(std::abs(d.X.col(j).dot(r)) / (d.X.col(j).norm() * r.norm()), 1e-8);
  EXPECT_LT(std::abs(r.sum()) / (std::sqrt(50.0) * r.norm()), 1e-8);
}

TEST(Lasso, TwoPointPath) {
  auto rng = test::make_rng(11);
  const auto d = random_regression(30, 4, rng);
  const auto path = lasso_path(d, 2);
  ASSERT_EQ(path.values.size(), 2u);
  EXPECT_DOUBLE_EQ(path.values[0], path.lambda_max);
  EXPECT_NEAR(path.values[1], 1e-3 * path.lambda_max, 1e-15 * path.lambda_max);
  EXPECT_THROW(lasso_path(d, 1), ConfigError);
}

TEST(PopulationRisk, AtLeastNoiseVariance) {
  auto rng = test::make_rng(12);
  Eigen::MatrixXd A = test::gaussian_matrix(6, 6, rng);
  const Eigen::MatrixXd S = A * A.transpose() + Eigen::MatrixXd::Identity(6, 6);
  const Eigen::VectorXd beta = test::gaussian_matrix(6, 1, rng);
  EXPECT_DOUBLE_EQ(population_risk(beta, beta, S, 1.0), 1.0);
  for (int t = 0; t < 20; ++t) {
    const Eigen::VectorXd b = test::gaussian_matrix(6, 1, rng);
    EXPECT_GT(population_risk(b, beta, S, 1.0), 1.0);
  }
}
