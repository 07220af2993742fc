#include <algorithm>
#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "cvc/core.hpp"
#include "test_util.hpp"

using namespace cvc;

TEST(MakeFolds, EqualFoldsWhenDivisible) {
  const auto plan = make_folds(10, 5, 1);
  for (auto s : plan.sizes()) EXPECT_EQ(s, 2u);
}

TEST(MakeFolds, SizesDifferByAtMostOne) {
  auto sizes = make_folds(11, 5, 1).sizes();
  std::sort(sizes.begin(), sizes.end());
  EXPECT_EQ(sizes, (std::vector<std::size_t>{2, 2, 2, 2, 3}));
}

TEST(MakeFolds, Deterministic) {
  EXPECT_EQ(make_folds(10, 5, 1).assignment, make_folds(10, 5, 1).assignment);
  EXPECT_NE(make_folds(50, 5, 1).assignment, make_folds(50, 5, 2).assignment);
}

TEST(MakeFolds, RejectsTooFewSamples) {
  EXPECT_THROW(make_folds(3, 5, 1), ConfigError);
  EXPECT_THROW(make_folds(10, 1, 1), ConfigError);
}

TEST(MakeFolds, PartitionProperty) {
  for (std::size_t n = 2; n < 60; n += 7) {
    for (int V = 2; V <= static_cast<int>(std::min<std::size_t>(n, 10)); ++V) {
      const auto plan = make_folds(n, V, n * 31 + static_cast<std::size_t>(V));
      std::set<std::size_t> seen;
      for (int v = 0; v < V; ++v)
        for (auto i : plan.members(v)) EXPECT_TRUE(seen.insert(i).second);
      EXPECT_EQ(seen.size(), n);
      const auto sizes = plan.sizes();
      const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
      EXPECT_LE(*hi - *lo, 1u);
    }
  }
}

TEST(MakeSplit, TestAndTrainPartition) {
  const auto plan = make_split(100, 50, 3);
  EXPECT_TRUE(plan.sample_split);
  EXPECT_EQ(plan.members(0).size(), 50u);
  EXPECT_EQ(plan.complement(0).size(), 50u);
  EXPECT_THROW(make_split(10, 10, 1), ConfigError);
}

TEST(SquaredLoss, Values) {
  EXPECT_EQ(squared_loss(3, 3), 0.0);
  EXPECT_EQ(squared_loss(1, 3), 4.0);
  EXPECT_EQ(squared_loss(-1, 2), 9.0);
}

// Hand computation: xi = (1,3,2,6), group means (2,4), overall 3,
// centered (-1,1,-2,2), sd = sqrt(10/3).
TEST(DiffStats, WorkedExample) {
  Eigen::MatrixXd values(4, 2);
  values << 1, 0, 3, 0, 2, 0, 6, 0;
  const auto L = LossMatrix::from_values(values, {0, 0, 1, 1}, 2);
  const auto d = diff_stats(L, 0);
  ASSERT_EQ(d.competitors, std::vector<int>{1});
  EXPECT_EQ(d.xi.col(0), Eigen::Vector4d(1, 3, 2, 6));
  EXPECT_DOUBLE_EQ(d.fold_means(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(d.fold_means(1, 0), 4.0);
  EXPECT_DOUBLE_EQ(d.overall_means(0), 3.0);
  EXPECT_EQ(d.centered.col(0), Eigen::Vector4d(-1, 1, -2, 2));
  EXPECT_NEAR(d.scales(0), std::sqrt(10.0 / 3.0), 1e-14);
  EXPECT_NEAR(d.scales(0), 1.8257, 1e-4);
  EXPECT_FALSE(d.degenerate[0]);
}

TEST(DiffStats, IdenticalColumnsAreDegenerate) {
  auto rng = test::make_rng(5);
  Eigen::MatrixXd values = test::random_matrix(12, 3, rng);
  values.col(2) = values.col(0);
  const auto d = diff_stats(LossMatrix::from_values(values, test::round_robin_groups(12, 3), 3), 0);
  EXPECT_TRUE(d.xi.col(1).isZero(0.0));
  EXPECT_EQ(d.overall_means(1), 0.0);
  EXPECT_EQ(d.scales(1), 0.0);
  EXPECT_TRUE(d.degenerate[1]);
  EXPECT_FALSE(d.degenerate[0]);
}

TEST(DiffStats, ConstantRowShiftCancels) {
  Eigen::MatrixXd values(4, 2);
  values << 1, 0, 3, 0, 2, 0, 6, 0;
  Eigen::MatrixXd shifted = values;
  shifted.row(2).array() += 7.0;
  const auto a = diff_stats(LossMatrix::from_values(values, {0, 0, 1, 1}, 2), 0);
  const auto b = diff_stats(LossMatrix::from_values(shifted, {0, 0, 1, 1}, 2), 0);
  EXPECT_TRUE(a.xi.isApprox(b.xi, 1e-12));
  EXPECT_TRUE(a.centered.isApprox(b.centered, 1e-12));
  EXPECT_DOUBLE_EQ(a.scales(0), b.scales(0));
}

TEST(DiffStats, SingleCandidateHasNoCompetitors) {
  Eigen::MatrixXd values = Eigen::MatrixXd::Ones(4, 1);
  const auto L = LossMatrix::from_values(values, {0, 0, 1, 1}, 2);
  EXPECT_THROW(diff_stats(L, 0), NoCompetitorsError);
}

// Invariants on random loss matrices.
class DiffStatsProperty : public ::testing::TestWithParam<int> {};

TEST_P(DiffStatsProperty, ShiftScaleAndCentering) {
  auto rng = test::make_rng(static_cast<std::uint32_t>(GetParam()));
  std::uniform_int_distribution<int> pick_n(10, 80), pick_m(2, 8), pick_g(1, 5);
  const auto n = static_cast<std::size_t>(pick_n(rng));
  const auto M = static_cast<std::size_t>(pick_m(rng));
  const int G = pick_g(rng);
  const auto L = test::random_losses(n, M, G, rng);
  const int m = static_cast<int>(rng() % M);
  const auto base = diff_stats(L, m);

  // per-sample shift
  Eigen::VectorXd c = test::random_matrix(static_cast<Eigen::Index>(n), 1, rng, -10, 10);
  Eigen::MatrixXd shifted = L.values.colwise() + c;
  const auto s = diff_stats(LossMatrix::from_values(shifted, L.group, G), m);
  EXPECT_LT((s.xi - base.xi).cwiseAbs().maxCoeff(), 1e-12 * 20);
  EXPECT_LT((s.overall_means - base.overall_means).cwiseAbs().maxCoeff(), 1e-12 * 20);
  EXPECT_LT((s.scales - base.scales).cwiseAbs().maxCoeff(), 1e-12 * 20);

  // scale by lambda
  const double lambda = std::uniform_real_distribution<double>(0.1, 10.0)(rng);
  const auto z = diff_stats(LossMatrix::from_values(lambda * L.values, L.group, G), m);
  EXPECT_TRUE(z.xi.isApprox(lambda * base.xi, 1e-12));
  EXPECT_TRUE(z.fold_means.isApprox(lambda * base.fold_means, 1e-12));
  EXPECT_TRUE(z.scales.isApprox(lambda * base.scales, 1e-12));
  EXPECT_TRUE(z.centered.isApprox(lambda * base.centered, 1e-12));
  for (std::size_t k = 0; k < base.width(); ++k)
    EXPECT_NEAR(z.ratio(k), base.ratio(k), 1e-12 * std::max(1.0, std::abs(base.ratio(k))));

  // centering, and overall mean = mean of fold means
  for (int g = 0; g < G; ++g) {
    for (std::size_t k = 0; k < base.width(); ++k) {
      double sum = 0.0, cnt = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (base.group[i] == g) {
          sum += base.centered(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
          cnt += 1.0;
        }
      const double colscale = base.xi.col(static_cast<Eigen::Index>(k)).cwiseAbs().maxCoeff();
      EXPECT_LE(std::abs(sum / cnt), 1e-10 * std::max(colscale, 1e-300));
    }
  }
  EXPECT_TRUE(base.overall_means.isApprox(base.fold_means.colwise().mean().transpose(), 1e-14));
  EXPECT_TRUE((base.scales.array() >= 0.0).all());
}

INSTANTIATE_TEST_SUITE_P(Random, DiffStatsProperty, ::testing::Range(0, 100));

TEST(Standardize, MeanZeroSdOne) {
  auto rng = test::make_rng(9);
  Eigen::MatrixXd X = test::random_matrix(30, 4, rng, -5, 20);
  X.col(3).setConstant(2.0);
  auto d = standardize(Dataset::from(X, Eigen::VectorXd::Zero(30)));
  for (Eigen::Index j = 0; j < 3; ++j) {
    EXPECT_NEAR(d.X.col(j).mean(), 0.0, 1e-8);
    EXPECT_NEAR(std::sqrt(d.X.col(j).squaredNorm() / 29.0), 1.0, 1e-8);
  }
  EXPECT_TRUE(d.X.col(3).isZero(0.0));
  EXPECT_EQ(d.column_scales(3), 1.0);
}

TEST(Dataset, RejectsMismatchAndNonFinite) {
  EXPECT_THROW(Dataset::from(Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(2)), DataError);
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(3, 2);
  X(1, 1) = std::nan("");
  EXPECT_THROW(Dataset::from(X, Eigen::VectorXd::Zero(3)), DataError);
}

TEST(Candidates, Validation) {
  std::vector<CandidateModel> ok{{0, SubsetSpec{{0, 2}}}, {1, LambdaSpec{0.5}}};
  EXPECT_NO_THROW(validate_candidates(ok, 3));
  std::vector<CandidateModel> gap{{0, SubsetSpec{{0}}}, {2, SubsetSpec{{0}}}};
  EXPECT_THROW(validate_candidates(gap), ConfigError);
  std::vector<CandidateModel> no_icpt{{0, SubsetSpec{{1}}}};
  EXPECT_THROW(validate_candidates(no_icpt), ConfigError);
  std::vector<CandidateModel> unsorted{{0, SubsetSpec{{0, 3, 2}}}};
  EXPECT_THROW(validate_candidates(unsorted), ConfigError);
  std::vector<CandidateModel> neg{{0, LambdaSpec{-1.0}}};
  EXPECT_THROW(validate_candidates(neg), ConfigError);
  EXPECT_EQ(SubsetSpec::from_features({2, 0}).terms, (std::vector<int>{0, 1, 3}));
}
