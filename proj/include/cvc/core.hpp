#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "cvc/error.hpp"
#include "cvc/rng.hpp"

namespace cvc {

// ---------------------------------------------------------------------------
// Candidates
// ---------------------------------------------------------------------------

/// A variable subset J_m in coefficient space: index 0 is the intercept and
/// index k >= 1 is column k-1 of the design. The intercept is always present.
struct SubsetSpec {
  std::vector<int> terms;

  /// Design columns used by the subset (terms without the intercept).
  std::vector<int> features() const {
    std::vector<int> out;
    for (int t : terms)
      if (t > 0) out.push_back(t - 1);
    return out;
  }

  std::size_t size() const noexcept { return terms.size(); }

  /// Builds a spec from 0-based design columns; the intercept is added.
  static SubsetSpec from_features(std::vector<int> columns) {
    SubsetSpec s;
    s.terms.push_back(0);
    std::sort(columns.begin(), columns.end());
    for (int c : columns) s.terms.push_back(c + 1);
    return s;
  }
};

/// A penalty level for a regularized fit.
struct LambdaSpec {
  double value = 0.0;
};

struct CandidateModel {
  int id = 0;
  std::variant<SubsetSpec, LambdaSpec> spec;

  bool is_subset() const noexcept {
    return std::holds_alternative<SubsetSpec>(spec);
  }
  bool is_lambda() const noexcept {
    return std::holds_alternative<LambdaSpec>(spec);
  }
  const SubsetSpec& subset() const { return std::get<SubsetSpec>(spec); }
  double lambda() const { return std::get<LambdaSpec>(spec).value; }
};

/// Checks ids are 0..M-1 in order and every spec is well formed.
/// `num_terms` bounds subset indices (design columns + 1); 0 skips that check.
inline void validate_candidates(std::span<const CandidateModel> candidates,
                                std::size_t num_terms = 0) {
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const auto& c = candidates[k];
    if (c.id != static_cast<int>(k))
      throw ConfigError("candidate ids must be contiguous from 0");
    if (c.is_subset()) {
      const auto& t = c.subset().terms;
      if (t.empty() || t.front() != 0)
        throw ConfigError("subset candidate " + std::to_string(c.id) +
                          " must include the intercept (index 0)");
      for (std::size_t i = 1; i < t.size(); ++i)
        if (t[i] <= t[i - 1])
          throw ConfigError("subset candidate " + std::to_string(c.id) +
                            " has unsorted or repeated indices");
      if (num_terms != 0 && static_cast<std::size_t>(t.back()) >= num_terms)
        throw ConfigError("subset candidate " + std::to_string(c.id) +
                          " references a missing column");
    } else if (!(c.lambda() >= 0.0) || !std::isfinite(c.lambda())) {
      throw ConfigError("lambda candidate " + std::to_string(c.id) +
                        " must be a finite nonnegative value");
    }
  }
}

// ---------------------------------------------------------------------------
// Folds
// ---------------------------------------------------------------------------

/// Assignment of samples to validation groups.
///
/// V-fold mode: every sample belongs to one of `folds` groups. Sample-split
/// mode: `folds == 1`, group 0 is the test set and training-only samples carry
/// the id -1. In both modes the model scored on group v is fitted on every
/// sample whose id differs from v.
struct FoldPlan {
  std::size_t n = 0;
  int folds = 0;
  std::vector<int> assignment;
  std::uint64_t seed = 0;
  bool sample_split = false;

  std::vector<std::size_t> members(int v) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i)
      if (assignment[i] == v) out.push_back(i);
    return out;
  }

  std::vector<std::size_t> complement(int v) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i)
      if (assignment[i] != v) out.push_back(i);
    return out;
  }

  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> out(static_cast<std::size_t>(folds), 0);
    for (int a : assignment)
      if (a >= 0) ++out[static_cast<std::size_t>(a)];
    return out;
  }
};

/// Seeded balanced partition of n samples into V folds. After a uniform
/// shuffle the first (n mod V) folds receive one extra sample.
inline FoldPlan make_folds(std::size_t n, int V, std::uint64_t seed) {
  if (V < 2) throw ConfigError("fold count must be at least 2");
  if (n < static_cast<std::size_t>(V))
    throw ConfigError("sample count " + std::to_string(n) +
                      " is smaller than the fold count " + std::to_string(V));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  auto rng = substream(seed, Phase::folds);
  std::shuffle(perm.begin(), perm.end(), rng);

  FoldPlan plan;
  plan.n = n;
  plan.folds = V;
  plan.seed = seed;
  plan.assignment.assign(n, 0);
  const std::size_t base = n / static_cast<std::size_t>(V);
  const std::size_t extra = n % static_cast<std::size_t>(V);
  std::size_t pos = 0;
  for (std::size_t v = 0; v < static_cast<std::size_t>(V); ++v) {
    const std::size_t size = base + (v < extra ? 1 : 0);
    for (std::size_t k = 0; k < size; ++k)
      plan.assignment[perm[pos++]] = static_cast<int>(v);
  }
  return plan;
}

/// Seeded single train/test split with `n_test` test samples.
inline FoldPlan make_split(std::size_t n, std::size_t n_test,
                           std::uint64_t seed) {
  if (n_test < 2 || n_test >= n)
    throw ConfigError("test set size must be in [2, n-1]");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  auto rng = substream(seed, Phase::split);
  std::shuffle(perm.begin(), perm.end(), rng);

  FoldPlan plan;
  plan.n = n;
  plan.folds = 1;
  plan.seed = seed;
  plan.sample_split = true;
  plan.assignment.assign(n, -1);
  for (std::size_t k = 0; k < n_test; ++k) plan.assignment[perm[k]] = 0;
  return plan;
}

// ---------------------------------------------------------------------------
// Data
// ---------------------------------------------------------------------------

struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  bool standardized = false;
  Eigen::VectorXd column_means;
  Eigen::VectorXd column_scales;
  std::vector<std::string> feature_names;
  std::string response_name;

  std::size_t n() const noexcept { return static_cast<std::size_t>(X.rows()); }
  std::size_t p() const noexcept { return static_cast<std::size_t>(X.cols()); }

  static Dataset from(Eigen::MatrixXd X, Eigen::VectorXd y) {
    if (X.rows() != y.size())
      throw DataError("design has " + std::to_string(X.rows()) +
                      " rows but the response has " +
                      std::to_string(y.size()));
    if (!X.allFinite() || !y.allFinite())
      throw DataError("data contain non-finite values");
    Dataset d;
    d.column_means = Eigen::VectorXd::Zero(X.cols());
    d.column_scales = Eigen::VectorXd::Ones(X.cols());
    d.X = std::move(X);
    d.y = std::move(y);
    return d;
  }

  Dataset rows(std::span<const std::size_t> index) const {
    Dataset d;
    d.X.resize(static_cast<Eigen::Index>(index.size()), X.cols());
    d.y.resize(static_cast<Eigen::Index>(index.size()));
    for (std::size_t k = 0; k < index.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(index[k]);
      d.X.row(static_cast<Eigen::Index>(k)) = X.row(i);
      d.y(static_cast<Eigen::Index>(k)) = y(i);
    }
    d.standardized = standardized;
    d.column_means = column_means;
    d.column_scales = column_scales;
    d.feature_names = feature_names;
    d.response_name = response_name;
    return d;
  }
};

/// Centers every column and scales it to unit sample sd (divisor n-1).
/// Constant columns are centered and keep scale 1.
inline Dataset standardize(Dataset d) {
  const auto n = d.X.rows();
  if (n < 2) throw DataError("standardization needs at least two rows");
  d.column_means = d.X.colwise().mean().transpose();
  d.column_scales.resize(d.X.cols());
  for (Eigen::Index j = 0; j < d.X.cols(); ++j) {
    d.X.col(j).array() -= d.column_means(j);
    const double sd = std::sqrt(d.X.col(j).squaredNorm() /
                                static_cast<double>(n - 1));
    d.column_scales(j) = sd > 0.0 ? sd : 1.0;
    d.X.col(j) /= d.column_scales(j);
  }
  d.standardized = true;
  return d;
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

constexpr double squared_loss(double yhat, double y) noexcept {
  return (yhat - y) * (yhat - y);
}

/// Cross-validated per-sample losses. Row r holds the losses of every
/// candidate at validation sample `sample_index[r]`, each produced by the fit
/// that excluded that sample's group.
struct LossMatrix {
  Eigen::MatrixXd values;
  std::vector<int> group;
  int groups = 1;
  std::vector<int> candidate_ids;
  std::vector<std::size_t> sample_index;
  FoldPlan plan;
  std::size_t unconverged_fits = 0;

  std::size_t rows() const noexcept {
    return static_cast<std::size_t>(values.rows());
  }
  std::size_t candidates() const noexcept {
    return static_cast<std::size_t>(values.cols());
  }

  /// Builds and validates a loss matrix from raw values and group labels.
  static LossMatrix from_values(Eigen::MatrixXd values, std::vector<int> group,
                                int groups) {
    if (groups < 1) throw ConfigError("need at least one group");
    if (values.rows() != static_cast<Eigen::Index>(group.size()))
      throw DataError("group labels do not match the loss matrix rows");
    if (!values.allFinite()) throw DataError("loss matrix has non-finite entries");
    std::vector<std::size_t> count(static_cast<std::size_t>(groups), 0);
    for (int g : group) {
      if (g < 0 || g >= groups) throw DataError("group label out of range");
      ++count[static_cast<std::size_t>(g)];
    }
    for (auto c : count)
      if (c == 0) throw DataError("every group needs at least one row");
    LossMatrix L;
    L.candidate_ids.resize(static_cast<std::size_t>(values.cols()));
    std::iota(L.candidate_ids.begin(), L.candidate_ids.end(), 0);
    L.sample_index.resize(group.size());
    std::iota(L.sample_index.begin(), L.sample_index.end(), std::size_t{0});
    L.values = std::move(values);
    L.group = std::move(group);
    L.groups = groups;
    return L;
  }

  /// Column means, i.e. the cross-validated risk estimate of each candidate.
  Eigen::VectorXd means() const { return values.colwise().mean().transpose(); }
};

// ---------------------------------------------------------------------------
// Loss differences
// ---------------------------------------------------------------------------

/// Loss differences of a focal candidate against every competitor, with
/// group-wise centering. Column c refers to candidate `competitors[c]`.
struct DiffStats {
  int focal = 0;
  std::vector<int> competitors;
  Eigen::MatrixXd xi;
  Eigen::MatrixXd fold_means;
  Eigen::VectorXd overall_means;
  Eigen::VectorXd scales;
  Eigen::MatrixXd centered;
  std::vector<bool> degenerate;
  std::vector<int> group;
  int groups = 1;

  std::size_t n() const noexcept { return static_cast<std::size_t>(xi.rows()); }
  std::size_t width() const noexcept { return competitors.size(); }

  /// sqrt(n) * overall mean / scale for column c. Degenerate columns map to
  /// +inf, -inf or 0 according to the sign of their mean.
  double ratio(std::size_t c) const {
    const auto k = static_cast<Eigen::Index>(c);
    if (degenerate[c]) {
      if (overall_means(k) > mean_tolerance(c))
        return std::numeric_limits<double>::infinity();
      if (overall_means(k) < -mean_tolerance(c))
        return -std::numeric_limits<double>::infinity();
      return 0.0;
    }
    return std::sqrt(static_cast<double>(n())) * overall_means(k) / scales(k);
  }

  double mean_tolerance(std::size_t c) const {
    return 64.0 * std::numeric_limits<double>::epsilon() *
           xi.col(static_cast<Eigen::Index>(c)).cwiseAbs().maxCoeff();
  }
};

/// Differences xi(i, j) = L(i, m) - L(i, j), their group means, group-centered
/// residuals, the average of group means and the sample sd (divisor n-1) of
/// the centered residuals. With a single group this is the plain sample-split
/// construction.
inline DiffStats diff_stats(const LossMatrix& L, int m) {
  const auto M = static_cast<int>(L.candidates());
  if (M < 2) throw NoCompetitorsError("at least two candidates are required");
  if (m < 0 || m >= M) throw ConfigError("focal candidate id out of range");
  const auto n = static_cast<Eigen::Index>(L.rows());
  if (n < 2) throw DataError("at least two validation rows are required");

  DiffStats d;
  d.focal = m;
  d.group = L.group;
  d.groups = L.groups;
  for (int j = 0; j < M; ++j)
    if (j != m) d.competitors.push_back(j);
  const auto k = static_cast<Eigen::Index>(d.competitors.size());

  d.xi.resize(n, k);
  for (Eigen::Index c = 0; c < k; ++c)
    d.xi.col(c) = L.values.col(m) - L.values.col(d.competitors[static_cast<std::size_t>(c)]);

  const auto G = static_cast<Eigen::Index>(L.groups);
  d.fold_means = Eigen::MatrixXd::Zero(G, k);
  Eigen::VectorXd count = Eigen::VectorXd::Zero(G);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto g = L.group[static_cast<std::size_t>(i)];
    d.fold_means.row(g) += d.xi.row(i);
    count(g) += 1.0;
  }
  for (Eigen::Index g = 0; g < G; ++g) d.fold_means.row(g) /= count(g);

  d.centered.resize(n, k);
  for (Eigen::Index i = 0; i < n; ++i)
    d.centered.row(i) = d.xi.row(i) - d.fold_means.row(L.group[static_cast<std::size_t>(i)]);

  d.overall_means = d.fold_means.colwise().mean().transpose();
  d.scales.resize(k);
  d.degenerate.assign(static_cast<std::size_t>(k), false);
  for (Eigen::Index c = 0; c < k; ++c) {
    d.scales(c) = std::sqrt(d.centered.col(c).squaredNorm() /
                            static_cast<double>(n - 1));
    const double ref = d.xi.col(c).cwiseAbs().maxCoeff();
    d.degenerate[static_cast<std::size_t>(c)] =
        d.scales(c) <= 64.0 * std::numeric_limits<double>::epsilon() * ref;
  }
  return d;
}

}  // namespace cvc
