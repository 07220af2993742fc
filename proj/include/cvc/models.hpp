#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cvc/core.hpp"
#include "cvc/error.hpp"

namespace cvc {

/// Linear predictor: intercept + x' coefficients, with coefficients on the
/// original column scale and exact zeros off the support.
struct LinearModel {
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
  CandidateModel spec;
  int iterations = 0;
  bool converged = true;

  double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    return intercept + x.dot(coefficients);
  }

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const {
    return (X * coefficients).array() + intercept;
  }

  std::size_t nonzeros() const {
    return static_cast<std::size_t>((coefficients.array() != 0.0).count());
  }
};

/// Decreasing, log-equally spaced penalty levels.
struct LambdaPath {
  std::vector<double> values;
  double lambda_max = 0.0;
  double ratio = 1e-3;
};

// ---------------------------------------------------------------------------
// Least squares on a subset
// ---------------------------------------------------------------------------

/// Condition number bound on the column-equilibrated Gram matrix.
inline constexpr double kMaxGramCondition = 1e12;

/// Least-squares fit with an intercept on the columns of the subset.
/// Columns are centered before solving, so a constant response gives exactly
/// zero slopes.
inline LinearModel fit_ols_subset(const Dataset& train,
                                  const CandidateModel& candidate) {
  const auto& spec = candidate.subset();
  const auto features = spec.features();
  const auto n = train.X.rows();
  const auto k = static_cast<Eigen::Index>(features.size());
  if (n < k + 1)
    throw FitError(candidate.id, "fewer training rows than coefficients");
  for (int f : features)
    if (f < 0 || f >= train.X.cols())
      throw FitError(candidate.id, "subset references a missing column");

  LinearModel model;
  model.spec = candidate;
  model.coefficients = Eigen::VectorXd::Zero(train.X.cols());
  const double ybar = train.y.mean();
  if (k == 0) {
    model.intercept = ybar;
    return model;
  }

  Eigen::MatrixXd A(n, k + 1);
  A.col(0).setOnes();
  for (Eigen::Index c = 0; c < k; ++c)
    A.col(c + 1) = train.X.col(features[static_cast<std::size_t>(c)]);
  for (Eigen::Index c = 0; c <= k; ++c) {
    const double norm = A.col(c).norm();
    if (norm == 0.0) throw FitError(candidate.id, "all-zero design column");
    A.col(c) /= norm;
  }
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues();
  const double smin = sv(sv.size() - 1);
  if (!(smin > 0.0) || (sv(0) / smin) * (sv(0) / smin) >= kMaxGramCondition)
    throw FitError(candidate.id, "singular or ill-conditioned Gram matrix");

  Eigen::MatrixXd Xc(n, k);
  Eigen::VectorXd xbar(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto col = train.X.col(features[static_cast<std::size_t>(c)]);
    xbar(c) = col.mean();
    Xc.col(c) = col.array() - xbar(c);
  }
  const Eigen::VectorXd yc = train.y.array() - ybar;
  const Eigen::VectorXd beta = Xc.colPivHouseholderQr().solve(yc);
  for (Eigen::Index c = 0; c < k; ++c)
    model.coefficients(features[static_cast<std::size_t>(c)]) = beta(c);
  model.intercept = ybar - xbar.dot(beta);
  return model;
}

inline LinearModel fit_ols_subset(const Dataset& train, const SubsetSpec& spec) {
  return fit_ols_subset(train, CandidateModel{0, spec});
}

// ---------------------------------------------------------------------------
// Lasso
// ---------------------------------------------------------------------------

struct LassoOptions {
  double tolerance = 1e-7;      // max coefficient change per sweep
  int max_sweeps = 100000;
  double kkt_tolerance = 1e-7;  // certificate checked before declaring convergence
};

namespace detail {

inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

/// Centered response and columns standardized to unit population sd, so that
/// the objective is (2n)^{-1} |yc - Xs b|^2 + lambda |b|_1 and each
/// coordinate update is a soft threshold.
class LassoProblem {
public:
  explicit LassoProblem(const Dataset& train)
      : n_(static_cast<double>(train.X.rows())) {
    if (train.X.rows() < 2) throw DataError("lasso needs at least two rows");
    ybar_ = train.y.mean();
    yc_ = train.y.array() - ybar_;
    means_ = train.X.colwise().mean().transpose();
    Xs_ = train.X.rowwise() - means_.transpose();
    scales_.resize(Xs_.cols());
    for (Eigen::Index j = 0; j < Xs_.cols(); ++j) {
      const double sd = std::sqrt(Xs_.col(j).squaredNorm() / n_);
      scales_(j) = sd;
      if (sd > 0.0) Xs_.col(j) /= sd;
    }
  }

  Eigen::Index p() const { return Xs_.cols(); }

  double lambda_max() const {
    double best = 0.0;
    for (Eigen::Index j = 0; j < p(); ++j)
      if (scales_(j) > 0.0)
        best = std::max(best, std::abs(Xs_.col(j).dot(yc_)) / n_);
    return best;
  }

  Eigen::VectorXd residual(const Eigen::VectorXd& b) const {
    return yc_ - Xs_ * b;
  }

  double kkt_violation(const Eigen::VectorXd& b, const Eigen::VectorXd& r,
                       double lambda) const {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < p(); ++j) {
      if (scales_(j) == 0.0) continue;
      const double g = Xs_.col(j).dot(r) / n_;
      const double v = b(j) == 0.0 ? std::max(0.0, std::abs(g) - lambda)
                                   : std::abs(g - lambda * (b(j) > 0 ? 1.0 : -1.0));
      worst = std::max(worst, v);
    }
    return worst;
  }

  double objective(const Eigen::VectorXd& b, double lambda) const {
    return residual(b).squaredNorm() / (2.0 * n_) + lambda * b.lpNorm<1>();
  }

  /// Coordinate descent from `b` (updated in place). Returns sweep count and
  /// whether both the change and the KKT criteria were met.
  std::pair<int, bool> solve(double lambda, Eigen::VectorXd& b,
                             const LassoOptions& opt) const {
    Eigen::VectorXd r = residual(b);
    int sweeps = 0;
    auto update = [&](Eigen::Index j) {
      const double old = b(j);
      const double g = Xs_.col(j).dot(r) / n_ + old;
      const double nb = soft_threshold(g, lambda);
      if (nb != old) {
        r.noalias() -= (nb - old) * Xs_.col(j);
        b(j) = nb;
      }
      return std::abs(nb - old);
    };

    std::vector<Eigen::Index> active;
    while (sweeps < opt.max_sweeps) {
      double dmax = 0.0;
      for (Eigen::Index j = 0; j < p(); ++j)
        if (scales_(j) > 0.0) dmax = std::max(dmax, update(j));
      ++sweeps;
      if (dmax < opt.tolerance) {
        if (kkt_violation(b, r, lambda) <= opt.kkt_tolerance)
          return {sweeps, true};
        continue;
      }
      active.clear();
      for (Eigen::Index j = 0; j < p(); ++j)
        if (b(j) != 0.0) active.push_back(j);
      while (sweeps < opt.max_sweeps) {
        double d = 0.0;
        for (auto j : active) d = std::max(d, update(j));
        ++sweeps;
        if (d < opt.tolerance) break;
      }
    }
    return {sweeps, false};
  }

  /// Converts standardized coefficients to an original-scale model.
  LinearModel to_model(const Eigen::VectorXd& b, double lambda, int sweeps,
                       bool converged) const {
    LinearModel m;
    m.coefficients = Eigen::VectorXd::Zero(p());
    for (Eigen::Index j = 0; j < p(); ++j)
      if (scales_(j) > 0.0 && b(j) != 0.0) m.coefficients(j) = b(j) / scales_(j);
    m.intercept = ybar_ - means_.dot(m.coefficients);
    m.spec = CandidateModel{0, LambdaSpec{lambda}};
    m.iterations = sweeps;
    m.converged = converged;
    return m;
  }

  /// Standardized coefficients of an original-scale model.
  Eigen::VectorXd standardized(const LinearModel& m) const {
    return m.coefficients.cwiseProduct(scales_);
  }

private:
  double n_;
  double ybar_ = 0.0;
  Eigen::VectorXd yc_;
  Eigen::VectorXd means_;
  Eigen::VectorXd scales_;
  Eigen::MatrixXd Xs_;
};

}  // namespace detail

/// Lasso at one penalty level, minimizing (2n)^{-1} RSS + lambda |b|_1 over
/// internally standardized columns; the intercept is unpenalized. The
/// returned coefficients are on the original column scale.
inline LinearModel fit_lasso(const Dataset& train, double lambda,
                             const LassoOptions& opt = {}) {
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be nonnegative");
  const detail::LassoProblem prob(train);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(prob.p());
  const auto [sweeps, ok] = prob.solve(lambda, b, opt);
  return prob.to_model(b, lambda, sweeps, ok);
}

/// Fits every penalty level, solving from the largest to the smallest with
/// warm starts. Output is aligned with `lambdas`.
inline std::vector<LinearModel> fit_lasso_path(const Dataset& train,
                                               std::span<const double> lambdas,
                                               const LassoOptions& opt = {}) {
  const detail::LassoProblem prob(train);
  std::vector<std::size_t> order(lambdas.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return lambdas[a] > lambdas[b];
  });
  std::vector<LinearModel> out(lambdas.size());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(prob.p());
  for (auto k : order) {
    if (!(lambdas[k] >= 0.0)) throw ConfigError("lambda must be nonnegative");
    const auto [sweeps, ok] = prob.solve(lambdas[k], b, opt);
    out[k] = prob.to_model(b, lambdas[k], sweeps, ok);
  }
  return out;
}

/// Largest KKT violation of a fitted model, on the standardized scale.
inline double lasso_kkt_violation(const Dataset& train, const LinearModel& model,
                                  double lambda) {
  const detail::LassoProblem prob(train);
  const Eigen::VectorXd b = prob.standardized(model);
  return prob.kkt_violation(b, prob.residual(b), lambda);
}

/// Lasso objective of a fitted model, on the standardized scale.
inline double lasso_objective(const Dataset& train, const LinearModel& model,
                              double lambda) {
  const detail::LassoProblem prob(train);
  return prob.objective(prob.standardized(model), lambda);
}

/// K log-spaced penalties from lambda_max = |n^{-1} Xs' yc|_inf down to
/// ratio * lambda_max.
inline LambdaPath lasso_path(const Dataset& data, int K, double ratio = 1e-3) {
  if (K < 2) throw ConfigError("path length must be at least 2");
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("path ratio must lie in (0, 1)");
  const detail::LassoProblem prob(data);
  LambdaPath path;
  path.lambda_max = prob.lambda_max();
  path.ratio = ratio;
  if (!(path.lambda_max > 0.0))
    throw DegenerateInputError("response is constant or uncorrelated with every column");
  const double step = std::log(ratio) / static_cast<double>(K - 1);
  path.values.resize(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k)
    path.values[static_cast<std::size_t>(k)] = path.lambda_max * std::exp(step * k);
  path.values.front() = path.lambda_max;
  return path;
}

// ---------------------------------------------------------------------------
// Population risk
// ---------------------------------------------------------------------------

/// Squared-error risk of beta_hat under y = x'beta + noise with Cov(x) = Sigma:
/// (beta_hat - beta)' Sigma (beta_hat - beta) + noise_var.
inline double population_risk(const Eigen::VectorXd& beta_hat,
                              const Eigen::VectorXd& beta,
                              const Eigen::MatrixXd& Sigma, double noise_var) {
  if (beta_hat.size() != beta.size() || Sigma.rows() != beta.size() ||
      Sigma.cols() != beta.size())
    throw ConfigError("dimension mismatch in population risk");
  const Eigen::VectorXd d = beta_hat - beta;
  return d.dot(Sigma * d) + noise_var;
}

/// Same, for a fitted model with an intercept when E[x] = 0.
inline double population_risk(const LinearModel& model, const Eigen::VectorXd& beta,
                              double intercept, const Eigen::MatrixXd& Sigma,
                              double noise_var) {
  const double offset = model.intercept - intercept;
  return population_risk(model.coefficients, beta, Sigma, noise_var) +
         offset * offset;
}

}  // namespace cvc
