#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cvc/core.hpp"
#include "cvc/error.hpp"
#include "cvc/models.hpp"
#include "cvc/parallel.hpp"
#include "cvc/testing.hpp"

namespace cvc {

enum class SplitMode { v_fold, sample_split };

struct CvcConfig {
  int folds = 5;
  double alpha = 0.05;
  std::optional<double> alpha_prime;  // defaults to alpha / 10
  bool screen = true;
  int B = 200;
  std::uint64_t seed = 0;
  SplitMode mode = SplitMode::v_fold;
  double train_fraction = 0.5;  // sample-split mode only
  unsigned threads = 1;

  double screening_level() const { return alpha_prime.value_or(alpha / 10.0); }

  void validate() const {
    if (!(alpha > 0.0 && alpha < 0.5))
      throw ConfigError("alpha must lie in (0, 0.5)");
    const double ap = screening_level();
    if (!(ap > 0.0 && ap < 1.0)) throw ConfigError("alpha-prime must lie in (0, 1)");
    if (B < 1) throw ConfigError("bootstrap replicate count must be positive");
    if (mode == SplitMode::v_fold && folds < 2)
      throw ConfigError("fold count must be at least 2");
    if (mode == SplitMode::sample_split &&
        !(train_fraction > 0.0 && train_fraction < 1.0))
      throw ConfigError("train fraction must lie in (0, 1)");
  }
};

struct CvcResult {
  std::vector<PValueRecord> pvalues;
  std::vector<int> confidence_set;  // {m : p_m >= alpha}, possibly empty
  bool empty_set_fallback = false;  // set when confidence_set was empty
  int cv_choice = 0;
  std::optional<int> parsimonious_choice;
  Eigen::VectorXd loss_means;

  /// The set used for selection: the confidence set, or {cv_choice} when the
  /// confidence set came out empty.
  std::vector<int> effective_set() const {
    if (empty_set_fallback) return {cv_choice};
    return confidence_set;
  }

  bool contains(int m) const {
    return std::find(confidence_set.begin(), confidence_set.end(), m) !=
           confidence_set.end();
  }
};

// ---------------------------------------------------------------------------
// Fitters
// ---------------------------------------------------------------------------

/// Anything that fits every candidate on one training set.
template <class F>
concept FoldFitter = requires(const F& f, const Dataset& d,
                              std::span<const CandidateModel> c) {
  { f(d, c) } -> std::convertible_to<std::vector<LinearModel>>;
};

/// Least squares on each candidate's variable subset.
struct OlsSubsetFitter {
  std::vector<LinearModel> operator()(const Dataset& train,
                                      std::span<const CandidateModel> candidates) const {
    std::vector<LinearModel> out;
    out.reserve(candidates.size());
    for (const auto& c : candidates) {
      if (!c.is_subset()) throw ConfigError("OLS fitter needs subset candidates");
      out.push_back(fit_ols_subset(train, c));
    }
    return out;
  }
};

/// Lasso over the candidates' penalty levels with warm starts.
struct LassoPathFitter {
  LassoOptions options;

  std::vector<LinearModel> operator()(const Dataset& train,
                                      std::span<const CandidateModel> candidates) const {
    std::vector<double> lambdas;
    lambdas.reserve(candidates.size());
    for (const auto& c : candidates) {
      if (!c.is_lambda()) throw ConfigError("lasso fitter needs lambda candidates");
      lambdas.push_back(c.lambda());
    }
    auto out = fit_lasso_path(train, lambdas, options);
    for (std::size_t k = 0; k < out.size(); ++k) out[k].spec = candidates[k];
    return out;
  }
};

struct SquaredLoss {
  double operator()(double yhat, double y) const noexcept {
    return squared_loss(yhat, y);
  }
};

/// Candidates over a lambda grid, ids in grid order.
inline std::vector<CandidateModel> lambda_candidates(std::span<const double> grid) {
  std::vector<CandidateModel> out;
  for (std::size_t k = 0; k < grid.size(); ++k)
    out.push_back(CandidateModel{static_cast<int>(k), LambdaSpec{grid[k]}});
  return out;
}

// ---------------------------------------------------------------------------
// Loss matrix
// ---------------------------------------------------------------------------

/// Fits every candidate once per validation group on the group's complement
/// and scores the group's samples. Rows follow increasing sample index.
template <FoldFitter Fitter, class Loss = SquaredLoss>
LossMatrix compute_loss_matrix(const Dataset& data,
                               std::span<const CandidateModel> candidates,
                               const FoldPlan& plan, const Fitter& fitter,
                               const Loss& loss = {}, unsigned threads = 1) {
  if (plan.n != data.n()) throw ConfigError("fold plan does not match the data");
  if (candidates.empty()) throw ConfigError("no candidates");
  validate_candidates(candidates);

  LossMatrix L;
  L.plan = plan;
  L.groups = plan.folds;
  std::vector<std::ptrdiff_t> position(plan.n, -1);
  for (std::size_t i = 0; i < plan.n; ++i) {
    if (plan.assignment[i] < 0) continue;
    position[i] = static_cast<std::ptrdiff_t>(L.sample_index.size());
    L.sample_index.push_back(i);
    L.group.push_back(plan.assignment[i]);
  }
  const auto M = static_cast<Eigen::Index>(candidates.size());
  L.values.resize(static_cast<Eigen::Index>(L.sample_index.size()), M);
  for (const auto& c : candidates) L.candidate_ids.push_back(c.id);

  std::vector<std::size_t> unconverged(static_cast<std::size_t>(plan.folds), 0);
  parallel_for(static_cast<std::size_t>(plan.folds), threads, [&](std::size_t v) {
    const auto train_rows = plan.complement(static_cast<int>(v));
    const Dataset train = data.rows(train_rows);
    const std::vector<LinearModel> models = fitter(train, candidates);
    if (models.size() != candidates.size())
      throw ConfigError("fitter returned the wrong number of models");
    for (const auto& mdl : models)
      if (!mdl.converged) ++unconverged[v];
    for (auto i : plan.members(static_cast<int>(v))) {
      const auto r = position[i];
      const auto row = data.X.row(static_cast<Eigen::Index>(i));
      const double y = data.y(static_cast<Eigen::Index>(i));
      for (Eigen::Index m = 0; m < M; ++m)
        L.values(r, m) = loss(models[static_cast<std::size_t>(m)].predict_row(row), y);
    }
  });
  for (auto u : unconverged) L.unconverged_fits += u;
  if (!L.values.allFinite()) throw DataError("loss matrix has non-finite entries");
  return L;
}

// ---------------------------------------------------------------------------
// Selection rules
// ---------------------------------------------------------------------------

/// Argmin of the column means, ties to the smallest id.
inline int cv_select(const LossMatrix& L) {
  const Eigen::VectorXd means = L.means();
  int best = 0;
  for (Eigen::Index m = 1; m < means.size(); ++m)
    if (means(m) < means(best)) best = static_cast<int>(m);
  return best;
}

/// Smallest subset (ties to the smaller id) or largest lambda in `set`.
inline int most_parsimonious(std::span<const int> set,
                             std::span<const CandidateModel> candidates) {
  if (set.empty()) throw EmptySetError("confidence set is empty");
  int best = -1;
  for (int m : set) {
    const auto& c = candidates[static_cast<std::size_t>(m)];
    if (best < 0) {
      best = m;
      continue;
    }
    const auto& b = candidates[static_cast<std::size_t>(best)];
    if (c.is_subset() != b.is_subset())
      throw ConfigError("cannot mix subset and lambda candidates");
    bool better = false;
    if (c.is_subset()) {
      const auto cs = c.subset().size(), bs = b.subset().size();
      better = cs < bs || (cs == bs && m < best);
    } else {
      better = c.lambda() > b.lambda() || (c.lambda() == b.lambda() && m < best);
    }
    if (better) best = m;
  }
  return best;
}

inline int most_parsimonious(const CvcResult& result,
                             std::span<const CandidateModel> candidates) {
  const auto set = result.effective_set();
  return most_parsimonious(set, candidates);
}

/// Largest lambda whose mean loss is within one standard error of the
/// minimum. The standard error is the sd of the per-fold mean losses of the
/// minimizer divided by sqrt(V).
inline int one_se_rule(const LossMatrix& L,
                       std::span<const CandidateModel> candidates) {
  if (candidates.size() != L.candidates())
    throw ConfigError("candidate list does not match the loss matrix");
  for (const auto& c : candidates)
    if (!c.is_lambda()) throw ConfigError("one-SE rule needs lambda candidates");
  const int best = cv_select(L);
  const Eigen::VectorXd means = L.means();

  const auto G = static_cast<Eigen::Index>(L.groups);
  Eigen::VectorXd fold_mean = Eigen::VectorXd::Zero(G);
  Eigen::VectorXd count = Eigen::VectorXd::Zero(G);
  for (std::size_t i = 0; i < L.rows(); ++i) {
    fold_mean(L.group[i]) += L.values(static_cast<Eigen::Index>(i), best);
    count(L.group[i]) += 1.0;
  }
  fold_mean = fold_mean.cwiseQuotient(count);
  double se = 0.0;
  if (G > 1) {
    const double mu = fold_mean.mean();
    const double sd = std::sqrt((fold_mean.array() - mu).square().sum() /
                                static_cast<double>(G - 1));
    se = sd / std::sqrt(static_cast<double>(G));
  }
  const double band = means(best) + se;

  int pick = best;
  for (std::size_t m = 0; m < candidates.size(); ++m) {
    if (means(static_cast<Eigen::Index>(m)) > band) continue;
    const double lm = candidates[m].lambda();
    const double lp = candidates[static_cast<std::size_t>(pick)].lambda();
    if (lm > lp) pick = static_cast<int>(m);
  }
  return pick;
}

/// Penalty for the final full-data fit after V-fold tuning: sqrt(1 - 1/V)
/// times the tuned value.
inline double rescale_lambda(double lambda_hat, int V) {
  if (!(lambda_hat >= 0.0)) throw ConfigError("lambda must be nonnegative");
  if (V < 2) throw ConfigError("fold count must be at least 2");
  return std::sqrt(1.0 - 1.0 / static_cast<double>(V)) * lambda_hat;
}

// ---------------------------------------------------------------------------
// CVC
// ---------------------------------------------------------------------------

/// p-values, confidence set and selections from a finished loss matrix.
///
/// `stream_keys`, when given, replaces each candidate id as the bootstrap
/// substream key (used to compare relabeled problems).
inline CvcResult cvc_evaluate(const LossMatrix& L, const CvcConfig& config,
                              std::span<const CandidateModel> candidates = {},
                              std::span<const std::uint64_t> stream_keys = {}) {
  config.validate();
  const auto M = L.candidates();
  if (M == 0) throw ConfigError("no candidates");
  if (!candidates.empty() && candidates.size() != M)
    throw ConfigError("candidate list does not match the loss matrix");
  if (!stream_keys.empty() && stream_keys.size() != M)
    throw ConfigError("stream keys do not match the loss matrix");

  CvcResult res;
  res.loss_means = L.means();
  res.cv_choice = cv_select(L);
  res.pvalues.resize(M);
  if (M == 1) {
    res.pvalues[0].focal = 0;
    res.pvalues[0].t_stat = -std::numeric_limits<double>::infinity();
    res.pvalues[0].p_value = 1.0;
    res.pvalues[0].B = config.B;
    res.pvalues[0].seed = config.seed;
    res.pvalues[0].contrast = Contrast::no_contrast;
    res.confidence_set = {0};
  } else {
    parallel_for(M, config.threads, [&](std::size_t m) {
      const DiffStats d = diff_stats(L, static_cast<int>(m));
      const ScreenSet s = config.screen
                              ? inequality_screen(d, config.screening_level(), M, L.rows())
                              : keep_all(d);
      std::optional<std::uint64_t> key;
      if (!stream_keys.empty()) key = stream_keys[m];
      res.pvalues[m] = multiplier_bootstrap(d, s, config.B, config.seed, key);
    });
    for (std::size_t m = 0; m < M; ++m)
      if (res.pvalues[m].p_value >= config.alpha)
        res.confidence_set.push_back(static_cast<int>(m));
  }
  res.empty_set_fallback = res.confidence_set.empty();
  if (!candidates.empty())
    res.parsimonious_choice = most_parsimonious(res, candidates);
  return res;
}

/// Fold plan implied by a configuration.
inline FoldPlan plan_for(const CvcConfig& config, std::size_t n) {
  if (config.mode == SplitMode::v_fold) return make_folds(n, config.folds, config.seed);
  const auto n_train = static_cast<std::size_t>(
      std::llround(config.train_fraction * static_cast<double>(n)));
  return make_split(n, n - std::min(n_train, n), config.seed);
}

/// Full pipeline: folds, loss matrix, p-values, confidence set, selections.
template <FoldFitter Fitter, class Loss = SquaredLoss>
CvcResult cvc_run(const Dataset& data, std::span<const CandidateModel> candidates,
                  const CvcConfig& config, const Fitter& fitter,
                  const Loss& loss = {}) {
  config.validate();
  const FoldPlan plan = plan_for(config, data.n());
  const LossMatrix L =
      compute_loss_matrix(data, candidates, plan, fitter, loss, config.threads);
  return cvc_evaluate(L, config, candidates);
}

}  // namespace cvc
