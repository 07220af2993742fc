#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cvc/core.hpp"
#include "cvc/engine.hpp"
#include "cvc/error.hpp"
#include "cvc/models.hpp"
#include "cvc/parallel.hpp"
#include "cvc/rng.hpp"

namespace cvc {

// ---------------------------------------------------------------------------
// Data generation
// ---------------------------------------------------------------------------

enum class NoiseKind { gaussian, student_t3, none };

inline double noise_variance(NoiseKind kind, double scale) {
  switch (kind) {
    case NoiseKind::gaussian: return scale * scale;
    case NoiseKind::student_t3: return 3.0 * scale * scale;
    case NoiseKind::none: return 0.0;
  }
  return 0.0;
}

/// y = intercept + x' beta + noise_scale * e, x ~ N(0, Sigma).
struct LinearDesign {
  Eigen::VectorXd beta;
  double intercept = 0.0;
  Eigen::MatrixXd Sigma;
  NoiseKind noise = NoiseKind::gaussian;
  double noise_scale = 1.0;
};

struct SyntheticData {
  Dataset data;
  Eigen::VectorXd beta;
  double intercept = 0.0;
  Eigen::MatrixXd Sigma;
  double noise_var = 1.0;
};

inline SyntheticData gen_linear_data(const LinearDesign& design, std::size_t n,
                                     std::uint64_t seed, std::uint64_t stream = 0) {
  const auto p = design.beta.size();
  if (design.Sigma.rows() != p || design.Sigma.cols() != p)
    throw ConfigError("covariance does not match the coefficient vector");
  const Eigen::LLT<Eigen::MatrixXd> llt(design.Sigma);
  if (llt.info() != Eigen::Success)
    throw ConfigError("covariance must be positive definite");
  const Eigen::MatrixXd Lc = llt.matrixL();

  auto rng = substream(seed, Phase::data, stream);
  std::normal_distribution<double> normal;
  std::student_t_distribution<double> student(3.0);
  const auto nn = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd Z(nn, p);
  for (Eigen::Index i = 0; i < nn; ++i)
    for (Eigen::Index j = 0; j < p; ++j) Z(i, j) = normal(rng);
  Eigen::MatrixXd X = Z * Lc.transpose();
  Eigen::VectorXd y = (X * design.beta).array() + design.intercept;
  for (Eigen::Index i = 0; i < nn; ++i) {
    double e = 0.0;
    if (design.noise == NoiseKind::gaussian) e = normal(rng);
    else if (design.noise == NoiseKind::student_t3) e = student(rng);
    y(i) += design.noise_scale * e;
  }

  SyntheticData out;
  out.data = Dataset::from(std::move(X), std::move(y));
  out.beta = design.beta;
  out.intercept = design.intercept;
  out.Sigma = design.Sigma;
  out.noise_var = noise_variance(design.noise, design.noise_scale);
  return out;
}

// ---------------------------------------------------------------------------
// Small summaries
// ---------------------------------------------------------------------------

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Linear-interpolation quantile (type 7).
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double h = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// ---------------------------------------------------------------------------
// Subset selection experiment
// ---------------------------------------------------------------------------

/// All 2^(p-1) subsets of coefficient indices that contain the intercept
/// (index 0), ordered by size, then lexicographically.
inline std::vector<CandidateModel> enumerate_subsets(int p) {
  if (p < 1 || p > 16) throw ConfigError("subset enumeration needs 1 <= p <= 16");
  std::vector<std::vector<int>> all;
  const unsigned count = 1u << static_cast<unsigned>(p - 1);
  for (unsigned mask = 0; mask < count; ++mask) {
    std::vector<int> terms{0};
    for (int k = 1; k < p; ++k)
      if (mask & (1u << static_cast<unsigned>(k - 1))) terms.push_back(k);
    all.push_back(std::move(terms));
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  std::vector<CandidateModel> out;
  for (std::size_t k = 0; k < all.size(); ++k)
    out.push_back(CandidateModel{static_cast<int>(k), SubsetSpec{all[k]}});
  return out;
}

struct Sim1Config {
  std::size_t n = 40;
  std::vector<double> beta{2.0, 0.0, 0.0, 4.0, 0.0};  // intercept first
  NoiseKind noise = NoiseKind::gaussian;
  double noise_scale = 1.0;
  int reps = 100;
  std::uint64_t seed = 1;
  int folds = 5;
  double alpha = 0.05;
  std::optional<double> alpha_prime;
  bool screen = true;
  int B = 200;
  unsigned threads = 1;

  void validate() const {
    if (beta.size() != 5) throw ConfigError("beta must have 5 entries");
    if (beta[0] == 0.0) throw ConfigError("beta must have a nonzero intercept");
    if (noise_scale != 1.0 && noise_scale != 2.0)
      throw ConfigError("noise scale must be 1 or 2");
    if (reps < 1) throw ConfigError("reps must be positive");
    if (n < static_cast<std::size_t>(2 * folds))
      throw ConfigError("sample size too small for the fold count");
  }

  CvcConfig cvc() const {
    CvcConfig c;
    c.folds = folds;
    c.alpha = alpha;
    c.alpha_prime = alpha_prime;
    c.screen = screen;
    c.B = B;
    return c;
  }
};

struct Sim1Record {
  int cv_choice = -1;
  int cvc_choice = -1;
  bool cv_correct = false;
  bool cvc_correct = false;
  std::size_t set_size = 0;
  bool true_in_set = false;
  std::optional<std::string> error;
};

struct Sim1Report {
  Sim1Config config;
  std::vector<Sim1Record> records;
  int true_model = 0;
  double cv_rate = 0.0;
  double cvc_rate = 0.0;
  double mean_set_size = 0.0;
  double median_set_size = 0.0;
  std::size_t errors = 0;
};

inline Sim1Report run_sim1(const Sim1Config& config) {
  config.validate();
  const auto candidates = enumerate_subsets(5);
  std::vector<int> truth{0};
  for (int k = 1; k < 5; ++k)
    if (config.beta[static_cast<std::size_t>(k)] != 0.0) truth.push_back(k);
  int true_model = -1;
  for (const auto& c : candidates)
    if (c.subset().terms == truth) true_model = c.id;

  LinearDesign design;
  design.beta = Eigen::Map<const Eigen::VectorXd>(config.beta.data() + 1, 4);
  design.intercept = config.beta[0];
  design.Sigma = Eigen::MatrixXd::Identity(4, 4);
  design.noise = config.noise;
  design.noise_scale = config.noise_scale;

  Sim1Report report;
  report.config = config;
  report.true_model = true_model;
  report.records.resize(static_cast<std::size_t>(config.reps));
  parallel_for(report.records.size(), config.threads, [&](std::size_t r) {
    auto& rec = report.records[r];
    const auto sim = gen_linear_data(design, config.n, config.seed, r);
    CvcConfig cc = config.cvc();
    cc.seed = substream_seed(config.seed, Phase::replicate, r);
    try {
      const auto res = cvc_run(sim.data, candidates, cc, OlsSubsetFitter{});
      rec.cv_choice = res.cv_choice;
      rec.cvc_choice = *res.parsimonious_choice;
      rec.cv_correct = rec.cv_choice == true_model;
      rec.cvc_correct = rec.cvc_choice == true_model;
      rec.set_size = res.confidence_set.size();
      rec.true_in_set = res.contains(true_model);
    } catch (const FitError& e) {
      rec.error = e.what();
    }
  });

  std::vector<double> sizes;
  for (const auto& rec : report.records) {
    if (rec.error) {
      ++report.errors;
      continue;
    }
    report.cv_rate += rec.cv_correct ? 1.0 : 0.0;
    report.cvc_rate += rec.cvc_correct ? 1.0 : 0.0;
    sizes.push_back(static_cast<double>(rec.set_size));
  }
  report.cv_rate /= static_cast<double>(config.reps);
  report.cvc_rate /= static_cast<double>(config.reps);
  if (!sizes.empty()) {
    for (double s : sizes) report.mean_set_size += s;
    report.mean_set_size /= static_cast<double>(sizes.size());
    report.median_set_size = median(sizes);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Lasso tuning experiment
// ---------------------------------------------------------------------------

enum class SigmaKind { identity, correlated };
enum class BetaKind { sparse, dense };

/// Unit diagonal; off-diagonals 0.5 in the correlated setting.
inline Eigen::MatrixXd make_sigma(SigmaKind kind, Eigen::Index p) {
  Eigen::MatrixXd S = Eigen::MatrixXd::Identity(p, p);
  if (kind == SigmaKind::correlated) {
    S.setConstant(0.5);
    S.diagonal().setOnes();
  }
  return S;
}

/// First s coordinates +-1 with random signs, next s standard Gaussian,
/// the rest zero.
inline Eigen::VectorXd make_beta(Eigen::Index p, Eigen::Index s, std::uint64_t seed,
                                 std::uint64_t stream) {
  if (2 * s > p) throw ConfigError("dimension too small for the sparsity level");
  auto rng = substream(seed, Phase::coefficients, stream);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> normal;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  for (Eigen::Index j = 0; j < s; ++j) beta(j) = coin(rng) ? 1.0 : -1.0;
  for (Eigen::Index j = s; j < 2 * s; ++j) beta(j) = normal(rng);
  return beta;
}

struct Sim2Config {
  std::size_t n = 200;
  Eigen::Index p = 200;
  SigmaKind sigma = SigmaKind::identity;
  BetaKind beta = BetaKind::sparse;
  int reps = 100;
  int K = 50;
  std::uint64_t seed = 1;
  int folds = 5;
  double alpha = 0.05;
  std::optional<double> alpha_prime;
  bool screen = true;
  int B = 200;
  unsigned threads = 1;

  Eigen::Index sparsity() const { return beta == BetaKind::sparse ? 5 : 25; }

  void validate() const {
    if (reps < 1) throw ConfigError("reps must be positive");
    if (K < 2) throw ConfigError("path length must be at least 2");
    if (2 * sparsity() > p) throw ConfigError("dimension too small for the sparsity level");
    if (n < static_cast<std::size_t>(2 * folds))
      throw ConfigError("sample size too small for the fold count");
  }

  CvcConfig cvc() const {
    CvcConfig c;
    c.folds = folds;
    c.alpha = alpha;
    c.alpha_prime = alpha_prime;
    c.screen = screen;
    c.B = B;
    return c;
  }
};

/// Grid index whose full-data fit has the smallest population risk; ties go
/// to the larger lambda.
inline std::size_t oracle_best_lambda(const LambdaPath& path,
                                      std::span<const LinearModel> fits,
                                      const Eigen::VectorXd& beta, double intercept,
                                      const Eigen::MatrixXd& Sigma, double noise_var) {
  if (fits.size() != path.values.size())
    throw ConfigError("fits are not aligned with the path");
  std::size_t best = 0;
  double best_risk = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < fits.size(); ++k) {
    const double r = population_risk(fits[k], beta, intercept, Sigma, noise_var);
    if (r < best_risk || (r == best_risk && path.values[k] > path.values[best])) {
      best = k;
      best_risk = r;
    }
  }
  return best;
}

struct MethodOutcome {
  double lambda = 0.0;
  double risk = 0.0;
  std::size_t size = 0;
};

struct Sim2Record {
  MethodOutcome cv;
  MethodOutcome cvc;
  MethodOutcome one_se;
  double oracle_lambda = 0.0;
  double oracle_risk = 0.0;
  bool covered = false;
  // Same check against the lambda whose fold fits have the smallest average
  // population risk, i.e. the quantity the cross-validated losses estimate.
  double fold_oracle_lambda = 0.0;
  bool fold_covered = false;
  std::size_t set_size = 0;
  std::size_t unconverged_fits = 0;
};

struct MethodSummary {
  double median_risk = 0.0;
  double median_size = 0.0;
};

struct Sim2Report {
  Sim2Config config;
  std::vector<Sim2Record> records;
  MethodSummary cv;
  MethodSummary cvc;
  MethodSummary one_se;
  double coverage = 0.0;
  double fold_coverage = 0.0;
  double median_set_size = 0.0;
};

namespace detail {

/// Lasso path fitter that also records the population risk of every fold fit.
/// Risk vectors are kept per call and summed in sorted order, so the total
/// does not depend on which thread fitted which fold.
struct RiskTrackingFitter {
  const SyntheticData* sim = nullptr;
  std::shared_ptr<std::mutex> lock = std::make_shared<std::mutex>();
  std::shared_ptr<std::vector<std::vector<double>>> risks =
      std::make_shared<std::vector<std::vector<double>>>();

  std::vector<LinearModel> operator()(const Dataset& train,
                                      std::span<const CandidateModel> candidates) const {
    auto models = LassoPathFitter{}(train, candidates);
    std::vector<double> r;
    r.reserve(models.size());
    for (const auto& m : models)
      r.push_back(population_risk(m, sim->beta, sim->intercept, sim->Sigma, sim->noise_var));
    const std::lock_guard<std::mutex> g(*lock);
    risks->push_back(std::move(r));
    return models;
  }

  std::vector<double> total() const {
    auto rs = *risks;
    std::sort(rs.begin(), rs.end());
    std::vector<double> sum(rs.empty() ? 0 : rs.front().size(), 0.0);
    for (const auto& r : rs)
      for (std::size_t k = 0; k < r.size(); ++k) sum[k] += r[k];
    return sum;
  }
};

}  // namespace detail

inline Sim2Record run_sim2_replicate(const Sim2Config& config, std::size_t r) {
  LinearDesign design;
  design.beta = make_beta(config.p, config.sparsity(), config.seed, r);
  design.Sigma = make_sigma(config.sigma, config.p);
  const auto sim = gen_linear_data(design, config.n, config.seed, r);
  const Dataset& data = sim.data;

  const LambdaPath path = lasso_path(data, config.K);
  const auto candidates = lambda_candidates(path.values);
  CvcConfig cc = config.cvc();
  cc.seed = substream_seed(config.seed, Phase::replicate, r);
  const FoldPlan plan = make_folds(data.n(), cc.folds, cc.seed);
  detail::RiskTrackingFitter tracker;
  tracker.sim = &sim;
  const LossMatrix L = compute_loss_matrix(data, candidates, plan, tracker);
  const CvcResult res = cvc_evaluate(L, cc, candidates);

  const auto full = fit_lasso_path(data, path.values);
  auto outcome = [&](const LinearModel& m) {
    return MethodOutcome{m.spec.lambda(),
                         population_risk(m, sim.beta, sim.intercept, sim.Sigma, sim.noise_var),
                         m.nonzeros()};
  };

  Sim2Record rec;
  rec.cv = outcome(full[static_cast<std::size_t>(res.cv_choice)]);
  rec.one_se = outcome(full[static_cast<std::size_t>(one_se_rule(L, candidates))]);
  const double lambda_cvc = path.values[static_cast<std::size_t>(*res.parsimonious_choice)];
  rec.cvc = outcome(fit_lasso(data, rescale_lambda(lambda_cvc, cc.folds)));
  rec.cvc.lambda = lambda_cvc;

  const auto oracle = oracle_best_lambda(path, full, sim.beta, sim.intercept, sim.Sigma,
                                         sim.noise_var);
  rec.oracle_lambda = path.values[oracle];
  rec.oracle_risk = population_risk(full[oracle], sim.beta, sim.intercept, sim.Sigma,
                                    sim.noise_var);
  rec.covered = res.contains(static_cast<int>(oracle));
  const auto fold_risk = tracker.total();
  std::size_t fold_best = 0;
  for (std::size_t k = 1; k < fold_risk.size(); ++k)
    if (fold_risk[k] < fold_risk[fold_best]) fold_best = k;
  rec.fold_oracle_lambda = path.values[fold_best];
  rec.fold_covered = res.contains(static_cast<int>(fold_best));
  rec.set_size = res.confidence_set.size();
  rec.unconverged_fits = L.unconverged_fits;
  return rec;
}

inline Sim2Report run_sim2(const Sim2Config& config) {
  config.validate();
  Sim2Report report;
  report.config = config;
  report.records.resize(static_cast<std::size_t>(config.reps));
  parallel_for(report.records.size(), config.threads, [&](std::size_t r) {
    report.records[r] = run_sim2_replicate(config, r);
  });

  std::vector<double> risk_cv, risk_cvc, risk_1se, size_cv, size_cvc, size_1se, sets;
  double covered = 0.0, fold_covered = 0.0;
  for (const auto& rec : report.records) {
    fold_covered += rec.fold_covered ? 1.0 : 0.0;
    risk_cv.push_back(rec.cv.risk);
    risk_cvc.push_back(rec.cvc.risk);
    risk_1se.push_back(rec.one_se.risk);
    size_cv.push_back(static_cast<double>(rec.cv.size));
    size_cvc.push_back(static_cast<double>(rec.cvc.size));
    size_1se.push_back(static_cast<double>(rec.one_se.size));
    sets.push_back(static_cast<double>(rec.set_size));
    covered += rec.covered ? 1.0 : 0.0;
  }
  report.cv = {median(risk_cv), median(size_cv)};
  report.cvc = {median(risk_cvc), median(size_cvc)};
  report.one_se = {median(risk_1se), median(size_1se)};
  report.coverage = covered / static_cast<double>(config.reps);
  report.fold_coverage = fold_covered / static_cast<double>(config.reps);
  report.median_set_size = median(sets);
  return report;
}

// ---------------------------------------------------------------------------
// Zero model versus fitted mean
// ---------------------------------------------------------------------------

/// Candidate 0 predicts 0, candidate 1 predicts the training mean.
struct ZeroOrMeanFitter {
  std::vector<LinearModel> operator()(const Dataset& train,
                                      std::span<const CandidateModel> candidates) const {
    std::vector<LinearModel> out;
    for (const auto& c : candidates) {
      LinearModel m;
      m.coefficients = Eigen::VectorXd::Zero(train.X.cols());
      m.intercept = c.id == 0 ? 0.0 : train.y.mean();
      m.spec = c;
      out.push_back(m);
    }
    return out;
  }
};

struct MeanTestConfig {
  std::size_t n = 100;
  double train_fraction = 0.5;
  double mu = 0.0;
  int reps = 500;
  std::uint64_t seed = 1;
  double alpha = 0.05;
  int B = 200;
  unsigned threads = 1;
};

struct MeanTestReport {
  double cv_overfit_rate = 0.0;    // plain validation picked the mean model
  double zero_in_set_rate = 0.0;   // confidence set kept the zero model
};

/// Y = mu + N(0,1) with an irrelevant covariate; compares the zero predictor
/// with the training mean under one train/test split.
inline MeanTestReport run_mean_test(const MeanTestConfig& config) {
  if (config.reps < 1) throw ConfigError("reps must be positive");
  const std::vector<CandidateModel> candidates{{0, SubsetSpec{{0}}}, {1, SubsetSpec{{0}}}};
  LinearDesign design;
  design.beta = Eigen::VectorXd::Zero(1);
  design.intercept = config.mu;
  design.Sigma = Eigen::MatrixXd::Identity(1, 1);

  std::vector<int> overfit(static_cast<std::size_t>(config.reps), 0);
  std::vector<int> kept(static_cast<std::size_t>(config.reps), 0);
  parallel_for(overfit.size(), config.threads, [&](std::size_t r) {
    const auto sim = gen_linear_data(design, config.n, config.seed, r);
    CvcConfig cc;
    cc.mode = SplitMode::sample_split;
    cc.train_fraction = config.train_fraction;
    cc.alpha = config.alpha;
    cc.B = config.B;
    cc.seed = substream_seed(config.seed, Phase::replicate, r);
    const auto res = cvc_run(sim.data, candidates, cc, ZeroOrMeanFitter{});
    overfit[r] = res.cv_choice == 1 ? 1 : 0;
    kept[r] = res.contains(0) ? 1 : 0;
  });
  MeanTestReport out;
  for (std::size_t r = 0; r < overfit.size(); ++r) {
    out.cv_overfit_rate += overfit[r];
    out.zero_in_set_rate += kept[r];
  }
  out.cv_overfit_rate /= static_cast<double>(config.reps);
  out.zero_in_set_rate /= static_cast<double>(config.reps);
  return out;
}

// ---------------------------------------------------------------------------
// Repeated hold-out on a fixed dataset
// ---------------------------------------------------------------------------

struct HoldoutConfig {
  std::size_t train_size = 300;
  int reps = 100;
  int K = 50;
  std::uint64_t seed = 1;
  int folds = 5;
  double alpha = 0.05;
  std::optional<double> alpha_prime;
  bool screen = true;
  int B = 200;
  unsigned threads = 1;

  void validate(std::size_t n) const {
    if (reps < 1) throw ConfigError("reps must be positive");
    if (K < 2) throw ConfigError("path length must be at least 2");
    if (train_size >= n)
      throw ConfigError("train size must be smaller than the number of rows (" +
                        std::to_string(n) + ")");
    if (train_size < static_cast<std::size_t>(2 * folds))
      throw ConfigError("train size too small for the fold count");
  }

  CvcConfig cvc() const {
    CvcConfig c;
    c.folds = folds;
    c.alpha = alpha;
    c.alpha_prime = alpha_prime;
    c.screen = screen;
    c.B = B;
    return c;
  }
};

// `risk` holds the mean squared error on the held-out rows.
struct HoldoutRecord {
  MethodOutcome cv;
  MethodOutcome cvc;
  MethodOutcome one_se;
  std::size_t set_size = 0;
  std::size_t test_size = 0;
};

struct HoldoutReport {
  HoldoutConfig config;
  std::vector<HoldoutRecord> records;
  MethodSummary cv;
  MethodSummary cvc;
  MethodSummary one_se;
};

inline double holdout_error(const LinearModel& m, const Dataset& test) {
  return (m.predict(test.X) - test.y).squaredNorm() / static_cast<double>(test.n());
}

/// Each replicate splits the rows at random, tunes the Lasso by cv, cvc and
/// the one-SE rule on the training part, refits on the whole training part
/// (cvc at the rescaled penalty) and scores the held-out rows.
inline HoldoutReport run_holdout(const Dataset& data, const HoldoutConfig& config) {
  config.validate(data.n());
  HoldoutReport report;
  report.config = config;
  report.records.resize(static_cast<std::size_t>(config.reps));
  parallel_for(report.records.size(), config.threads, [&](std::size_t r) {
    std::vector<std::size_t> perm(data.n());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    auto rng = substream(config.seed, Phase::split, r);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::size_t> train_rows(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(config.train_size));
    std::vector<std::size_t> test_rows(perm.begin() + static_cast<std::ptrdiff_t>(config.train_size), perm.end());
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());
    const Dataset train = data.rows(train_rows);
    const Dataset test = data.rows(test_rows);

    const LambdaPath path = lasso_path(train, config.K);
    const auto candidates = lambda_candidates(path.values);
    CvcConfig cc = config.cvc();
    cc.seed = substream_seed(config.seed, Phase::replicate, r);
    const FoldPlan plan = make_folds(train.n(), cc.folds, cc.seed);
    const LossMatrix L = compute_loss_matrix(train, candidates, plan, LassoPathFitter{});
    const CvcResult res = cvc_evaluate(L, cc, candidates);

    auto outcome = [&](double lambda, double refit_lambda) {
      const auto m = fit_lasso(train, refit_lambda);
      return MethodOutcome{lambda, holdout_error(m, test), m.nonzeros()};
    };
    auto& rec = report.records[r];
    const double l_cv = path.values[static_cast<std::size_t>(res.cv_choice)];
    const double l_1se = path.values[static_cast<std::size_t>(one_se_rule(L, candidates))];
    const double l_cvc = path.values[static_cast<std::size_t>(*res.parsimonious_choice)];
    rec.cv = outcome(l_cv, l_cv);
    rec.one_se = outcome(l_1se, l_1se);
    rec.cvc = outcome(l_cvc, rescale_lambda(l_cvc, cc.folds));
    rec.set_size = res.confidence_set.size();
    rec.test_size = test.n();
  });

  auto summarize = [&](auto member) {
    std::vector<double> err, size;
    for (const auto& rec : report.records) {
      err.push_back((rec.*member).risk);
      size.push_back(static_cast<double>((rec.*member).size));
    }
    return MethodSummary{median(err), median(size)};
  };
  report.cv = summarize(&HoldoutRecord::cv);
  report.cvc = summarize(&HoldoutRecord::cvc);
  report.one_se = summarize(&HoldoutRecord::one_se);
  return report;
}

}  // namespace cvc
