#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>

#include "cvc/core.hpp"
#include "cvc/error.hpp"
#include "cvc/rng.hpp"

namespace cvc {

/// Competitors retained for the max statistic of one focal candidate.
struct ScreenSet {
  int focal = 0;
  std::vector<int> kept;
  double threshold = -std::numeric_limits<double>::infinity();
  bool skipped = true;
};

/// How the statistic of a p-value record came about.
enum class Contrast {
  regular,      // finite max over at least one competitor
  no_contrast,  // nothing left to compare against; p = 1
  dominated,    // a zero-variance competitor is uniformly better; p = 0
};

struct PValueRecord {
  int focal = 0;
  double t_stat = 0.0;
  double p_value = 1.0;
  int B = 0;
  ScreenSet screen;
  std::uint64_t seed = 0;
  Contrast contrast = Contrast::regular;
};

/// Keeps every competitor.
inline ScreenSet keep_all(const DiffStats& d) {
  ScreenSet s;
  s.focal = d.focal;
  s.kept = d.competitors;
  s.skipped = true;
  return s;
}

/// Standard normal quantile.
inline double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

/// Inequality selection: drops competitors whose studentized mean difference
/// is far enough below zero that the focal candidate is obviously better.
/// Keeps everything when z^2 >= n, where the threshold is undefined.
inline ScreenSet inequality_screen(const DiffStats& d, double alpha_prime,
                                   std::size_t M, std::size_t n) {
  if (!(alpha_prime > 0.0 && alpha_prime < 1.0))
    throw ConfigError("screening level must lie in (0, 1)");
  if (M < 2) throw NoCompetitorsError("screening needs at least two candidates");
  const double z = normal_quantile(1.0 - alpha_prime / static_cast<double>(M - 1));
  const double nn = static_cast<double>(n);
  if (z * z >= nn) return keep_all(d);

  ScreenSet s;
  s.focal = d.focal;
  s.skipped = false;
  s.threshold = -2.0 * z / std::sqrt(1.0 - z * z / nn);
  for (std::size_t c = 0; c < d.width(); ++c)
    if (d.ratio(c) >= s.threshold) s.kept.push_back(d.competitors[c]);
  return s;
}

namespace detail {

inline std::size_t column_of(const DiffStats& d, int competitor) {
  const auto it = std::lower_bound(d.competitors.begin(), d.competitors.end(),
                                   competitor);
  if (it == d.competitors.end() || *it != competitor)
    throw ConfigError("screen refers to an unknown competitor");
  return static_cast<std::size_t>(it - d.competitors.begin());
}

// Non-degenerate kept columns: the ones entering the bootstrap max.
inline std::vector<std::size_t> active_columns(const DiffStats& d,
                                               const ScreenSet& s) {
  std::vector<std::size_t> out;
  for (int j : s.kept) {
    const auto c = column_of(d, j);
    if (!d.degenerate[c]) out.push_back(c);
  }
  return out;
}

}  // namespace detail

/// T = max over kept competitors of sqrt(n) * mean / sd.
///
/// Zero-variance competitors: a positive mean makes T = +inf (focal is
/// dominated), a zero or negative mean removes the competitor. Returns -inf
/// when nothing remains ("no contrast").
inline double test_statistic(const DiffStats& d, const ScreenSet& s) {
  double t = -std::numeric_limits<double>::infinity();
  for (int j : s.kept) {
    const auto c = detail::column_of(d, j);
    const double r = d.ratio(c);
    if (d.degenerate[c] && r <= 0.0) continue;
    t = std::max(t, r);
  }
  return t;
}

/// Bootstrap maxima T*_1..T*_B. Replicate b draws one standard Gaussian
/// multiplier per validation row from its own substream keyed by
/// (seed, stream_key, b); the same multipliers are shared by every
/// competitor. The key defaults to the focal id.
inline std::vector<double> bootstrap_max_draws(const DiffStats& d,
                                               const ScreenSet& s, int B,
                                               std::uint64_t seed,
                                               std::uint64_t stream_key) {
  if (B < 1) throw ConfigError("bootstrap replicate count must be positive");
  const auto cols = detail::active_columns(d, s);
  std::vector<double> draws(static_cast<std::size_t>(B),
                            -std::numeric_limits<double>::infinity());
  if (cols.empty()) return draws;

  const auto n = static_cast<Eigen::Index>(d.n());
  const auto k = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXd Z(n, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto src = static_cast<Eigen::Index>(cols[static_cast<std::size_t>(c)]);
    Z.col(c) = d.centered.col(src) / d.scales(src);
  }
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));

  constexpr int block = 512;
  Eigen::MatrixXd zeta;
  Eigen::MatrixXd W;
  std::normal_distribution<double> normal;
  for (int b0 = 0; b0 < B; b0 += block) {
    const int rows = std::min(block, B - b0);
    zeta.resize(rows, n);
    for (int r = 0; r < rows; ++r) {
      auto rng = substream(seed, Phase::bootstrap, stream_key,
                           static_cast<std::uint64_t>(b0 + r));
      normal.reset();
      for (Eigen::Index i = 0; i < n; ++i) zeta(r, i) = normal(rng);
    }
    W.noalias() = zeta * Z;
    for (int r = 0; r < rows; ++r)
      draws[static_cast<std::size_t>(b0 + r)] = W.row(r).maxCoeff() * inv_sqrt_n;
  }
  return draws;
}

inline std::vector<double> bootstrap_max_draws(const DiffStats& d,
                                               const ScreenSet& s, int B,
                                               std::uint64_t seed) {
  return bootstrap_max_draws(d, s, B, seed, static_cast<std::uint64_t>(d.focal));
}

/// Fraction of draws strictly above t.
inline double tail_fraction(std::span<const double> draws, double t) {
  std::size_t above = 0;
  for (double v : draws)
    if (v > t) ++above;
  return static_cast<double>(above) / static_cast<double>(draws.size());
}

/// Studentized Gaussian multiplier bootstrap p-value for "the focal candidate
/// has the smallest risk".
inline PValueRecord multiplier_bootstrap(const DiffStats& d, const ScreenSet& s,
                                         int B, std::uint64_t seed,
                                         std::optional<std::uint64_t> stream_key = {}) {
  if (B < 1) throw ConfigError("bootstrap replicate count must be positive");
  PValueRecord rec;
  rec.focal = d.focal;
  rec.B = B;
  rec.screen = s;
  rec.seed = seed;
  rec.t_stat = test_statistic(d, s);
  if (rec.t_stat == std::numeric_limits<double>::infinity()) {
    rec.contrast = Contrast::dominated;
    rec.p_value = 0.0;
    return rec;
  }
  if (rec.t_stat == -std::numeric_limits<double>::infinity()) {
    rec.contrast = Contrast::no_contrast;
    rec.p_value = 1.0;
    return rec;
  }
  const auto draws = bootstrap_max_draws(
      d, s, B, seed, stream_key.value_or(static_cast<std::uint64_t>(d.focal)));
  rec.p_value = tail_fraction(draws, rec.t_stat);
  return rec;
}

/// Moment diagnostic for the sub-exponential tail assumption: for each q the
/// value (q!)^{-1} * (mean |z|^q)^{1/q} of the standardized vector z
/// (population sd). Ratios that stay flat or shrink with q are reassuring.
inline std::vector<std::pair<int, double>> psi1_diagnostic(
    std::span<const double> values, std::span<const int> orders) {
  if (values.size() < 2) throw DataError("diagnostic needs at least two values");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  if (!(sd > 0.0)) throw DegenerateInputError("diagnostic input has zero spread");

  std::vector<std::pair<int, double>> out;
  for (int q : orders) {
    if (q < 1 || q > 8) throw ConfigError("moment order must lie in 1..8");
    double acc = 0.0;
    for (double v : values) acc += std::pow(std::abs((v - mean) / sd), q);
    const double norm = std::pow(acc / n, 1.0 / q);
    out.emplace_back(q, norm / std::tgamma(q + 1.0));
  }
  return out;
}

}  // namespace cvc
