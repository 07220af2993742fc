#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "cvc/core.hpp"

namespace cvc::test {

// Test-side generator, deliberately unrelated to the library's substreams.
inline std::mt19937 make_rng(std::uint32_t seed) { return std::mt19937(seed); }

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols,
                                     std::mt19937& rng, double lo = 0.0,
                                     double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = u(rng);
  return M;
}

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols,
                                       std::mt19937& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = g(rng);
  return M;
}

/// Balanced group labels 0..G-1 assigned round robin.
inline std::vector<int> round_robin_groups(std::size_t n, int G) {
  std::vector<int> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = static_cast<int>(i % static_cast<std::size_t>(G));
  return g;
}

/// Random nonnegative loss matrix with balanced groups.
inline LossMatrix random_losses(std::size_t n, std::size_t M, int G, std::mt19937& rng) {
  auto values = random_matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(M), rng,
                              0.0, 4.0);
  return LossMatrix::from_values(values, round_robin_groups(n, G), G);
}

}  // namespace cvc::test
