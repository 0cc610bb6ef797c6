#pragma once

#include <span>
#include <vector>

#include "ultra/core.hpp"

namespace ultra {

/// Limit of the normalized Euclidean distance matrix as n grows. For labels
/// first differing at level j the entry is sqrt(2 * (s_j^2 + ... + s_N^2)).
struct LimitMatrix {
  Matrix entries;
  Matrix squared;  // entries before the square root, summed from level N down
  std::vector<double> sigmas;
  std::vector<std::size_t> branching;
};

LimitMatrix limit_matrix(std::span<const std::size_t> branching, std::span<const double> sigmas);

/// E[(x_i^A - x_i^B)^2] = 2 * sum_l (1 - delta_{a_1 b_1} ... delta_{a_l b_l}) sigma_l^2,
/// evaluated term by term from the Kronecker-delta products.
double expected_squared_difference(std::span<const std::size_t> a, std::span<const std::size_t> b,
                                   std::span<const double> sigmas);

// Moments of one tree-correlated coordinate field (m-ary, depth k).

/// sigma^2 (1 - lambda^{-2k}) / (1 - lambda^{-2}); lambda near 1 falls back
/// to the direct sum.
double hier_variance(std::size_t k, double lambda, double sigma);
/// sigma^2 * sum_{j=0}^{k-1} lambda^{-2j}
double hier_variance_direct(std::size_t k, double lambda, double sigma);

/// Covariance of two coordinates whose tree indices first differ at
/// position r: sigma^2 * sum_{s=1}^{r-1} lambda^{-2(k-s)} (the shared
/// ancestors' squared coefficients). r = k + 1 means the same coordinate.
double hier_covariance(std::size_t r, std::size_t k, double lambda, double sigma);

struct MomentSummary {
  double mean = 0.0;
  double variance = 0.0;
  std::vector<double> covariance_by_r;  // index r - 1, r = 1..k
  double step_sigma = 0.0;
};

MomentSummary moment_summary(std::size_t k, double lambda, double sigma);

/// Per-level conditional standard deviations of the correlated process:
/// every level adds one independent field, so all N entries equal
/// sqrt(hier_variance).
std::vector<double> effective_sigmas(const GenSpecHierarchical& spec);

/// Number of unordered coordinate pairs first differing at r = 1..k:
/// m^{r-1} * m(m-1)/2 * m^{2(k-r)}.
std::vector<double> divergence_class_counts(std::size_t m, std::size_t k);

/// (1/n^2) sum_{i<j} cov[(y_i)^l1, (y_j)^l2] for the coordinates y of one
/// generated point (a sum of N independent fields). Uses cov[x^2, y^2] =
/// 2 cov[x, y]^2 and cov[x^2, y] = 0 for zero-mean jointly Gaussian pairs.
double markov_condition_sum(const GenSpecHierarchical& spec, int l1, int l2);

}  // namespace ultra
