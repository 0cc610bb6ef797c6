#pragma once

#include <array>
#include <limits>
#include <span>

#include "ultra/core.hpp"

namespace ultra {

/// Exponent selecting the max-coordinate (Chebyshev) metric.
inline constexpr double kChebyshev = std::numeric_limits<double>::infinity();

/// Normalized Minkowski distance ((1/n) sum |x_i - y_i|^alpha)^(1/alpha);
/// alpha = infinity gives max_i |x_i - y_i|. Summation runs in ascending i.
double minkowski_distance(std::span<const double> x, std::span<const double> y, double alpha);

/// All pairwise distances between rows. Rows are distributed over OpenMP
/// threads; each entry is computed by the same serial kernel, so the result
/// does not depend on the thread count.
DistanceMatrix distance_matrix(const Matrix& points, double alpha);
DistanceMatrix distance_matrix(const PointCloud& cloud, double alpha);

struct MetricReport {
  bool pass = true;
  // Absolute values; tolerances are applied relative to `scale`.
  double scale = 0.0;
  double worst_triangle_deficit = 0.0;  // max(0, d_ab - d_ac - d_cb)
  std::array<std::size_t, 3> worst_triangle{};  // (a, b, c)
  double worst_asymmetry = 0.0;
  std::array<std::size_t, 2> worst_asymmetric_pair{};
  double worst_diagonal = 0.0;
  double most_negative = 0.0;
};

/// Checks nonnegativity, zero diagonal, symmetry and the triangle inequality
/// over all ordered triples of distinct indices. `tol` is relative to the
/// largest absolute entry.
MetricReport check_metric_axioms(const Matrix& d, double tol);

}  // namespace ultra
