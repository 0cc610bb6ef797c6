#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ultra/core.hpp"
#include "ultra/theory.hpp"

namespace ultra {

// Monte Carlo studies. Realization r at dimension n always draws from
// Seed{master, {n, r}}, so rows are reproducible individually and the
// results do not depend on how realizations are scheduled over threads.

Seed realization_seed(std::uint64_t master, std::size_t n, std::size_t realization);

/// Same family with dimension n. Hierarchical families require n = m^k and
/// get tree depth k; anything else throws ValidationError.
FamilySpec with_dimension(const FamilySpec& spec, std::size_t n);

/// Limit-matrix sigmas of a family: the step sigmas for the independent
/// process, effective_sigmas for the correlated one.
std::vector<double> limit_sigmas(const FamilySpec& spec);

struct SweepRow {
  std::size_t n = 0;
  double mean_u = 0.0;
  double sd_u = 0.0;
  double min_u = 0.0;
  double max_u = 0.0;
  std::size_t realizations = 0;
  bool degenerate = false;  // some realization had an all-zero distance matrix
  std::string error;        // non-empty when the row could not be computed
};

struct SweepResult {
  FamilySpec family;
  std::uint64_t master_seed = 0;
  std::vector<SweepRow> rows;
};

/// Mean and standard deviation of U over R realizations for each n,
/// using the normalized Euclidean metric.
SweepResult sweep_ultrametricity(const FamilySpec& spec, std::span<const std::size_t> n_values,
                                 std::size_t realizations, std::uint64_t master_seed);

struct ConvergenceRow {
  std::size_t n = 0;
  // Indexed by first-difference level j = 1..N (position j - 1).
  std::vector<double> limit_value;
  std::vector<double> exceedance;  // fraction of (realization, pair) with |d - u| >= eps
  double mean_max_relative_deviation = 0.0;
  double max_relative_deviation = 0.0;
  std::string error;
};

struct ConvergenceResult {
  FamilySpec family;
  std::uint64_t master_seed = 0;
  double epsilon = 0.0;
  std::size_t realizations = 0;
  std::vector<ConvergenceRow> rows;
};

ConvergenceResult convergence_probe(const FamilySpec& spec, std::span<const std::size_t> n_values,
                                    double epsilon, std::size_t realizations,
                                    std::uint64_t master_seed);

/// 10% of the smallest nonzero off-diagonal limit entry (0 if none).
double default_epsilon(const LimitMatrix& limit);

struct MomentStatistic {
  std::string name;
  double empirical = 0.0;
  double analytic = 0.0;
  double standard_error = 0.0;
  double z = 0.0;
};

struct MomentReport {
  std::size_t realizations = 0;
  std::vector<MomentStatistic> statistics;  // mean, variance, covariance_r1..rk
  bool flagged = false;                     // some |z| > 4
};

/// Empirical moments of the coordinate field over R independent draws,
/// compared with the closed forms. Coordinate 0 is paired with the first
/// coordinate whose tree index diverges from it at position r.
MomentReport moment_probe(const GenSpecHierarchical& spec, std::size_t realizations,
                          std::uint64_t master_seed);

struct SquaredDifferenceRow {
  std::size_t level = 0;  // first-difference level of the representative pair
  MultiIndex a, b;
  double empirical = 0.0;
  double analytic = 0.0;
  double standard_error = 0.0;
  double z = 0.0;
};

/// Monte Carlo mean of (x_0^A - x_0^B)^2 for one pair per first-difference
/// level, against expected_squared_difference. Levels with p_j = 1 have no
/// such pair and are skipped.
std::vector<SquaredDifferenceRow> squared_difference_probe(const FamilySpec& spec,
                                                           std::size_t realizations,
                                                           std::uint64_t master_seed);

/// Spearman rank correlation with average ranks for ties. NaN if either
/// side is constant.
double spearman_correlation(std::span<const double> x, std::span<const double> y);

}  // namespace ultra
