#include "ultra/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ultra/generate.hpp"
#include "ultra/metric.hpp"
#include "ultra/rng.hpp"
#include "ultra/ultrametry.hpp"

namespace ultra {
namespace {

void require_realizations(std::size_t r) {
  if (r < 1) throw ValidationError("realization count must be at least 1");
}

double z_score(double empirical, double analytic, double se) {
  const double diff = empirical - analytic;
  if (se > 0.0) return diff / se;
  if (diff == 0.0) return 0.0;
  return std::copysign(std::numeric_limits<double>::infinity(), diff);
}

// Sample mean and standard error of the mean.
std::pair<double, double> mean_and_se(std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace

Seed realization_seed(std::uint64_t master, std::size_t n, std::size_t realization) {
  return Seed{master, {n, realization}};
}

FamilySpec with_dimension(const FamilySpec& spec, std::size_t n) {
  if (const auto* ind = std::get_if<GenSpecIndependent>(&spec)) {
    GenSpecIndependent s = *ind;
    s.dimension = n;
    return s;
  }
  GenSpecHierarchical s = std::get<GenSpecHierarchical>(spec);
  if (s.arity < 2) throw ValidationError("arity m must be at least 2");
  std::size_t k = 0, power = 1;
  while (power < n) {
    power *= s.arity;
    ++k;
  }
  if (power != n || k == 0)
    throw ValidationError("n = " + std::to_string(n) + " is not a positive power of m = " +
                          std::to_string(s.arity));
  s.tree_depth = k;
  return s;
}

std::vector<double> limit_sigmas(const FamilySpec& spec) {
  if (const auto* ind = std::get_if<GenSpecIndependent>(&spec)) return ind->sigmas;
  return effective_sigmas(std::get<GenSpecHierarchical>(spec));
}

SweepResult sweep_ultrametricity(const FamilySpec& spec, std::span<const std::size_t> n_values,
                                 std::size_t realizations, std::uint64_t master_seed) {
  require_realizations(realizations);
  SweepResult result{spec, master_seed, {}};
  for (std::size_t n : n_values) {
    SweepRow row;
    row.n = n;
    row.realizations = realizations;
    FamilySpec family;
    try {
      family = with_dimension(spec, n);
      std::visit([](const auto& s) { validate_spec(s); }, family);
      if (point_count(branching_of(family)) < 3)
        throw ValidationError("ultrametricity degree needs at least 3 points");
    } catch (const Error& e) {
      row.error = e.what();
      result.rows.push_back(std::move(row));
      continue;
    }

    std::vector<double> degree(realizations);
    std::vector<char> degenerate(realizations, 0);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t r = 0; r < realizations; ++r) {
      const PointCloud cloud = generate(family, realization_seed(master_seed, n, r));
      const DistanceMatrix d = distance_matrix(cloud, 2.0);
      if (d.entries.max_abs() == 0.0) {
        degree[r] = 1.0;
        degenerate[r] = 1;
      } else {
        degree[r] = ultrametricity_degree(d.entries);
      }
    }

    double sum = 0.0;
    for (double u : degree) sum += u;
    row.mean_u = sum / static_cast<double>(realizations);
    double ss = 0.0;
    for (double u : degree) ss += (u - row.mean_u) * (u - row.mean_u);
    row.sd_u = realizations > 1 ? std::sqrt(ss / static_cast<double>(realizations - 1)) : 0.0;
    row.min_u = *std::min_element(degree.begin(), degree.end());
    row.max_u = *std::max_element(degree.begin(), degree.end());
    row.degenerate = std::any_of(degenerate.begin(), degenerate.end(), [](char c) { return c != 0; });
    result.rows.push_back(std::move(row));
  }
  return result;
}

ConvergenceResult convergence_probe(const FamilySpec& spec, std::span<const std::size_t> n_values,
                                    double epsilon, std::size_t realizations,
                                    std::uint64_t master_seed) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  require_realizations(realizations);
  ConvergenceResult result{spec, master_seed, epsilon, realizations, {}};

  for (std::size_t n : n_values) {
    ConvergenceRow row;
    row.n = n;
    FamilySpec family;
    LimitMatrix limit;
    try {
      family = with_dimension(spec, n);
      std::visit([](const auto& s) { validate_spec(s); }, family);
      limit = limit_matrix(branching_of(family), limit_sigmas(family));
    } catch (const Error& e) {
      row.error = e.what();
      result.rows.push_back(std::move(row));
      continue;
    }

    const auto branching = branching_of(family);
    const std::size_t depth = branching.size();
    const auto labels = enumerate_multiindices(branching);
    const std::size_t p = labels.size();

    std::vector<std::size_t> pair_level;  // per (a < b), row-major
    std::vector<std::size_t> class_size(depth, 0);
    row.limit_value.assign(depth, 0.0);
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = a + 1; b < p; ++b) {
        const std::size_t j = first_difference_level(labels[a], labels[b]);
        pair_level.push_back(j);
        ++class_size[j - 1];
        row.limit_value[j - 1] = limit.entries(a, b);
      }

    std::vector<std::vector<std::size_t>> hits(realizations, std::vector<std::size_t>(depth, 0));
    std::vector<double> max_rel(realizations, 0.0);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t r = 0; r < realizations; ++r) {
      const PointCloud cloud = generate(family, realization_seed(master_seed, n, r));
      const DistanceMatrix d = distance_matrix(cloud, 2.0);
      std::size_t idx = 0;
      double worst = 0.0;
      for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = a + 1; b < p; ++b, ++idx) {
          const double u = limit.entries(a, b);
          const double dev = std::fabs(d.entries(a, b) - u);
          if (dev >= epsilon) ++hits[r][pair_level[idx] - 1];
          const double rel =
              u > 0.0 ? dev / u : (dev == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
          worst = std::max(worst, rel);
        }
      max_rel[r] = worst;
    }

    row.exceedance.assign(depth, 0.0);
    for (std::size_t j = 0; j < depth; ++j) {
      if (class_size[j] == 0) continue;
      std::size_t total = 0;
      for (std::size_t r = 0; r < realizations; ++r) total += hits[r][j];
      row.exceedance[j] =
          static_cast<double>(total) / static_cast<double>(class_size[j] * realizations);
    }
    double sum = 0.0;
    for (double m : max_rel) sum += m;
    row.mean_max_relative_deviation = sum / static_cast<double>(realizations);
    row.max_relative_deviation = *std::max_element(max_rel.begin(), max_rel.end());
    result.rows.push_back(std::move(row));
  }
  return result;
}

double default_epsilon(const LimitMatrix& limit) {
  double smallest = 0.0;
  for (double v : limit.entries.data())
    if (v > 0.0 && (smallest == 0.0 || v < smallest)) smallest = v;
  return 0.1 * smallest;
}

MomentReport moment_probe(const GenSpecHierarchical& spec, std::size_t realizations,
                          std::uint64_t master_seed) {
  validate_spec(spec);
  require_realizations(realizations);
  const std::size_t m = spec.arity, k = spec.tree_depth;

  // Column 0: coordinate 0. Column r: coordinate m^{k-r}, i.e. tree index
  // (1,..,1,2,1,..,1) with the 2 at position r.
  std::vector<std::size_t> coords{0};
  for (std::size_t r = 1; r <= k; ++r) {
    std::size_t c = 1;
    for (std::size_t s = 0; s < k - r; ++s) c *= m;
    coords.push_back(c);
  }
  Matrix samples(realizations, coords.size());
#pragma omp parallel for schedule(static)
  for (std::size_t r = 0; r < realizations; ++r) {
    const auto field =
        generate_coordinate_field(m, k, spec.lambda, spec.sigma, Seed{master_seed, {r}});
    for (std::size_t c = 0; c < coords.size(); ++c) samples(r, c) = field[coords[c]];
  }

  const auto column = [&](std::size_t c) {
    std::vector<double> v(realizations);
    for (std::size_t r = 0; r < realizations; ++r) v[r] = samples(r, c);
    return v;
  };
  const auto centered_products = [&](const std::vector<double>& x, const std::vector<double>& y) {
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    std::vector<double> prod(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) prod[i] = (x[i] - mx) * (y[i] - my);
    return prod;
  };
  // Unbiased (R - 1) covariance with the standard error of the product mean.
  const auto covariance_stat = [&](std::string name, const std::vector<double>& x,
                                   const std::vector<double>& y, double analytic) {
    const auto prod = centered_products(x, y);
    const auto [mean, se] = mean_and_se(prod);
    const double rr = static_cast<double>(x.size());
    const double unbiased = x.size() > 1 ? mean * rr / (rr - 1.0) : 0.0;
    return MomentStatistic{std::move(name), unbiased, analytic, se, z_score(unbiased, analytic, se)};
  };

  MomentReport report;
  report.realizations = realizations;
  const auto x0 = column(0);
  {
    const auto [mean, se] = mean_and_se(x0);
    report.statistics.push_back({"mean", mean, 0.0, se, z_score(mean, 0.0, se)});
  }
  report.statistics.push_back(
      covariance_stat("variance", x0, x0, hier_variance(k, spec.lambda, spec.sigma)));
  for (std::size_t r = 1; r <= k; ++r)
    report.statistics.push_back(covariance_stat("covariance_r" + std::to_string(r), x0, column(r),
                                                hier_covariance(r, k, spec.lambda, spec.sigma)));
  report.flagged = std::any_of(report.statistics.begin(), report.statistics.end(),
                               [](const MomentStatistic& s) { return std::fabs(s.z) > 4.0; });
  return report;
}

std::vector<SquaredDifferenceRow> squared_difference_probe(const FamilySpec& spec,
                                                           std::size_t realizations,
                                                           std::uint64_t master_seed) {
  require_realizations(realizations);
  std::visit([](const auto& s) { validate_spec(s); }, spec);
  const auto branching = branching_of(spec);
  const auto sigmas = limit_sigmas(spec);
  const std::size_t depth = branching.size();

  std::vector<SquaredDifferenceRow> rows;
  for (std::size_t j = 1; j <= depth; ++j) {
    if (branching[j - 1] < 2) continue;
    SquaredDifferenceRow row;
    row.level = j;
    row.a = MultiIndex(depth, 1);
    row.b = row.a;
    row.b[j - 1] = 2;
    row.analytic = expected_squared_difference(row.a, row.b, sigmas);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return rows;

  std::vector<std::size_t> ord_a, ord_b;
  for (const auto& row : rows) {
    ord_a.push_back(encode_multiindex(row.a, branching));
    ord_b.push_back(encode_multiindex(row.b, branching));
  }
  Matrix sq(realizations, rows.size());
#pragma omp parallel for schedule(static)
  for (std::size_t r = 0; r < realizations; ++r) {
    const PointCloud cloud = generate(spec, Seed{master_seed, {r}});
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double diff = cloud.points(ord_a[i], 0) - cloud.points(ord_b[i], 0);
      sq(r, i) = diff * diff;
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<double> v(realizations);
    for (std::size_t r = 0; r < realizations; ++r) v[r] = sq(r, i);
    const auto [mean, se] = mean_and_se(v);
    rows[i].empirical = mean;
    rows[i].standard_error = se;
    rows[i].z = z_score(mean, rows[i].analytic, se);
  }
  return rows;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError("spearman: sequences differ in length");
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace ultra
