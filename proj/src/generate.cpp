#include "ultra/generate.hpp"

#include <cmath>

#include "ultra/rng.hpp"

namespace ultra {
namespace {

// Shared driver: level j row q is produced by `fill(prefix, parent_row, out_row)`.
template <class Fill>
GenerationLevels build_levels(std::span<const std::size_t> branching, std::size_t dimension,
                              Fill&& fill) {
  GenerationLevels result;
  result.levels.reserve(branching.size());
  std::size_t rows = 1;
  for (std::size_t j = 0; j < branching.size(); ++j) {
    rows *= branching[j];
    Matrix level(rows, dimension);
    const Matrix* parent = j == 0 ? nullptr : &result.levels.back();
    const auto prefix_branching = branching.first(j + 1);
    const std::size_t pj = branching[j];

#pragma omp parallel for schedule(static)
    for (std::size_t q = 0; q < rows; ++q) {
      const MultiIndex prefix = decode_multiindex(q, prefix_branching);
      std::span<const double> parent_row;
      if (parent) parent_row = parent->row(q / pj);
      fill(prefix, parent_row, level.row(q));
    }
    result.levels.push_back(std::move(level));
  }
  return result;
}

PointCloud to_cloud(GenerationLevels&& levels, std::span<const std::size_t> branching) {
  PointCloud cloud;
  cloud.points = std::move(levels.levels.back());
  cloud.labels = enumerate_multiindices(branching);
  return cloud;
}

}  // namespace

Seed node_seed(const Seed& root, std::span<const std::size_t> prefix) {
  Seed s = root;
  for (std::size_t a : prefix) s.path.push_back(a - 1);
  return s;
}

NodeSeeder default_seeder(const Seed& root) {
  return [root](std::span<const std::size_t> prefix) { return node_seed(root, prefix); };
}

GenerationLevels generate_independent_levels(const GenSpecIndependent& spec,
                                             const NodeSeeder& seeder) {
  validate_spec(spec);
  return build_levels(spec.branching, spec.dimension,
                      [&](const MultiIndex& prefix, std::span<const double> parent,
                          std::span<double> out) {
                        const double sd = spec.sigmas[prefix.size() - 1];
                        GaussianStream stream(seeder(prefix));
                        for (std::size_t i = 0; i < out.size(); ++i) {
                          const double mean = parent.empty() ? 0.0 : parent[i];
                          out[i] = stream.next_normal(mean, sd);
                        }
                      });
}

PointCloud generate_independent(const GenSpecIndependent& spec, const Seed& seed) {
  PointCloud cloud = to_cloud(generate_independent_levels(spec, default_seeder(seed)), spec.branching);
  cloud.provenance = {spec, seed};
  return cloud;
}

void fill_coordinate_field(std::size_t m, std::size_t k, double lambda, double sigma,
                           const Seed& seed, std::span<double> out) {
  if (m < 2 || k < 1 || !(lambda > 0.0))
    throw ValidationError("coordinate field requires m >= 2, k >= 1, lambda > 0");
  std::size_t n = 1;
  for (std::size_t s = 0; s < k; ++s) n *= m;
  if (out.size() != n) throw ShapeError("coordinate field output must have m^k entries");

  GaussianStream stream(seed);
  // acc holds the partial sums for the current tree level, widened in place.
  std::vector<double> acc(1, 0.0), next;
  std::size_t width = 1;
  for (std::size_t s = 1; s <= k; ++s) {
    const double coeff = std::pow(lambda, -static_cast<double>(k - s));
    width *= m;
    next.resize(width);
    for (std::size_t node = 0; node < width; ++node)
      next[node] = acc[node / m] + coeff * stream.next_normal(0.0, sigma);
    acc.swap(next);
  }
  std::copy(acc.begin(), acc.end(), out.begin());
}

std::vector<double> generate_coordinate_field(std::size_t m, std::size_t k, double lambda,
                                              double sigma, const Seed& seed) {
  std::size_t n = 1;
  for (std::size_t s = 0; s < k; ++s) n *= m;
  std::vector<double> field(n);
  fill_coordinate_field(m, k, lambda, sigma, seed, field);
  return field;
}

GenerationLevels generate_hierarchical_levels(const GenSpecHierarchical& spec,
                                              const NodeSeeder& seeder) {
  validate_spec(spec);
  return build_levels(spec.branching, spec.dimension(),
                      [&](const MultiIndex& prefix, std::span<const double> parent,
                          std::span<double> out) {
                        fill_coordinate_field(spec.arity, spec.tree_depth, spec.lambda, spec.sigma,
                                              seeder(prefix), out);
                        for (std::size_t i = 0; i < parent.size(); ++i) out[i] += parent[i];
                      });
}

PointCloud generate_hierarchical(const GenSpecHierarchical& spec, const Seed& seed) {
  PointCloud cloud = to_cloud(generate_hierarchical_levels(spec, default_seeder(seed)), spec.branching);
  cloud.provenance = {spec, seed};
  return cloud;
}

PointCloud generate(const FamilySpec& spec, const Seed& seed) {
  if (const auto* ind = std::get_if<GenSpecIndependent>(&spec)) return generate_independent(*ind, seed);
  return generate_hierarchical(std::get<GenSpecHierarchical>(spec), seed);
}

}  // namespace ultra
