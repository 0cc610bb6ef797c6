#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ultra/core.hpp"

namespace ultra {

/// Maps a tree-node prefix (a_1..a_j) to the seed of its random substream.
/// Must be pure: generation calls it concurrently and in any order.
using NodeSeeder = std::function<Seed(std::span<const std::size_t> prefix)>;

/// root.child(a_1 - 1).child(a_2 - 1)...
Seed node_seed(const Seed& root, std::span<const std::size_t> prefix);
NodeSeeder default_seeder(const Seed& root);

/// Every generation level of the independent-coordinate process. Level j
/// (0-based) holds p_1*...*p_{j+1} rows in lexicographic prefix order; the
/// last level is the returned point cloud.
struct GenerationLevels {
  std::vector<Matrix> levels;
};

GenerationLevels generate_independent_levels(const GenSpecIndependent& spec,
                                             const NodeSeeder& seeder);
PointCloud generate_independent(const GenSpecIndependent& spec, const Seed& seed);

/// One draw of the tree-correlated coordinate field of length m^k:
///   x_{i_1..i_k} = sum_{s=1..k} lambda^{-(k-s)} xi_{i_1..i_s},
/// with one N(0, sigma) variable per tree node, drawn breadth-first from the
/// substream of `seed`. Coordinates are laid out lexicographically in
/// (i_1..i_k).
std::vector<double> generate_coordinate_field(std::size_t m, std::size_t k, double lambda,
                                              double sigma, const Seed& seed);
void fill_coordinate_field(std::size_t m, std::size_t k, double lambda, double sigma,
                           const Seed& seed, std::span<double> out);

/// Cluster-correlated process: y^(a_1..a_j) = x^(a_1..a_j) + y^(a_1..a_{j-1}),
/// each x an independent coordinate field.
GenerationLevels generate_hierarchical_levels(const GenSpecHierarchical& spec,
                                              const NodeSeeder& seeder);
PointCloud generate_hierarchical(const GenSpecHierarchical& spec, const Seed& seed);

/// Dispatches on the family.
PointCloud generate(const FamilySpec& spec, const Seed& seed);

}  // namespace ultra
