#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ultra/error.hpp"
#include "ultra/matrix.hpp"

namespace ultra {

/// Parameters of the branching process with independent coordinates.
/// Level j draws each child coordinate from N(parent coordinate, sigmas[j]);
/// level 1 draws from N(0, sigmas[0]). Sigmas are standard deviations.
struct GenSpecIndependent {
  std::vector<std::size_t> branching;
  std::vector<double> sigmas;
  std::size_t dimension = 0;

  std::size_t depth() const noexcept { return branching.size(); }
  friend bool operator==(const GenSpecIndependent&, const GenSpecIndependent&) = default;
};

/// Parameters of the branching process with cluster-correlated coordinates.
/// Coordinates are the leaves of an m-ary tree of depth k, so the
/// dimension is arity^tree_depth.
struct GenSpecHierarchical {
  std::vector<std::size_t> branching;
  std::size_t arity = 2;
  std::size_t tree_depth = 1;
  double lambda = 2.0;
  double sigma = 1.0;

  std::size_t depth() const noexcept { return branching.size(); }
  std::size_t dimension() const;
  friend bool operator==(const GenSpecHierarchical&, const GenSpecHierarchical&) = default;
};

using FamilySpec = std::variant<GenSpecIndependent, GenSpecHierarchical>;

template <class Spec>
struct Validated {
  Spec spec;
  // Set for hierarchical specs with lambda <= 1, where the limit theorem's
  // covariance conditions fail.
  bool non_convergent_regime = false;
};

Validated<GenSpecIndependent> validate_spec(const GenSpecIndependent& spec);
Validated<GenSpecHierarchical> validate_spec(const GenSpecHierarchical& spec);

std::span<const std::size_t> branching_of(const FamilySpec& spec);
std::size_t dimension_of(const FamilySpec& spec);

// ---------------------------------------------------------------------------
// Multi-indices. Components are 1-based, a_1 varies slowest.

using MultiIndex = std::vector<std::size_t>;

/// Product of the branching factors; throws RangeError on overflow.
std::size_t point_count(std::span<const std::size_t> branching);

std::size_t encode_multiindex(std::span<const std::size_t> index,
                              std::span<const std::size_t> branching);
MultiIndex decode_multiindex(std::size_t ordinal, std::span<const std::size_t> branching);

/// All multi-indices in lexicographic order.
std::vector<MultiIndex> enumerate_multiindices(std::span<const std::size_t> branching);

/// 1-based level at which a and b first differ, or size()+1 if equal.
std::size_t first_difference_level(std::span<const std::size_t> a, std::span<const std::size_t> b);

/// "a1.a2.aN"
std::string format_label(std::span<const std::size_t> index);
MultiIndex parse_label(std::string_view text);

// ---------------------------------------------------------------------------
// Seeds.

/// A master seed plus a path of child indices naming one random substream.
struct Seed {
  std::uint64_t master = 0;
  std::vector<std::uint64_t> path;

  Seed child(std::uint64_t index) const;
  friend bool operator==(const Seed&, const Seed&) = default;
};

Seed derive_substream(const Seed& seed, std::uint64_t child);

// ---------------------------------------------------------------------------

struct Provenance {
  std::variant<std::monostate, GenSpecIndependent, GenSpecHierarchical> spec;
  Seed seed;
};

/// P x n matrix of points with their multi-index labels (rows in
/// lexicographic label order).
struct PointCloud {
  Matrix points;
  std::vector<MultiIndex> labels;
  Provenance provenance;

  std::size_t size() const noexcept { return points.rows(); }
  std::size_t dimension() const noexcept { return points.cols(); }
};

/// Symmetric, zero-diagonal matrix of pairwise distances together with the
/// Minkowski exponent that produced it (infinity for the max metric).
struct DistanceMatrix {
  Matrix entries;
  double alpha = 2.0;

  std::size_t size() const noexcept { return entries.rows(); }
};

}  // namespace ultra
