#pragma once

// Single-threaded reference versions of the parallel kernels. Kept for
// cross-checking and benchmarking; not used on the production path.

#include "ultra/core.hpp"

namespace ultra::serial {

DistanceMatrix distance_matrix(const Matrix& points, double alpha);

/// Plain triple loop with a single accumulator.
double ultrametricity_degree(const Matrix& d);

/// Minimax path costs by a Floyd-Warshall style closure, O(P^3).
Matrix subdominant_ultrametric(const Matrix& d);

}  // namespace ultra::serial
