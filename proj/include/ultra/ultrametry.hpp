#pragma once

#include <array>

#include "ultra/core.hpp"

namespace ultra {

/// Degree of ultrametricity of one triangle: 2 * mid / max - 1.
/// Equals 1 exactly when the two longest sides coincide. The all-zero
/// triangle has degree 1. Inputs violating the triangle inequality may
/// yield values below 0; they are returned as is.
double triangle_degree(double d_ab, double d_bc, double d_ca);

/// Mean triangle degree over all C(P, 3) unordered triples a < b < c,
/// using entries d(a,b), d(b,c), d(c,a). Triples are split over OpenMP
/// threads by their first index; partial sums are combined in index order.
double ultrametricity_degree(const Matrix& d);

struct UltrametricReport {
  bool ultrametric = true;
  std::array<std::size_t, 3> worst_triple{};  // a < b < c
  double worst_deficit = 0.0;                 // longest side minus middle side
};

/// Strong triangle inequality over all triples. `tol` is relative to the
/// largest entry.
UltrametricReport is_ultrametric(const Matrix& d, double tol);

/// U together with the spread of triangle degrees and a census of triples
/// breaking the strong triangle inequality by more than tol * scale.
struct UltrametricityReport {
  double degree = 1.0;
  double min_triangle_degree = 1.0;
  double max_triangle_degree = 1.0;
  std::size_t triples = 0;
  std::size_t violating_triples = 0;
  UltrametricReport strong;
};

UltrametricityReport analyze_ultrametricity(const Matrix& d, double tol);

/// Largest ultrametric below d: entry (a,b) is the minimax path cost,
/// read off the minimum spanning tree (single linkage).
Matrix subdominant_ultrametric(const Matrix& d);

}  // namespace ultra
