#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ultra/core.hpp"
#include "ultra/experiment.hpp"
#include "ultra/metric.hpp"
#include "ultra/theory.hpp"
#include "ultra/ultrametry.hpp"

namespace ultra {

/// Shortest decimal string that parses back to the same double.
/// Locale independent.
std::string format_double(double v);
/// Whole-string decimal parse; throws ParseError on anything else.
double parse_double(std::string_view text);

/// Splits one CSV record (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_csv_record(std::string_view line);

// Matrices: one row per line, comma separated, LF line endings. An optional
// header row of labels may precede the data.

void write_matrix_csv(const Matrix& m, std::ostream& out,
                      std::span<const std::string> header = {});

struct MatrixCsv {
  Matrix matrix;
  std::vector<std::string> header;
};

/// Reads a square numeric matrix. Ragged rows, non-numeric cells and
/// non-square shapes throw ParseError with 1-based row/column locations.
MatrixCsv read_matrix_csv(std::istream& in);

/// Zero diagonal, nonnegative and symmetric entries; `tol` is relative to
/// the largest entry. Throws ValidationError naming the offending cells.
void validate_distance_matrix(const Matrix& m, double tol);

/// (D + D^T) / 2 with the diagonal forced to zero.
Matrix symmetrized(const Matrix& m);

// Point clouds: header "label,x1,..,xn", then one row per point whose first
// column is the multi-index label "a1.a2.aN".

void write_cloud_csv(const PointCloud& cloud, std::ostream& out);
PointCloud read_cloud_csv(std::istream& in);

// JSON views of the library's records.

nlohmann::json to_json(const GenSpecIndependent& spec);
nlohmann::json to_json(const GenSpecHierarchical& spec);
nlohmann::json to_json(const FamilySpec& spec);
nlohmann::json to_json(const Seed& seed);
nlohmann::json to_json(const MetricReport& report);
nlohmann::json to_json(const UltrametricReport& report);
nlohmann::json to_json(const SweepResult& result);
nlohmann::json to_json(const ConvergenceResult& result);
nlohmann::json to_json(const MomentReport& report);
nlohmann::json to_json(const MomentSummary& summary);

/// Plot-ready tables.
void write_sweep_csv(const SweepResult& result, std::ostream& out);
void write_convergence_csv(const ConvergenceResult& result, std::ostream& out);

/// FNV-1a 64-bit digest of a byte string, used by run manifests.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace ultra
