#include "ultra/io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

namespace ultra {
namespace {

std::string location(std::size_t row, std::size_t col) {
  return "row " + std::to_string(row) + ", column " + std::to_string(col);
}

// Reads non-empty records; a trailing CR is dropped.
std::vector<std::vector<std::string>> read_records(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    records.push_back(split_csv_record(line));
  }
  return records;
}

bool is_number(std::string_view s) {
  try {
    parse_double(s);
    return true;
  } catch (const ParseError&) {
    return false;
  }
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

}  // namespace

std::string format_double(double v) {
  if (!std::isfinite(v)) throw DomainError("cannot format non-finite value");
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw DomainError("number formatting failed");
  return std::string(buf, end);
}

double parse_double(std::string_view text) {
  std::size_t b = 0, e = text.size();
  while (b < e && (text[b] == ' ' || text[b] == '\t')) ++b;
  while (e > b && (text[e - 1] == ' ' || text[e - 1] == '\t')) --e;
  text = text.substr(b, e - b);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || end != text.data() + text.size() || !std::isfinite(v))
    throw ParseError("'" + std::string(text) + "' is not a finite number");
  return v;
}

std::vector<std::string> split_csv_record(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

void write_matrix_csv(const Matrix& m, std::ostream& out, std::span<const std::string> header) {
  if (!header.empty()) {
    if (header.size() != m.cols()) throw ShapeError("header length does not match column count");
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << quote_if_needed(header[c]);
    out << '\n';
  }
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out << (c ? "," : "") << format_double(m(r, c));
    out << '\n';
  }
}

MatrixCsv read_matrix_csv(std::istream& in) {
  auto records = read_records(in);
  MatrixCsv result;
  std::size_t first_data = 0;
  if (!records.empty()) {
    const auto& first = records.front();
    if (!std::all_of(first.begin(), first.end(), [](const std::string& s) { return is_number(s); })) {
      result.header = first;
      first_data = 1;
    }
  }
  const std::size_t rows = records.size() - first_data;
  if (rows == 0) throw ParseError("matrix CSV contains no data rows");
  const std::size_t cols = records[first_data].size();
  if (!result.header.empty() && result.header.size() != cols)
    throw ParseError("header has " + std::to_string(result.header.size()) + " fields, data has " +
                     std::to_string(cols));

  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& rec = records[first_data + r];
    const std::size_t line_no = first_data + r + 1;
    if (rec.size() != cols)
      throw ParseError("ragged row at line " + std::to_string(line_no) + ": expected " +
                       std::to_string(cols) + " fields, got " + std::to_string(rec.size()));
    for (std::size_t c = 0; c < cols; ++c) {
      try {
        m(r, c) = parse_double(rec[c]);
      } catch (const ParseError& e) {
        throw ParseError(std::string(e.what()) + " at line " + std::to_string(line_no) +
                         ", column " + std::to_string(c + 1));
      }
    }
  }
  if (rows != cols)
    throw ParseError("matrix is " + std::to_string(rows) + "x" + std::to_string(cols) +
                     ", expected square");
  result.matrix = std::move(m);
  return result;
}

void validate_distance_matrix(const Matrix& m, double tol) {
  if (!m.square()) throw ShapeError("distance matrix must be square");
  const double limit = tol * m.max_abs();
  const std::size_t p = m.rows();
  for (std::size_t a = 0; a < p; ++a) {
    if (std::fabs(m(a, a)) > limit)
      throw ValidationError("nonzero diagonal at (" + location(a + 1, a + 1) +
                            ") = " + format_double(m(a, a)));
    for (std::size_t b = 0; b < p; ++b) {
      if (m(a, b) < -limit)
        throw ValidationError("negative entry at (" + location(a + 1, b + 1) + ")");
      if (b > a && std::fabs(m(a, b) - m(b, a)) > limit)
        throw ValidationError("not symmetric: (" + location(a + 1, b + 1) + ") = " +
                              format_double(m(a, b)) + " vs (" + location(b + 1, a + 1) + ") = " +
                              format_double(m(b, a)));
    }
  }
}

Matrix symmetrized(const Matrix& m) {
  if (!m.square()) throw ShapeError("matrix must be square");
  Matrix s(m.rows(), m.cols());
  for (std::size_t a = 0; a < m.rows(); ++a)
    for (std::size_t b = 0; b < m.cols(); ++b) s(a, b) = a == b ? 0.0 : 0.5 * (m(a, b) + m(b, a));
  return s;
}

void write_cloud_csv(const PointCloud& cloud, std::ostream& out) {
  out << "label";
  for (std::size_t i = 0; i < cloud.dimension(); ++i) out << ",x" << (i + 1);
  out << '\n';
  for (std::size_t r = 0; r < cloud.size(); ++r) {
    out << format_label(cloud.labels[r]);
    for (double v : cloud.points.row(r)) out << ',' << format_double(v);
    out << '\n';
  }
}

PointCloud read_cloud_csv(std::istream& in) {
  auto records = read_records(in);
  std::size_t first = 0;
  if (!records.empty() && !records.front().empty() && records.front().front() == "label") first = 1;
  const std::size_t rows = records.size() - first;
  if (rows == 0) throw ParseError("point cloud CSV contains no points");
  const std::size_t fields = records[first].size();
  if (fields < 2) throw ParseError("point rows need a label and at least one coordinate");

  PointCloud cloud;
  cloud.points = Matrix(rows, fields - 1);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& rec = records[first + r];
    const std::size_t line_no = first + r + 1;
    if (rec.size() != fields)
      throw ParseError("ragged row at line " + std::to_string(line_no) + ": expected " +
                       std::to_string(fields) + " fields, got " + std::to_string(rec.size()));
    try {
      cloud.labels.push_back(parse_label(rec[0]));
    } catch (const ParseError& e) {
      throw ParseError(std::string(e.what()) + " at line " + std::to_string(line_no) + ", column 1");
    }
    for (std::size_t c = 1; c < fields; ++c) {
      try {
        cloud.points(r, c - 1) = parse_double(rec[c]);
      } catch (const ParseError& e) {
        throw ParseError(std::string(e.what()) + " at line " + std::to_string(line_no) +
                         ", column " + std::to_string(c + 1));
      }
    }
  }
  return cloud;
}

using nlohmann::json;

json to_json(const GenSpecIndependent& s) {
  return {{"model", "independent"},
          {"branching", s.branching},
          {"sigmas", s.sigmas},
          {"n", s.dimension}};
}

json to_json(const GenSpecHierarchical& s) {
  return {{"model", "hierarchical"}, {"branching", s.branching}, {"m", s.arity},
          {"k", s.tree_depth},       {"n", s.dimension()},       {"lambda", s.lambda},
          {"sigma", s.sigma}};
}

json to_json(const FamilySpec& spec) {
  return std::visit([](const auto& s) { return to_json(s); }, spec);
}

json to_json(const Seed& seed) { return {{"master", seed.master}, {"path", seed.path}}; }

json to_json(const MetricReport& r) {
  return {{"pass", r.pass},
          {"scale", r.scale},
          {"worst_triangle_deficit", r.worst_triangle_deficit},
          {"worst_triangle", {r.worst_triangle[0] + 1, r.worst_triangle[1] + 1, r.worst_triangle[2] + 1}},
          {"worst_asymmetry", r.worst_asymmetry},
          {"worst_asymmetric_pair", {r.worst_asymmetric_pair[0] + 1, r.worst_asymmetric_pair[1] + 1}},
          {"worst_diagonal", r.worst_diagonal},
          {"most_negative", r.most_negative}};
}

json to_json(const UltrametricReport& r) {
  return {{"ultrametric", r.ultrametric},
          {"worst_deficit", r.worst_deficit},
          {"worst_triple", {r.worst_triple[0] + 1, r.worst_triple[1] + 1, r.worst_triple[2] + 1}}};
}

json to_json(const SweepResult& result) {
  json rows = json::array();
  for (const auto& r : result.rows) {
    json row = {{"n", r.n}, {"realizations", r.realizations}};
    if (!r.error.empty()) {
      row["error"] = r.error;
    } else {
      row["mean_u"] = r.mean_u;
      row["sd_u"] = r.sd_u;
      row["min_u"] = r.min_u;
      row["max_u"] = r.max_u;
      row["degenerate"] = r.degenerate;
    }
    rows.push_back(std::move(row));
  }
  return {{"family", to_json(result.family)}, {"master_seed", result.master_seed}, {"rows", rows}};
}

json to_json(const ConvergenceResult& result) {
  json rows = json::array();
  for (const auto& r : result.rows) {
    json row = {{"n", r.n}};
    if (!r.error.empty()) {
      row["error"] = r.error;
    } else {
      json classes = json::array();
      for (std::size_t j = 0; j < r.exceedance.size(); ++j)
        classes.push_back({{"level", j + 1}, {"limit", r.limit_value[j]}, {"exceedance", r.exceedance[j]}});
      row["classes"] = classes;
      row["mean_max_relative_deviation"] = r.mean_max_relative_deviation;
      row["max_relative_deviation"] = r.max_relative_deviation;
    }
    rows.push_back(std::move(row));
  }
  return {{"family", to_json(result.family)},
          {"master_seed", result.master_seed},
          {"epsilon", result.epsilon},
          {"realizations", result.realizations},
          {"rows", rows}};
}

json to_json(const MomentReport& report) {
  json stats = json::array();
  for (const auto& s : report.statistics)
    stats.push_back({{"name", s.name},
                     {"empirical", s.empirical},
                     {"analytic", s.analytic},
                     {"standard_error", s.standard_error},
                     {"z", std::isfinite(s.z) ? json(s.z) : json(s.z > 0 ? "inf" : "-inf")}});
  return {{"realizations", report.realizations}, {"flagged", report.flagged}, {"statistics", stats}};
}

json to_json(const MomentSummary& s) {
  return {{"mean", s.mean},
          {"variance", s.variance},
          {"covariance_by_r", s.covariance_by_r},
          {"step_sigma", s.step_sigma}};
}

void write_sweep_csv(const SweepResult& result, std::ostream& out) {
  out << "n,mean_u,sd_u,min_u,max_u,realizations,degenerate,error\n";
  for (const auto& r : result.rows) {
    out << r.n << ',';
    if (r.error.empty())
      out << format_double(r.mean_u) << ',' << format_double(r.sd_u) << ',' << format_double(r.min_u)
          << ',' << format_double(r.max_u);
    else
      out << ",,,";
    out << ',' << r.realizations << ',' << (r.degenerate ? 1 : 0) << ',' << quote_if_needed(r.error)
        << '\n';
  }
}

void write_convergence_csv(const ConvergenceResult& result, std::ostream& out) {
  out << "n,level,limit,exceedance,mean_max_relative_deviation,max_relative_deviation,error\n";
  for (const auto& r : result.rows) {
    if (!r.error.empty()) {
      out << r.n << ",,,,,," << quote_if_needed(r.error) << '\n';
      continue;
    }
    for (std::size_t j = 0; j < r.exceedance.size(); ++j)
      out << r.n << ',' << (j + 1) << ',' << format_double(r.limit_value[j]) << ','
          << format_double(r.exceedance[j]) << ',' << format_double(r.mean_max_relative_deviation)
          << ',' << format_double(r.max_relative_deviation) << ",\n";
  }
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace ultra
