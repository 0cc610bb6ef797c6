#include "ultra/core.hpp"

#include <charconv>
#include <cmath>
#include <limits>

namespace ultra {
namespace {

std::size_t checked_mul(std::size_t a, std::size_t b, const char* what) {
  if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a)
    throw RangeError(std::string(what) + " overflows");
  return a * b;
}

void validate_branching(std::span<const std::size_t> branching) {
  if (branching.empty()) throw ValidationError("depth N must be positive");
  for (std::size_t j = 0; j < branching.size(); ++j)
    if (branching[j] == 0)
      throw ValidationError("branching at level " + std::to_string(j + 1) + " is zero");
  point_count(branching);
}

}  // namespace

std::size_t GenSpecHierarchical::dimension() const {
  std::size_t n = 1;
  for (std::size_t i = 0; i < tree_depth; ++i) n = checked_mul(n, arity, "dimension m^k");
  return n;
}

Validated<GenSpecIndependent> validate_spec(const GenSpecIndependent& spec) {
  validate_branching(spec.branching);
  if (spec.sigmas.size() != spec.branching.size())
    throw ValidationError("expected " + std::to_string(spec.branching.size()) +
                          " sigmas, got " + std::to_string(spec.sigmas.size()));
  for (std::size_t j = 0; j < spec.sigmas.size(); ++j)
    if (!(spec.sigmas[j] >= 0.0) || !std::isfinite(spec.sigmas[j]))
      throw ValidationError("sigma at level " + std::to_string(j + 1) +
                            " must be a finite nonnegative number");
  if (spec.dimension == 0) throw ValidationError("dimension n must be positive");
  if (point_count(spec.branching) < 2)
    throw ValidationError("total point count p_1*...*p_N must be at least 2");
  return {spec, false};
}

Validated<GenSpecHierarchical> validate_spec(const GenSpecHierarchical& spec) {
  validate_branching(spec.branching);
  if (spec.arity < 2) throw ValidationError("arity m must be at least 2");
  if (spec.tree_depth < 1) throw ValidationError("tree depth k must be at least 1");
  if (!(spec.lambda > 0.0) || !std::isfinite(spec.lambda))
    throw ValidationError("lambda must be a finite positive number");
  if (!(spec.sigma >= 0.0) || !std::isfinite(spec.sigma))
    throw ValidationError("sigma must be a finite nonnegative number");
  spec.dimension();
  return {spec, spec.lambda <= 1.0};
}

std::span<const std::size_t> branching_of(const FamilySpec& spec) {
  return std::visit([](const auto& s) { return std::span<const std::size_t>(s.branching); }, spec);
}

std::size_t dimension_of(const FamilySpec& spec) {
  if (const auto* ind = std::get_if<GenSpecIndependent>(&spec)) return ind->dimension;
  return std::get<GenSpecHierarchical>(spec).dimension();
}

std::size_t point_count(std::span<const std::size_t> branching) {
  std::size_t p = 1;
  for (std::size_t b : branching) p = checked_mul(p, b, "point count");
  return p;
}

std::size_t encode_multiindex(std::span<const std::size_t> index,
                              std::span<const std::size_t> branching) {
  if (index.size() != branching.size())
    throw ValidationError("multi-index has " + std::to_string(index.size()) +
                          " levels, branching has " + std::to_string(branching.size()));
  std::size_t ordinal = 0;
  for (std::size_t j = 0; j < index.size(); ++j) {
    if (index[j] < 1 || index[j] > branching[j])
      throw ValidationError("multi-index component at level " + std::to_string(j + 1) +
                            " is " + std::to_string(index[j]) + ", expected 1.." +
                            std::to_string(branching[j]));
    ordinal = ordinal * branching[j] + (index[j] - 1);
  }
  return ordinal;
}

MultiIndex decode_multiindex(std::size_t ordinal, std::span<const std::size_t> branching) {
  const std::size_t total = point_count(branching);
  if (ordinal >= total)
    throw RangeError("ordinal " + std::to_string(ordinal) + " out of range 0.." +
                     std::to_string(total - 1));
  MultiIndex index(branching.size());
  for (std::size_t j = branching.size(); j-- > 0;) {
    index[j] = ordinal % branching[j] + 1;
    ordinal /= branching[j];
  }
  return index;
}

std::vector<MultiIndex> enumerate_multiindices(std::span<const std::size_t> branching) {
  const std::size_t total = point_count(branching);
  std::vector<MultiIndex> out;
  out.reserve(total);
  for (std::size_t o = 0; o < total; ++o) out.push_back(decode_multiindex(o, branching));
  return out;
}

std::size_t first_difference_level(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.size() != b.size()) throw ValidationError("multi-indices differ in depth");
  for (std::size_t j = 0; j < a.size(); ++j)
    if (a[j] != b[j]) return j + 1;
  return a.size() + 1;
}

std::string format_label(std::span<const std::size_t> index) {
  std::string s;
  for (std::size_t j = 0; j < index.size(); ++j) {
    if (j) s += '.';
    s += std::to_string(index[j]);
  }
  return s;
}

MultiIndex parse_label(std::string_view text) {
  MultiIndex index;
  std::size_t pos = 0;
  while (true) {
    const std::size_t dot = text.find('.', pos);
    const std::string_view part = text.substr(pos, dot == std::string_view::npos ? text.npos : dot - pos);
    std::size_t value = 0;
    auto [end, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (part.empty() || ec != std::errc{} || end != part.data() + part.size() || value == 0)
      throw ParseError("malformed multi-index label '" + std::string(text) + "'");
    index.push_back(value);
    if (dot == std::string_view::npos) break;
    pos = dot + 1;
  }
  return index;
}

Seed Seed::child(std::uint64_t index) const {
  Seed s = *this;
  s.path.push_back(index);
  return s;
}

Seed derive_substream(const Seed& seed, std::uint64_t child) { return seed.child(child); }

}  // namespace ultra
