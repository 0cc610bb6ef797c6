#include "ultra/theory.hpp"

#include <cmath>

namespace ultra {

LimitMatrix limit_matrix(std::span<const std::size_t> branching, std::span<const double> sigmas) {
  if (branching.size() != sigmas.size())
    throw ValidationError("branching and sigmas differ in length");
  if (branching.empty()) throw ValidationError("depth N must be positive");
  for (double s : sigmas)
    if (!(s >= 0.0) || !std::isfinite(s)) throw ValidationError("sigmas must be finite and >= 0");

  const std::size_t depth = branching.size();
  // suffix[j - 1] = sigma_N^2 + ... + sigma_j^2, accumulated from level N down.
  std::vector<double> suffix(depth + 1, 0.0);
  double acc = 0.0;
  for (std::size_t l = depth; l-- > 0;) {
    acc += sigmas[l] * sigmas[l];
    suffix[l] = acc;
  }

  const auto labels = enumerate_multiindices(branching);
  const std::size_t p = labels.size();
  LimitMatrix lm{Matrix(p, p), Matrix(p, p), {sigmas.begin(), sigmas.end()},
                 {branching.begin(), branching.end()}};
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b) {
      const std::size_t j = first_difference_level(labels[a], labels[b]);
      const double sq = 2.0 * suffix[j - 1];
      lm.squared(a, b) = sq;
      lm.entries(a, b) = std::sqrt(sq);
    }
  return lm;
}

double expected_squared_difference(std::span<const std::size_t> a, std::span<const std::size_t> b,
                                   std::span<const double> sigmas) {
  if (a.size() != b.size() || a.size() != sigmas.size())
    throw ValidationError("multi-indices and sigmas must have the same depth");
  // prefix_equal[l] = delta_{a_1 b_1} ... delta_{a_{l+1} b_{l+1}}
  std::vector<int> prefix_equal(a.size());
  int product = 1;
  for (std::size_t l = 0; l < a.size(); ++l) {
    product *= a[l] == b[l] ? 1 : 0;
    prefix_equal[l] = product;
  }
  double sum = 0.0;
  for (std::size_t l = a.size(); l-- > 0;) sum += (1 - prefix_equal[l]) * (sigmas[l] * sigmas[l]);
  return 2.0 * sum;
}

double hier_variance_direct(std::size_t k, double lambda, double sigma) {
  double sum = 0.0;
  for (std::size_t j = k; j-- > 0;) sum += std::pow(lambda, -2.0 * static_cast<double>(j));
  return sigma * sigma * sum;
}

double hier_variance(std::size_t k, double lambda, double sigma) {
  if (k < 1) throw DomainError("tree depth k must be at least 1");
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  const double q = 1.0 / (lambda * lambda);
  if (std::fabs(1.0 - q) < 1e-6) return hier_variance_direct(k, lambda, sigma);
  return sigma * sigma * (1.0 - std::pow(q, static_cast<double>(k))) / (1.0 - q);
}

double hier_covariance(std::size_t r, std::size_t k, double lambda, double sigma) {
  if (k < 1) throw DomainError("tree depth k must be at least 1");
  if (r < 1 || r > k + 1)
    throw RangeError("divergence position r must lie in 1.." + std::to_string(k + 1));
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  double sum = 0.0;
  for (std::size_t s = 1; s < r; ++s) sum += std::pow(lambda, -2.0 * static_cast<double>(k - s));
  return sigma * sigma * sum;
}

MomentSummary moment_summary(std::size_t k, double lambda, double sigma) {
  MomentSummary m;
  m.variance = hier_variance(k, lambda, sigma);
  m.step_sigma = std::sqrt(m.variance);
  for (std::size_t r = 1; r <= k; ++r) m.covariance_by_r.push_back(hier_covariance(r, k, lambda, sigma));
  return m;
}

std::vector<double> effective_sigmas(const GenSpecHierarchical& spec) {
  validate_spec(spec);
  return std::vector<double>(spec.depth(),
                             std::sqrt(hier_variance(spec.tree_depth, spec.lambda, spec.sigma)));
}

std::vector<double> divergence_class_counts(std::size_t m, std::size_t k) {
  std::vector<double> counts;
  const double md = static_cast<double>(m);
  for (std::size_t r = 1; r <= k; ++r)
    counts.push_back(std::pow(md, static_cast<double>(r - 1)) * (md * (md - 1.0) / 2.0) *
                     std::pow(md, 2.0 * static_cast<double>(k - r)));
  return counts;
}

double markov_condition_sum(const GenSpecHierarchical& spec, int l1, int l2) {
  if ((l1 != 1 && l1 != 2) || (l2 != 1 && l2 != 2))
    throw DomainError("moment orders l1, l2 must be 1 or 2");
  validate_spec(spec);
  if (l1 != l2) return 0.0;

  const std::size_t k = spec.tree_depth;
  const double n = static_cast<double>(spec.dimension());
  const double fields = static_cast<double>(spec.depth());
  const auto counts = divergence_class_counts(spec.arity, k);
  double sum = 0.0;
  for (std::size_t r = 1; r <= k; ++r) {
    const double c = fields * hier_covariance(r, k, spec.lambda, spec.sigma);
    sum += counts[r - 1] * (l1 == 1 ? c : 2.0 * c * c);
  }
  return sum / (n * n);
}

}  // namespace ultra
