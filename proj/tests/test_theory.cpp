#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "ultra/generate.hpp"
#include "ultra/theory.hpp"
#include "ultra/ultrametry.hpp"

using namespace ultra;

namespace {

// Field coordinate i of an m-ary depth-k tree, written as its k ancestor
// prefixes; coefficient of the prefix of length s is lambda^{-(k-s)}.
// Covariance = sigma^2 * sum over shared prefixes of the squared coefficient.
double xi_expansion_cov(std::size_t i, std::size_t j, std::size_t m, std::size_t k, double lambda,
                        double sigma) {
  std::vector<std::size_t> ti(k), tj(k);
  for (std::size_t t = k; t-- > 0;) {
    ti[t] = i % m;
    tj[t] = j % m;
    i /= m;
    j /= m;
  }
  double s = 0;
  for (std::size_t len = 1; len <= k; ++len) {
    bool shared = true;
    for (std::size_t t = 0; t < len; ++t) shared = shared && ti[t] == tj[t];
    if (shared) {
      const double c = std::pow(lambda, -static_cast<double>(k - len));
      s += c * c;
    }
  }
  return sigma * sigma * s;
}

std::size_t divergence_position(std::size_t i, std::size_t j, std::size_t m, std::size_t k) {
  std::vector<std::size_t> ti(k), tj(k);
  for (std::size_t t = k; t-- > 0;) {
    ti[t] = i % m;
    tj[t] = j % m;
    i /= m;
    j /= m;
  }
  std::size_t r = 0;
  while (r < k && ti[r] == tj[r]) ++r;
  return r + 1;
}

// (1/n^2) sum_{i<j} cov over all ordered pairs of coordinates of one point
// made of `fields` independent fields.
double brute_markov(std::size_t m, std::size_t k, double lambda, double sigma, std::size_t fields,
                    int l) {
  std::size_t n = 1;
  for (std::size_t t = 0; t < k; ++t) n *= m;
  double sum = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double c = static_cast<double>(fields) * xi_expansion_cov(i, j, m, k, lambda, sigma);
      sum += l == 1 ? c : 2 * c * c;
    }
  return sum / 2 / static_cast<double>(n * n);
}

}  // namespace

TEST_CASE("limit matrix for p = (2,2,2), sigma = (10,10,10)") {
  const auto lm = limit_matrix(std::vector<std::size_t>{2, 2, 2}, std::vector<double>{10, 10, 10});
  const auto labels = enumerate_multiindices(std::vector<std::size_t>{2, 2, 2});
  const double expected[] = {10 * std::sqrt(2.0), 20.0, 10 * std::sqrt(6.0)};
  std::set<double> distinct;
  for (std::size_t a = 0; a < 8; ++a)
    for (std::size_t b = 0; b < 8; ++b) {
      const double v = lm.entries(a, b);
      if (a == b) {
        CHECK(v == 0.0);
        continue;
      }
      distinct.insert(v);
      // level 3 difference -> sqrt(2) * 10, level 2 -> 20, level 1 -> sqrt(6) * 10
      const std::size_t j = first_difference_level(labels[a], labels[b]);
      CHECK(v == doctest::Approx(expected[3 - j]).epsilon(1e-15));
      CHECK(v == lm.entries(b, a));
    }
  CHECK(distinct.size() == 3);
  CHECK(ultrametricity_degree(lm.entries) == 1.0);
}

TEST_CASE("expected_squared_difference examples") {
  const std::vector<double> s2{3.0, 0.7};
  CHECK(expected_squared_difference(MultiIndex{1, 1}, MultiIndex{1, 2}, s2) == 2 * 0.7 * 0.7);
  CHECK(expected_squared_difference(MultiIndex{2, 1}, MultiIndex{1, 1}, s2) ==
        doctest::Approx(2 * (9 + 0.49)).epsilon(1e-15));
  CHECK(expected_squared_difference(MultiIndex{2, 3, 1}, MultiIndex{2, 3, 1}, std::vector<double>{1, 2, 3}) == 0.0);
  CHECK(expected_squared_difference(MultiIndex{1, 1, 1}, MultiIndex{2, 1, 1}, std::vector<double>{10, 10, 10}) == 600.0);
  CHECK_THROWS_AS(expected_squared_difference(MultiIndex{1}, MultiIndex{1, 1}, s2), ValidationError);
}

TEST_CASE("squared limit entries equal expected_squared_difference bit for bit") {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(0.0, 20.0);
  std::uniform_int_distribution<std::size_t> br(1, 4);
  for (int inst = 0; inst < 50; ++inst) {
    const std::size_t depth = 1 + static_cast<std::size_t>(inst % 4);
    std::vector<std::size_t> p(depth);
    std::vector<double> s(depth);
    for (auto& v : p) v = br(gen);
    for (auto& v : s) v = u(gen);
    const auto lm = limit_matrix(p, s);
    const auto labels = enumerate_multiindices(p);
    for (std::size_t a = 0; a < labels.size(); ++a)
      for (std::size_t b = 0; b < labels.size(); ++b) {
        REQUIRE(lm.squared(a, b) == expected_squared_difference(labels[a], labels[b], s));
        REQUIRE(lm.entries(a, b) == std::sqrt(lm.squared(a, b)));
      }
    if (labels.size() >= 3) CHECK(is_ultrametric(lm.entries, 0.0).ultrametric);
  }
}

TEST_CASE("hier_variance") {
  CHECK(hier_variance(1, 3.0, 2.0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(hier_variance(4, 1.0, 1.0) == 4.0);
  CHECK(hier_variance(3, 2.0, 10.0) == doctest::Approx(131.25).epsilon(1e-14));
  CHECK(hier_variance(3, 2.0, 10.0) == doctest::Approx(100 * (1 + 0.25 + 0.0625)).epsilon(1e-14));
  // Continuity across the lambda ~ 1 switch.
  for (double lambda : {1.0 - 1e-5, 1.0 - 1e-8, 1.0 + 1e-8, 1.0 + 1e-5, 0.8, 1.2, 10.0})
    for (std::size_t k : {1u, 4u, 11u})
      CHECK(hier_variance(k, lambda, 1.5) == doctest::Approx(hier_variance_direct(k, lambda, 1.5)).epsilon(1e-9));
  CHECK_THROWS_AS(hier_variance(0, 2.0, 1.0), DomainError);
  CHECK_THROWS_AS(hier_variance(3, 0.0, 1.0), DomainError);
}

TEST_CASE("hier_covariance") {
  CHECK(hier_covariance(1, 3, 2.0, 10.0) == 0.0);
  CHECK(hier_covariance(3, 3, 2.0, 10.0) == doctest::Approx(31.25).epsilon(1e-15));
  CHECK(hier_covariance(4, 3, 2.0, 10.0) == doctest::Approx(hier_variance(3, 2.0, 10.0)).epsilon(1e-14));
  CHECK_THROWS_AS(hier_covariance(0, 3, 2.0, 1.0), RangeError);
  CHECK_THROWS_AS(hier_covariance(5, 3, 2.0, 1.0), RangeError);

  SUBCASE("matches the xi-expansion oracle for every coordinate pair") {
    for (std::size_t m : {2u, 3u})
      for (std::size_t k = 1; k <= 6; ++k) {
        if (m == 3 && k > 4) continue;
        std::size_t n = 1;
        for (std::size_t t = 0; t < k; ++t) n *= m;
        for (double lambda : {0.8, 1.0, 1.2, 2.0, 10.0})
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
              const std::size_t r = divergence_position(i, j, m, k);
              REQUIRE(hier_covariance(r, k, lambda, 1.3) ==
                      doctest::Approx(xi_expansion_cov(i, j, m, k, lambda, 1.3)).epsilon(1e-13));
            }
      }
  }
  SUBCASE("covariance shrinks as the shared prefix shortens") {
    for (double lambda : {0.8, 1.2, 2.0, 10.0}) {
      const auto ms = moment_summary(5, lambda, 2.0);
      CHECK(ms.mean == 0.0);
      REQUIRE(ms.covariance_by_r.size() == 5);
      for (std::size_t r = 1; r < 5; ++r) CHECK(ms.covariance_by_r[r] >= ms.covariance_by_r[r - 1]);
      CHECK(ms.variance >= ms.covariance_by_r.back());
      CHECK(ms.step_sigma == doctest::Approx(std::sqrt(ms.variance)));
    }
  }
}

TEST_CASE("effective_sigmas") {
  CHECK(effective_sigmas(GenSpecHierarchical{{2, 2}, 2, 3, 2.0, 0.0}) == std::vector<double>{0.0, 0.0});
  for (double s : effective_sigmas(GenSpecHierarchical{{2, 2, 2}, 2, 3, 2.0, 10.0}))
    CHECK(s == doctest::Approx(11.4564392373896).epsilon(1e-12));
  for (double s : effective_sigmas(GenSpecHierarchical{{2}, 2, 6, 1e6, 4.0}))
    CHECK(s == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("divergence class counts partition all coordinate pairs") {
  for (std::size_t m : {2u, 3u, 5u})
    for (std::size_t k = 1; k <= 6; ++k) {
      double total = 0;
      for (double c : divergence_class_counts(m, k)) total += c;
      const double n = std::pow(static_cast<double>(m), static_cast<double>(k));
      CHECK(total == n * (n - 1) / 2);
    }
  std::vector<double> by_r(4, 0.0);
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t j = i + 1; j < 16; ++j) by_r[divergence_position(i, j, 2, 4) - 1] += 1;
  CHECK(divergence_class_counts(2, 4) == by_r);
}

TEST_CASE("markov_condition_sum") {
  const GenSpecHierarchical base{{2, 2, 2}, 2, 4, 2.0, 1.0};
  CHECK(markov_condition_sum(base, 2, 1) == 0.0);
  CHECK(markov_condition_sum(base, 1, 2) == 0.0);
  CHECK(markov_condition_sum(GenSpecHierarchical{{2, 2, 2}, 2, 4, 2.0, 0.0}, 1, 1) == 0.0);
  CHECK(markov_condition_sum(GenSpecHierarchical{{2, 2, 2}, 2, 4, 2.0, 0.0}, 2, 2) == 0.0);
  CHECK_THROWS_AS(markov_condition_sum(base, 3, 1), DomainError);

  SUBCASE("k = 4 matches brute-force summation over all coordinate pairs") {
    for (std::size_t depth : {1u, 3u})
      for (int l : {1, 2}) {
        GenSpecHierarchical spec{std::vector<std::size_t>(depth, 2), 2, 4, 2.0, 1.0};
        CHECK(markov_condition_sum(spec, l, l) ==
              doctest::Approx(brute_markov(2, 4, 2.0, 1.0, depth, l)).epsilon(1e-12));
      }
    GenSpecHierarchical odd{{3}, 3, 3, 1.2, 0.7};
    CHECK(markov_condition_sum(odd, 1, 1) == doctest::Approx(brute_markov(3, 3, 1.2, 0.7, 1, 1)).epsilon(1e-12));
  }
  SUBCASE("decays in k for lambda = 2") {
    for (int l : {1, 2}) {
      double prev = std::numeric_limits<double>::infinity();
      for (std::size_t k = 4; k <= 12; ++k) {
        const double v = markov_condition_sum(GenSpecHierarchical{{2, 2, 2}, 2, k, 2.0, 1.0}, l, l);
        CHECK(v < prev);
        prev = v;
      }
      CHECK(prev < 1e-3);
    }
  }
  SUBCASE("Monte Carlo: variance of the coordinate sum") {
    // Var(sum_i y_i) = n Var(y) + 2 n^2 * markov_condition_sum(1, 1)
    const GenSpecHierarchical spec{{1, 1}, 2, 3, 1.5, 2.0};
    const double n = 8;
    const double analytic =
        n * 2 * hier_variance(3, 1.5, 2.0) + 2 * n * n * markov_condition_sum(spec, 1, 1);
    const std::size_t R = 20000;
    std::vector<double> sums(R);
    for (std::size_t r = 0; r < R; ++r) {
      const auto c = generate_hierarchical(spec, Seed{404, {r}});
      double s = 0;
      for (std::size_t i = 0; i < 8; ++i) s += c.points(0, i);
      sums[r] = s * s;  // zero mean
    }
    double mean = 0, ss = 0;
    for (double v : sums) mean += v;
    mean /= static_cast<double>(R);
    for (double v : sums) ss += (v - mean) * (v - mean);
    const double se = std::sqrt(ss / static_cast<double>(R - 1) / static_cast<double>(R));
    CHECK(std::fabs(mean - analytic) < 4 * se);
  }
}
