#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "ultra/metric.hpp"
#include "ultra/serial.hpp"
#include "ultra/theory.hpp"
#include "ultra/ultrametry.hpp"

using namespace ultra;

namespace {

Matrix triangle(double d01, double d02, double d12) {
  Matrix d(3, 3, 0.0);
  d(0, 1) = d(1, 0) = d01;
  d(0, 2) = d(2, 0) = d02;
  d(1, 2) = d(2, 1) = d12;
  return d;
}

// Random metric: distances between random points in the plane, optionally
// with heavy ties from rounding.
Matrix random_metric(std::size_t p, std::mt19937_64& gen, bool rounded) {
  std::uniform_real_distribution<double> u(0.0, 10.0);
  Matrix pts(p, 2);
  for (double& v : pts.data()) v = rounded ? std::round(u(gen) / 3) : u(gen);
  return distance_matrix(pts, rounded ? 1.0 : 2.0).entries;
}

// Minimax path cost by exhaustive search over all simple paths.
double minimax_dfs(const Matrix& d, std::size_t at, std::size_t target, std::vector<bool>& seen,
                   double sofar) {
  if (at == target) return sofar;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t next = 0; next < d.rows(); ++next) {
    if (seen[next]) continue;
    seen[next] = true;
    best = std::min(best, minimax_dfs(d, next, target, seen, std::max(sofar, d(at, next))));
    seen[next] = false;
  }
  return best;
}

Matrix brute_subdominant(const Matrix& d) {
  const std::size_t p = d.rows();
  Matrix out(p, p, 0.0);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b) {
      if (a == b) continue;
      std::vector<bool> seen(p, false);
      seen[a] = true;
      out(a, b) = minimax_dfs(d, a, b, seen, 0.0);
    }
  return out;
}

}  // namespace

TEST_CASE("triangle_degree examples") {
  CHECK(triangle_degree(1, 1, 1) == 1.0);
  CHECK(triangle_degree(3, 4, 5) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(triangle_degree(5, 3, 4) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(triangle_degree(14.13, 19.59, 19.86) == doctest::Approx(2 * 19.59 / 19.86 - 1).epsilon(1e-15));
  CHECK(triangle_degree(14.13, 19.59, 19.86) == doctest::Approx(0.97281).epsilon(1e-5));
  CHECK(triangle_degree(0, 0, 0) == 1.0);
  CHECK(triangle_degree(2, 2, 1) == 1.0);
  CHECK(triangle_degree(1, 1, 3) < 0.0);  // violates the triangle inequality; reported as is
  CHECK_THROWS_AS(triangle_degree(-1, 1, 1), DomainError);
  CHECK_THROWS_AS(triangle_degree(1, std::nan(""), 1), DomainError);
}

TEST_CASE("ultrametricity_degree examples") {
  CHECK(ultrametricity_degree(triangle(3, 4, 5)) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK_THROWS_AS(ultrametricity_degree(Matrix(2, 2)), DomainError);
  const auto limit = limit_matrix(std::vector<std::size_t>{2, 2, 2}, std::vector<double>{10, 10, 10});
  CHECK(ultrametricity_degree(limit.entries) == 1.0);
}

TEST_CASE("is_ultrametric examples") {
  const auto r = is_ultrametric(triangle(1, 1, 2), 0.0);
  CHECK_FALSE(r.ultrametric);
  CHECK(r.worst_deficit == 1.0);
  CHECK(r.worst_triple == std::array<std::size_t, 3>{0, 1, 2});
  CHECK(is_ultrametric(Matrix(2, 2, 0.0), 0.0).ultrametric);
  const auto limit = limit_matrix(std::vector<std::size_t>{3, 2, 4}, std::vector<double>{1, 7, 0.5});
  CHECK(is_ultrametric(limit.entries, 1e-12).ultrametric);
}

TEST_CASE("subdominant_ultrametric examples") {
  const Matrix d = triangle(3, 4, 5);
  const Matrix s = subdominant_ultrametric(d);
  CHECK(s == triangle(3, 4, 4));
  CHECK(brute_subdominant(d) == triangle(3, 4, 4));
  const auto limit = limit_matrix(std::vector<std::size_t>{2, 2, 2}, std::vector<double>{10, 10, 10});
  CHECK(subdominant_ultrametric(limit.entries) == limit.entries);
}

TEST_CASE("subdominant agrees with exhaustive minimax search (P <= 6, 200 instances)") {
  std::mt19937_64 gen(2718);
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t p = 2 + static_cast<std::size_t>(inst % 5);
    const Matrix d = random_metric(p, gen, inst % 3 == 0);
    const Matrix s = subdominant_ultrametric(d);
    REQUIRE(s == brute_subdominant(d));
    REQUIRE(serial::subdominant_ultrametric(d) == s);
    if (p >= 3) REQUIRE(is_ultrametric(s, 0.0).ultrametric);
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b < p; ++b) REQUIRE(s(a, b) <= d(a, b));
  }
}

TEST_CASE("U lies in [0, 1] and equals 1 exactly for ultrametric matrices") {
  std::mt19937_64 gen(31);
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t p = 3 + static_cast<std::size_t>(inst % 8);
    const Matrix d = random_metric(p, gen, inst % 2 == 0);
    const double u = ultrametricity_degree(d);
    CHECK(u >= 0.0);
    CHECK(u <= 1.0);
    const bool ultra_flag = is_ultrametric(d, 0.0).ultrametric;
    CHECK((u == 1.0) == ultra_flag);

    const Matrix s = subdominant_ultrametric(d);
    CHECK(ultrametricity_degree(s) == 1.0);
    const auto rep = analyze_ultrametricity(d, 0.0);
    CHECK(rep.degree == doctest::Approx(u).epsilon(1e-14));
    CHECK(rep.min_triangle_degree <= u);
    CHECK(rep.max_triangle_degree >= u);
    CHECK(rep.triples == p * (p - 1) * (p - 2) / 6);
    CHECK((rep.violating_triples == 0) == ultra_flag);
  }
}

TEST_CASE("U is invariant under positive scaling") {
  std::mt19937_64 gen(8);
  for (int inst = 0; inst < 20; ++inst) {
    Matrix d = random_metric(7, gen, false);
    const double u = ultrametricity_degree(d);
    for (double& v : d.data()) v *= 37.5;
    CHECK(ultrametricity_degree(d) == doctest::Approx(u).epsilon(1e-13));
  }
}

TEST_CASE("perturbing an ultrametric entry is detected") {
  const auto limit = limit_matrix(std::vector<std::size_t>{2, 2, 2}, std::vector<double>{10, 10, 10}).entries;
  for (std::size_t a = 0; a < 8; ++a)
    for (std::size_t b = a + 1; b < 8; ++b)
      for (double delta : {-30.0, 30.0}) {
        Matrix d = limit;
        d(a, b) += delta;
        d(b, a) += delta;
        const bool metric = check_metric_axioms(d, 0.0).pass;
        const auto r = is_ultrametric(d, 0.0);
        REQUIRE((!metric || !r.ultrametric));
        if (!r.ultrametric) {
          const auto& t = r.worst_triple;
          const bool touches = (t[0] == a || t[1] == a || t[2] == a) && (t[0] == b || t[1] == b || t[2] == b);
          REQUIRE(touches);
          REQUIRE(r.worst_deficit > 0.0);
        }
      }
}

TEST_CASE("parallel U matches the serial reference") {
  std::mt19937_64 gen(99);
  for (int inst = 0; inst < 10; ++inst) {
    const Matrix d = random_metric(30 + static_cast<std::size_t>(inst), gen, false);
    CHECK(ultrametricity_degree(d) == doctest::Approx(serial::ultrametricity_degree(d)).epsilon(1e-13));
  }
}
