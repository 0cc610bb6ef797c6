#include "ultra/ultrametry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace ultra {
namespace {

void require_square(const Matrix& d) {
  if (!d.square())
    throw ShapeError("matrix is " + std::to_string(d.rows()) + "x" + std::to_string(d.cols()) +
                     ", expected square");
}

}  // namespace

double triangle_degree(double d_ab, double d_bc, double d_ca) {
  if (d_ab < 0.0 || d_bc < 0.0 || d_ca < 0.0 || std::isnan(d_ab) || std::isnan(d_bc) ||
      std::isnan(d_ca))
    throw DomainError("triangle sides must be nonnegative");
  std::array<double, 3> s{d_ab, d_bc, d_ca};
  std::sort(s.begin(), s.end());
  if (s[2] == 0.0) return 1.0;
  return 2.0 * s[1] / s[2] - 1.0;
}

double ultrametricity_degree(const Matrix& d) {
  require_square(d);
  const std::size_t p = d.rows();
  if (p < 3) throw DomainError("ultrametricity degree needs at least 3 points");
  for (double v : d.data())
    if (!(v >= 0.0)) throw DomainError("distance entries must be nonnegative");

  std::vector<double> partial(p, 0.0);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t a = 0; a < p - 2; ++a) {
    double sum = 0.0;
    for (std::size_t b = a + 1; b < p; ++b)
      for (std::size_t c = b + 1; c < p; ++c) sum += triangle_degree(d(a, b), d(b, c), d(c, a));
    partial[a] = sum;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  const double triples = static_cast<double>(p) * static_cast<double>(p - 1) *
                         static_cast<double>(p - 2) / 6.0;
  return total / triples;
}

UltrametricReport is_ultrametric(const Matrix& d, double tol) {
  require_square(d);
  UltrametricReport r;
  const std::size_t p = d.rows();
  const double limit = tol * d.max_abs();
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = a + 1; b < p; ++b)
      for (std::size_t c = b + 1; c < p; ++c) {
        std::array<double, 3> s{d(a, b), d(b, c), d(c, a)};
        std::sort(s.begin(), s.end());
        const double deficit = s[2] - s[1];
        if (deficit > r.worst_deficit) {
          r.worst_deficit = deficit;
          r.worst_triple = {a, b, c};
        }
      }
  r.ultrametric = r.worst_deficit <= limit;
  return r;
}

UltrametricityReport analyze_ultrametricity(const Matrix& d, double tol) {
  UltrametricityReport r;
  r.degree = ultrametricity_degree(d);
  r.strong = is_ultrametric(d, tol);
  const double limit = tol * d.max_abs();
  const std::size_t p = d.rows();
  r.min_triangle_degree = std::numeric_limits<double>::infinity();
  r.max_triangle_degree = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = a + 1; b < p; ++b)
      for (std::size_t c = b + 1; c < p; ++c) {
        const double u = triangle_degree(d(a, b), d(b, c), d(c, a));
        r.min_triangle_degree = std::min(r.min_triangle_degree, u);
        r.max_triangle_degree = std::max(r.max_triangle_degree, u);
        std::array<double, 3> s{d(a, b), d(b, c), d(c, a)};
        std::sort(s.begin(), s.end());
        if (s[2] - s[1] > limit) ++r.violating_triples;
        ++r.triples;
      }
  return r;
}

Matrix subdominant_ultrametric(const Matrix& d) {
  require_square(d);
  const std::size_t p = d.rows();
  Matrix u(p, p);
  if (p == 0) return u;

  // Prim's algorithm, recording the order vertices join the tree and their
  // attaching edge. The minimax cost from a new vertex v to any tree vertex w
  // is max(edge(v), u(parent(v), w)).
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<bool> in_tree(p, false);
  std::vector<double> best(p, inf);
  std::vector<std::size_t> parent(p, 0);
  std::vector<std::size_t> order;
  order.reserve(p);
  best[0] = 0.0;
  for (std::size_t step = 0; step < p; ++step) {
    std::size_t v = p;
    for (std::size_t i = 0; i < p; ++i)
      if (!in_tree[i] && (v == p || best[i] < best[v])) v = i;
    in_tree[v] = true;
    for (std::size_t w : order) {
      const double via = std::max(best[v], u(parent[v], w));
      u(v, w) = via;
      u(w, v) = via;
    }
    if (!order.empty()) {
      u(v, parent[v]) = best[v];
      u(parent[v], v) = best[v];
    }
    order.push_back(v);
    for (std::size_t i = 0; i < p; ++i) {
      if (in_tree[i]) continue;
      const double w = std::min(d(v, i), d(i, v));
      if (w < best[i]) {
        best[i] = w;
        parent[i] = v;
      }
    }
  }
  return u;
}

}  // namespace ultra
