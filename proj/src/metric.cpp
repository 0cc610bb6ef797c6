#include "ultra/metric.hpp"

#include <cmath>

namespace ultra {
namespace {

void check_alpha(double alpha) {
  if (!(alpha >= 1.0))
    throw DomainError("Minkowski exponent alpha must be >= 1 (got " + std::to_string(alpha) + ")");
}

}  // namespace

double minkowski_distance(std::span<const double> x, std::span<const double> y, double alpha) {
  check_alpha(alpha);
  if (x.size() != y.size()) throw ShapeError("points differ in dimension");
  if (x.empty()) throw ShapeError("points have zero dimension");
  const std::size_t n = x.size();

  if (std::isinf(alpha)) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(x[i] - y[i]));
    return m;
  }
  double sum = 0.0;
  if (alpha == 2.0) {
    for (std::size_t i = 0; i < n; ++i) {
      const double diff = x[i] - y[i];
      sum += diff * diff;
    }
    return std::sqrt(sum) / std::sqrt(static_cast<double>(n));
  }
  if (alpha == 1.0) {
    for (std::size_t i = 0; i < n; ++i) sum += std::fabs(x[i] - y[i]);
    return sum / static_cast<double>(n);
  }
  for (std::size_t i = 0; i < n; ++i) sum += std::pow(std::fabs(x[i] - y[i]), alpha);
  return std::pow(sum / static_cast<double>(n), 1.0 / alpha);
}

DistanceMatrix distance_matrix(const Matrix& points, double alpha) {
  check_alpha(alpha);
  if (points.rows() == 0) throw ShapeError("point cloud is empty");
  if (points.cols() == 0) throw ShapeError("points have zero dimension");
  const std::size_t p = points.rows();
  DistanceMatrix d{Matrix(p, p), alpha};

#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = a + 1; b < p; ++b) {
      const double v = minkowski_distance(points.row(a), points.row(b), alpha);
      d.entries(a, b) = v;
      d.entries(b, a) = v;
    }
  }
  return d;
}

DistanceMatrix distance_matrix(const PointCloud& cloud, double alpha) {
  return distance_matrix(cloud.points, alpha);
}

MetricReport check_metric_axioms(const Matrix& d, double tol) {
  if (!d.square())
    throw ShapeError("distance matrix is " + std::to_string(d.rows()) + "x" +
                     std::to_string(d.cols()) + ", expected square");
  MetricReport r;
  r.scale = d.max_abs();
  const std::size_t p = d.rows();

  for (std::size_t a = 0; a < p; ++a) {
    r.worst_diagonal = std::max(r.worst_diagonal, std::fabs(d(a, a)));
    for (std::size_t b = 0; b < p; ++b) {
      r.most_negative = std::min(r.most_negative, d(a, b));
      const double asym = std::fabs(d(a, b) - d(b, a));
      if (asym > r.worst_asymmetry) {
        r.worst_asymmetry = asym;
        r.worst_asymmetric_pair = {std::min(a, b), std::max(a, b)};
      }
    }
  }
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b) {
      if (a == b) continue;
      for (std::size_t c = 0; c < p; ++c) {
        if (c == a || c == b) continue;
        const double deficit = d(a, b) - d(a, c) - d(c, b);
        if (deficit > r.worst_triangle_deficit) {
          r.worst_triangle_deficit = deficit;
          r.worst_triangle = {a, b, c};
        }
      }
    }

  const double limit = tol * r.scale;
  r.pass = r.worst_triangle_deficit <= limit && r.worst_asymmetry <= limit &&
           r.worst_diagonal <= limit && -r.most_negative <= limit;
  return r;
}

}  // namespace ultra
