#include "ultra/serial.hpp"

#include <algorithm>

#include "ultra/metric.hpp"
#include "ultra/ultrametry.hpp"

namespace ultra::serial {

DistanceMatrix distance_matrix(const Matrix& points, double alpha) {
  if (!(alpha >= 1.0)) throw DomainError("Minkowski exponent alpha must be >= 1");
  if (points.rows() == 0) throw ShapeError("point cloud is empty");
  const std::size_t p = points.rows();
  DistanceMatrix d{Matrix(p, p), alpha};
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = a + 1; b < p; ++b) {
      const double v = minkowski_distance(points.row(a), points.row(b), alpha);
      d.entries(a, b) = v;
      d.entries(b, a) = v;
    }
  return d;
}

double ultrametricity_degree(const Matrix& d) {
  if (!d.square()) throw ShapeError("matrix must be square");
  const std::size_t p = d.rows();
  if (p < 3) throw DomainError("ultrametricity degree needs at least 3 points");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = a + 1; b < p; ++b)
      for (std::size_t c = b + 1; c < p; ++c) {
        sum += triangle_degree(d(a, b), d(b, c), d(c, a));
        ++count;
      }
  return sum / static_cast<double>(count);
}

Matrix subdominant_ultrametric(const Matrix& d) {
  if (!d.square()) throw ShapeError("matrix must be square");
  const std::size_t p = d.rows();
  Matrix u(p, p);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b) u(a, b) = a == b ? 0.0 : std::min(d(a, b), d(b, a));
  for (std::size_t k = 0; k < p; ++k)
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b < p; ++b) u(a, b) = std::min(u(a, b), std::max(u(a, k), u(k, b)));
  return u;
}

}  // namespace ultra::serial
