#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "nodal_lab/nodal_lab.hpp"

namespace nl_test {

using namespace nodal_lab;

inline std::vector<Point> disk_points(std::uint64_t seed, int count, int n = 2, double radius = 1.0) {
  nodal_lab::SeededUniform rng(seed);
  std::vector<Point> out;
  while (static_cast<int>(out.size()) < count) {
    Point p{};
    for (int a = 0; a < n; ++a) p[a] = rng.next();
    if (nodal_lab::norm2(p) <= 1.0) out.push_back(radius * p);
  }
  return out;
}

inline double central_diff(const std::function<double(const Point&)>& f, Point x, int axis, double h = 1e-5) {
  Point a = x, b = x;
  a[axis] += h;
  b[axis] -= h;
  return (f(a) - f(b)) / (2.0 * h);
}

inline double fd_laplacian(const std::function<double(const Point&)>& f, const Point& x, int n, double h = 1e-3) {
  double s = 0.0;
  for (int a = 0; a < n; ++a) {
    Point p = x, q = x;
    p[a] += h;
    q[a] -= h;
    s += (f(p) - 2.0 * f(x) + f(q)) / (h * h);
  }
  return s;
}

/// Composite midpoint rule on [0, R] x [0, 2 pi) in polar coordinates, independent of the library quadrature.
inline double polar_midpoint(const std::function<double(double r, double t)>& g, double R, int nr = 400, int nt = 400) {
  double s = 0.0;
  const double dr = R / nr, dt = 2.0 * M_PI / nt;
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nt; ++j) {
      const double r = (i + 0.5) * dr, t = (j + 0.5) * dt;
      s += g(r, t) * r * dr * dt;
    }
  return s;
}

}  // namespace nl_test
