#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace nodal_lab {

/// Points and vectors in R^n for n <= 3. Unused trailing components stay zero,
/// so dot products and norms are valid regardless of the active dimension.
using Point = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;
using Tensor3 = std::array<Mat3, 3>;

inline Point operator+(Point a, const Point& b) {
  for (std::size_t i = 0; i < 3; ++i) a[i] += b[i];
  return a;
}

inline Point operator-(Point a, const Point& b) {
  for (std::size_t i = 0; i < 3; ++i) a[i] -= b[i];
  return a;
}

inline Point operator*(double s, Point a) {
  for (auto& c : a) c *= s;
  return a;
}

inline double dot(const Point& a, const Point& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline double norm2(const Point& a) { return dot(a, a); }
inline double norm(const Point& a) { return std::sqrt(norm2(a)); }
inline double distance(const Point& a, const Point& b) { return norm(a - b); }

inline Point make_point(double x, double y, double z = 0.0) { return {x, y, z}; }

inline double frobenius2(const Mat3& m) {
  double s = 0.0;
  for (const auto& row : m)
    for (double v : row) s += v * v;
  return s;
}

inline double frobenius2(const Tensor3& t) {
  double s = 0.0;
  for (const auto& m : t) s += frobenius2(m);
  return s;
}

}  // namespace nodal_lab
