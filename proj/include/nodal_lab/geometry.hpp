#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "nodal_lab/errors.hpp"
#include "nodal_lab/point.hpp"
#include "nodal_lab/region.hpp"

namespace nodal_lab {

inline constexpr double kPi = std::numbers::pi;

/// Balls must stay inside this radius when the metric is not Euclidean.
inline constexpr double kChartRadius = 1.0;

enum class MetricFamily { identity, conformal, bump };

inline std::string to_string(MetricFamily f) {
  switch (f) {
    case MetricFamily::identity: return "identity";
    case MetricFamily::conformal: return "conformal";
    case MetricFamily::bump: return "bump";
  }
  return "?";
}

inline MetricFamily metric_family_from_string(const std::string& s) {
  if (s == "identity" || s == "euclidean") return MetricFamily::identity;
  if (s == "conformal") return MetricFamily::conformal;
  if (s == "bump") return MetricFamily::bump;
  throw InvalidInput("unknown metric family '" + s + "'");
}

/// Tangent frame (e_theta, e_phi) of the unit sphere at direction w, from spherical angles.
/// At the poles the phi = 0 limit is used.
inline std::pair<Point, Point> sphere_frame(const Point& w) {
  const double theta = std::acos(std::clamp(w[2], -1.0, 1.0));
  const double phi = (w[0] == 0.0 && w[1] == 0.0) ? 0.0 : std::atan2(w[1], w[0]);
  return {Point{std::cos(theta) * std::cos(phi), std::cos(theta) * std::sin(phi), -std::sin(theta)},
          Point{-std::sin(phi), std::cos(phi), 0.0}};
}

/// g = dr (x) dr + r^2 b_ij(r, w) e^i e^j in polar normal form around a ball center,
/// where e^i is an orthonormal coframe of the round sphere (the angle direction for n = 2,
/// the (theta, phi) frame for n = 3).
///   identity:  b = I
///   conformal: b = (1 + s r) I,            |s| <= 1,   Lambda = |s|
///   bump:      n = 2: b = 1 + a r w_x;  n = 3: b = [[1, a r w_x], [a r w_x, 1]],  |a| <= 0.2,  Lambda = |a|
class PolarMetric {
 public:
  PolarMetric() = default;
  PolarMetric(int n, MetricFamily family, double param = 0.0) : n_(n), family_(family), param_(param) {
    if (n != 2 && n != 3) throw InvalidInput("metric dimension must be 2 or 3");
    if (family == MetricFamily::conformal && std::abs(param) > 1.0)
      throw InvalidInput("conformal metric needs |s| <= 1");
    if (family == MetricFamily::bump && std::abs(param) > 0.2) throw InvalidInput("bump metric needs |a| <= 0.2");
    if (family == MetricFamily::identity) param_ = 0.0;
  }

  static PolarMetric euclidean(int n = 2) { return PolarMetric(n, MetricFamily::identity); }

  int dim() const { return n_; }
  MetricFamily family() const { return family_; }
  double param() const { return param_; }
  bool is_euclidean() const { return family_ == MetricFamily::identity || param_ == 0.0; }
  double lambda() const { return std::abs(param_); }

  std::string id() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s(%.17g)", to_string(family_).c_str(), param_);
    return buf;
  }

  /// b at radius r and unit direction w, as an (n-1)x(n-1) block of a Mat3.
  Mat3 b(double r, const Point& w) const {
    Mat3 m{};
    for (int i = 0; i < n_ - 1; ++i) m[i][i] = 1.0;
    switch (family_) {
      case MetricFamily::identity: break;
      case MetricFamily::conformal:
        for (int i = 0; i < n_ - 1; ++i) m[i][i] = 1.0 + param_ * r;
        break;
      case MetricFamily::bump:
        if (n_ == 2) m[0][0] = 1.0 + param_ * r * w[0];
        else m[0][1] = m[1][0] = param_ * r * w[0];
        break;
    }
    return m;
  }

  /// d b / d r, same layout as b().
  Mat3 b_radial_derivative(const Point& w) const {
    Mat3 m{};
    switch (family_) {
      case MetricFamily::identity: break;
      case MetricFamily::conformal:
        for (int i = 0; i < n_ - 1; ++i) m[i][i] = param_;
        break;
      case MetricFamily::bump:
        if (n_ == 2) m[0][0] = param_ * w[0];
        else m[0][1] = m[1][0] = param_ * w[0];
        break;
    }
    return m;
  }

  double det_b(double r, const Point& w) const {
    const Mat3 m = b(r, w);
    return n_ == 2 ? m[0][0] : m[0][0] * m[1][1] - m[0][1] * m[1][0];
  }

  double sqrt_det_b(double r, const Point& w) const { return std::sqrt(det_b(r, w)); }

  /// Metric inner product of two Euclidean gradients at offset x from the ball center.
  double inner(const Point& x, const Point& g1, const Point& g2) const {
    const double r = norm(x);
    if (family_ == MetricFamily::identity || r == 0.0) return dot(g1, g2);
    const Point w = (1.0 / r) * x;
    const double a1 = dot(g1, w), a2 = dot(g2, w);
    const Mat3 m = b(r, w);
    if (n_ == 2) {
      const Point e{-w[1], w[0], 0.0};
      return a1 * a2 + dot(g1, e) * dot(g2, e) / m[0][0];
    }
    const auto [e1, e2] = sphere_frame(w);
    const double s1 = dot(g1, e1), t1 = dot(g1, e2), s2 = dot(g2, e1), t2 = dot(g2, e2);
    const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    // b^{-1} = [[m11, -m01], [-m10, m00]] / det
    return a1 * a2 + (s1 * (m[1][1] * s2 - m[0][1] * t2) + t1 * (-m[1][0] * s2 + m[0][0] * t2)) / det;
  }

  double norm2(const Point& x, const Point& g) const { return inner(x, g, g); }

  bool operator==(const PolarMetric&) const = default;

 private:
  int n_ = 2;
  MetricFamily family_ = MetricFamily::identity;
  double param_ = 0.0;
};

struct QuadratureRule {
  std::vector<Point> nodes;
  std::vector<double> weights;
  int exactness = 0;

  std::size_t size() const { return nodes.size(); }

  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
    return s;
  }

  void write_csv(std::ostream& os) const {
    os << "x,y,z,weight\n";
    char buf[128];
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", nodes[i][0], nodes[i][1], nodes[i][2], weights[i]);
      os << buf;
    }
  }
};

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_m.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int m) {
  if (m < 1) throw InvalidInput("Gauss-Legendre needs at least one node");
  std::vector<double> x(m), w(m);
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (z * p1 - p0) / (z * z - 1.0);
    }
    x[i] = -z;
    x[m - 1 - i] = z;
    w[i] = w[m - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  if (m % 2 == 1) x[m / 2] = 0.0;
  return {x, w};
}

namespace detail {

inline void check_ball(const PolarMetric& metric, const Ball& ball, int degree) {
  if (!(ball.radius > 0.0)) throw InvalidInput("quadrature: radius must be positive");
  if (degree < 1) throw InvalidInput("quadrature: degree must be >= 1");
  if (!metric.is_euclidean() && ball.radius > kChartRadius * (1.0 + 1e-12))
    throw InvalidInput("quadrature: ball leaves the metric chart (radius > 1)");
}

/// Unit directions with surface weights on S^{n-1}, exact for polynomials up to `degree`.
inline std::vector<std::pair<Point, double>> sphere_directions(int n, int degree) {
  std::vector<std::pair<Point, double>> out;
  const int nphi = degree + 2;
  if (n == 2) {
    for (int j = 0; j < nphi; ++j) {
      const double t = 2.0 * kPi * j / nphi;
      out.push_back({Point{std::cos(t), std::sin(t), 0.0}, 2.0 * kPi / nphi});
    }
    return out;
  }
  const auto [c, wc] = gauss_legendre(degree / 2 + 1);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double s = std::sqrt(1.0 - c[i] * c[i]);
    for (int j = 0; j < nphi; ++j) {
      const double t = 2.0 * kPi * j / nphi;
      out.push_back({Point{s * std::cos(t), s * std::sin(t), c[i]}, wc[i] * 2.0 * kPi / nphi});
    }
  }
  return out;
}

}  // namespace detail

inline int default_quadrature_degree(int polynomial_degree) { return 2 * polynomial_degree + 8; }

/// Gauss-Legendre in r times a sphere rule; weights carry sqrt(det b) r^{n-1}.
inline QuadratureRule ball_quadrature(const PolarMetric& metric, const Ball& ball, int degree) {
  detail::check_ball(metric, ball, degree);
  const int n = metric.dim();
  const auto dirs = detail::sphere_directions(n, degree);
  const auto [xr, wr] = gauss_legendre(degree / 2 + 2);
  QuadratureRule q;
  q.exactness = degree;
  q.nodes.reserve(xr.size() * dirs.size());
  q.weights.reserve(xr.size() * dirs.size());
  for (std::size_t i = 0; i < xr.size(); ++i) {
    const double r = 0.5 * ball.radius * (xr[i] + 1.0);
    const double jr = 0.5 * ball.radius * wr[i] * std::pow(r, n - 1);
    for (const auto& [w, ww] : dirs) {
      q.nodes.push_back(ball.center + r * w);
      q.weights.push_back(jr * ww * metric.sqrt_det_b(r, w));
    }
  }
  return q;
}

inline QuadratureRule sphere_quadrature(const PolarMetric& metric, const Ball& ball, int degree) {
  detail::check_ball(metric, ball, degree);
  const int n = metric.dim();
  const double r = ball.radius;
  QuadratureRule q;
  q.exactness = degree;
  for (const auto& [w, ww] : detail::sphere_directions(n, degree)) {
    q.nodes.push_back(ball.center + r * w);
    q.weights.push_back(std::pow(r, n - 1) * ww * metric.sqrt_det_b(r, w));
  }
  return q;
}

/// A^n congruent subcubes ordered by flat index i_0 + A i_1 + A^2 i_2.
inline std::vector<Cube> cube_partition(const Cube& q, int a) {
  if (a < 2) throw InvalidInput("cube_partition: A must be >= 2");
  const int n = q.dim;
  const double h = q.half_width / a;
  const int total = n == 2 ? a * a : a * a * a;
  std::vector<Cube> out;
  out.reserve(total);
  for (int idx = 0; idx < total; ++idx) {
    Point c = q.center;
    int rem = idx;
    for (int ax = 0; ax < n; ++ax) {
      const int i = rem % a;
      rem /= a;
      c[ax] = q.center[ax] - q.half_width + (2 * i + 1) * h;
    }
    auto lineage = q.lineage;
    lineage.push_back(idx);
    out.emplace_back(n, c, h, std::move(lineage));
  }
  return out;
}

/// Rebuilds a cube from its root and a lineage path, given the subdivision factor.
inline Cube cube_from_lineage(const Cube& root, const std::vector<int>& path, int a) {
  Cube c = root;
  for (int idx : path) c = cube_partition(c, a).at(idx);
  return c;
}

/// Closed cube meets the plane {x_axis = offset}.
inline bool meets_hyperplane(const Cube& c, int axis, double offset) {
  return std::abs(c.center[axis] - offset) <= c.half_width;
}

/// Unit directions used for simplex widths: 720 equispaced angles for n = 2,
/// the 2562 vertices of a level-4 icosphere for n = 3.
inline const std::vector<Point>& width_directions(int n) {
  static const std::vector<Point> planar = [] {
    std::vector<Point> d;
    for (int i = 0; i < 720; ++i) {
      const double t = 2.0 * kPi * i / 720.0;
      d.push_back({std::cos(t), std::sin(t), 0.0});
    }
    return d;
  }();
  static const std::vector<Point> spatial = [] {
    const double p = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Point> v = {{-1, p, 0}, {1, p, 0}, {-1, -p, 0}, {1, -p, 0}, {0, -1, p}, {0, 1, p},
                            {0, -1, -p}, {0, 1, -p}, {p, 0, -1}, {p, 0, 1}, {-p, 0, -1}, {-p, 0, 1}};
    for (auto& x : v) x = (1.0 / norm(x)) * x;
    std::vector<std::array<int, 3>> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                         {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                         {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                         {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (int level = 0; level < 4; ++level) {
      std::map<std::pair<int, int>, int> mid;
      auto midpoint = [&](int i, int j) {
        const auto key = std::minmax(i, j);
        if (auto it = mid.find(key); it != mid.end()) return it->second;
        Point m = 0.5 * (v[i] + v[j]);
        v.push_back((1.0 / norm(m)) * m);
        return mid[key] = static_cast<int>(v.size()) - 1;
      };
      std::vector<std::array<int, 3>> next;
      for (const auto& t : f) {
        const int a = midpoint(t[0], t[1]), b = midpoint(t[1], t[2]), c = midpoint(t[2], t[0]);
        next.push_back({t[0], a, c});
        next.push_back({t[1], b, a});
        next.push_back({t[2], c, b});
        next.push_back({a, b, c});
      }
      f = std::move(next);
    }
    return v;
  }();
  if (n == 2) return planar;
  if (n == 3) return spatial;
  throw InvalidInput("width directions exist for n = 2 or 3");
}

struct Simplex {
  int dim = 2;
  std::vector<Point> vertices;
  double width = 0.0;
  double diameter = 0.0;
  Point barycenter{};
};

inline Simplex simplex_geometry(const std::vector<Point>& vertices) {
  const int n = static_cast<int>(vertices.size()) - 1;
  if (n != 2 && n != 3) throw InvalidInput("simplex needs 3 (n = 2) or 4 (n = 3) vertices");
  Simplex s;
  s.dim = n;
  s.vertices = vertices;
  for (const auto& v : vertices) s.barycenter = s.barycenter + v;
  s.barycenter = (1.0 / (n + 1)) * s.barycenter;
  for (std::size_t i = 0; i < vertices.size(); ++i)
    for (std::size_t j = i + 1; j < vertices.size(); ++j) s.diameter = std::max(s.diameter, distance(vertices[i], vertices[j]));
  double w = std::numeric_limits<double>::infinity();
  for (const auto& d : width_directions(n)) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& v : vertices) {
      const double p = dot(v, d);
      lo = std::min(lo, p);
      hi = std::max(hi, p);
    }
    w = std::min(w, hi - lo);
  }
  s.width = w;
  return s;
}

}  // namespace nodal_lab
