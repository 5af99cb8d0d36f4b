#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>
#include <vector>

#include "nodal_lab/biharmonic.hpp"
#include "nodal_lab/errors.hpp"
#include "nodal_lab/geometry.hpp"
#include "nodal_lab/parallel.hpp"

namespace nodal_lab {

inline constexpr double kGoldenRatio = 1.6180339887498949;

/// Sup sampling rule.
///  1. Grid points c + r(-1 + 2i/(g-1)) in each axis, kept if inside the ball,
///     plus boundary points: 4g equispaced angles (n = 2) or a Fibonacci sphere of g^2 points (n = 3).
///  2. `depth` refinement rounds, run separately for u^2 and v^2 from their best sample:
///     a 9^n stencil of spacing s = w/4 around the current best, points outside the ball
///     projected radially onto the sphere; then w <- phi * s. Initial w = phi * (2r/(g-1)).
struct SupRule {
  int grid = 64;
  int depth = 5;
};

struct SupPair {
  double sup_u2 = 0.0;
  double sup_v2 = 0.0;
  Point argmax_u{};
  Point argmax_v{};
  int grid = 64;
  int depth = 5;
  long samples = 0;

  double total() const { return sup_u2 + sup_v2; }
};

namespace detail {

/// Unit-ball sample offsets for a rule; scaled by r and shifted by the center at use.
inline const std::vector<Point>& sup_template(int n, int g) {
  static thread_local std::map<std::pair<int, int>, std::vector<Point>> cache;
  if (auto it = cache.find({n, g}); it != cache.end()) return it->second;
  std::vector<Point> pts;
  const double step = 2.0 / (g - 1);
  if (n == 2) {
    for (int i = 0; i < g; ++i)
      for (int j = 0; j < g; ++j) {
        const Point p{-1.0 + step * i, -1.0 + step * j, 0.0};
        if (norm2(p) <= 1.0) pts.push_back(p);
      }
    for (int k = 0; k < 4 * g; ++k) {
      const double t = 2.0 * kPi * k / (4 * g);
      pts.push_back({std::cos(t), std::sin(t), 0.0});
    }
  } else {
    for (int i = 0; i < g; ++i)
      for (int j = 0; j < g; ++j)
        for (int k = 0; k < g; ++k) {
          const Point p{-1.0 + step * i, -1.0 + step * j, -1.0 + step * k};
          if (norm2(p) <= 1.0) pts.push_back(p);
        }
    const int m = g * g;
    const double ga = kPi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < m; ++k) {
      const double z = 1.0 - (2.0 * k + 1.0) / m;
      const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
      pts.push_back({s * std::cos(ga * k), s * std::sin(ga * k), z});
    }
  }
  return cache[{n, g}] = std::move(pts);
}

template <class F>
std::pair<double, Point> refine_max(F&& value, const Ball& ball, int n, Point best, double best_val, double w, int depth,
                                    long& samples) {
  for (int round = 0; round < depth; ++round) {
    const double s = w / 4.0;
    const Point center = best;
    const int kz = n == 3 ? 4 : 0;
    for (int i = -4; i <= 4; ++i)
      for (int j = -4; j <= 4; ++j)
        for (int k = -kz; k <= kz; ++k) {
          Point p = center + Point{s * i, s * j, s * k};
          const Point d = p - ball.center;
          const double dn = norm(d);
          if (dn > ball.radius) p = ball.center + (ball.radius / dn) * d;
          const double val = value(p);
          ++samples;
          if (val > best_val) {
            best_val = val;
            best = p;
          }
        }
    w = kGoldenRatio * s;
  }
  return {best_val, best};
}

}  // namespace detail

inline SupPair sup_on_ball(const BiharmonicFunction& f, const Ball& ball, const SupRule& rule = {}) {
  if (rule.depth < 0) throw InvalidInput("sup_on_ball: depth must be >= 0");
  if (rule.grid < 2) throw InvalidInput("sup_on_ball: grid must be >= 2");
  const int n = f.dim();
  const Polynomial& up = f.u_polynomial();
  const Polynomial& vp = f.v_polynomial();
  const int deg = std::max({0, up.degree(), vp.degree()});
  SupPair out;
  out.grid = rule.grid;
  out.depth = rule.depth;
  double bu = -1.0, bv = -1.0;
  for (const Point& t : detail::sup_template(n, rule.grid)) {
    const Point p = ball.center + ball.radius * t;
    const auto pw = Polynomial::powers(p, deg);
    const double u = up.evaluate_powers(pw), v = vp.evaluate_powers(pw);
    if (u * u > bu) bu = u * u, out.argmax_u = p;
    if (v * v > bv) bv = v * v, out.argmax_v = p;
    ++out.samples;
  }
  const double w0 = kGoldenRatio * 2.0 * ball.radius / (rule.grid - 1);
  auto u2 = [&](const Point& p) { const double u = up(p); return u * u; };
  auto v2 = [&](const Point& p) { const double v = vp(p); return v * v; };
  std::tie(bu, out.argmax_u) = detail::refine_max(u2, ball, n, out.argmax_u, bu, w0, rule.depth, out.samples);
  if (!vp.is_zero())
    std::tie(bv, out.argmax_v) = detail::refine_max(v2, ball, n, out.argmax_v, bv, w0, rule.depth, out.samples);
  out.sup_u2 = bu;
  out.sup_v2 = bv;
  return out;
}

/// E(x0, r) = 1/2 log2[(sup_{B_r} u^2 + sup_{B_r} v^2) / (same on B_{r/2})].
inline double doubling_index(const BiharmonicFunction& f, const Point& center, double r, const SupRule& rule = {}) {
  if (!(r > 0.0)) throw InvalidInput("doubling_index: radius must be positive");
  const double num = sup_on_ball(f, Ball(center, r), rule).total();
  const double den = sup_on_ball(f, Ball(center, r / 2), rule).total();
  if (!(den > 0.0)) throw DegenerateDenominator("doubling_index: function vanishes on B_{r/2}");
  return 0.5 * std::log2(num / den);
}

struct CubeIndexReport {
  Cube cube;
  double E = 0.0;
  Point witness_x{};
  double witness_r = 0.0;
  bool clipped = false;
  long evaluations = 0;
  int samples = 0;
};

inline constexpr int kCubeIndexRadii = 24;

/// E(Q) = sup over x in Q, r in (0.01 diam, 10 diam] of E(x, r), from an s^n grid of centers
/// (corners included) times 24 log-spaced radii, followed by a coordinate pattern search in
/// (x, log r) from the best grid witness, clamped to Q and the radius range.
/// Radii above the chart radius are clipped and flagged.
inline CubeIndexReport cube_index(const BiharmonicFunction& f, const Cube& q, int samples, const SupRule& rule = {}) {
  if (samples < 1) throw InvalidInput("cube_index: samples must be >= 1");
  const int n = q.dim;
  CubeIndexReport rep;
  rep.cube = q;
  rep.samples = samples;
  const double diam = q.diameter();
  const double r_lo = 0.01 * diam;
  double r_hi = 10.0 * diam;
  if (r_hi > kChartRadius) {
    r_hi = kChartRadius;
    rep.clipped = true;
  }
  if (r_lo >= r_hi) throw InvalidInput("cube_index: cube too large for the chart");
  const double llo = std::log(r_lo), lhi = std::log(r_hi);
  auto radius_at = [&](int k) { return std::exp(llo + (lhi - llo) * (k + 1) / kCubeIndexRadii); };

  long evals = 0;
  auto eval = [&](const Point& x, double r) -> double {
    evals += 2;
    const double num = sup_on_ball(f, Ball(x, r), rule).total();
    const double den = sup_on_ball(f, Ball(x, r / 2), rule).total();
    if (!(den > 0.0)) return 0.0;
    return 0.5 * std::log2(num / den);
  };
  if (f.is_zero()) {
    rep.witness_x = q.center;
    rep.witness_r = r_hi;
    return rep;
  }

  std::vector<Point> centers;
  const int total = n == 2 ? samples * samples : samples * samples * samples;
  for (int idx = 0; idx < total; ++idx) {
    Point x = q.center;
    int rem = idx;
    for (int a = 0; a < n; ++a) {
      const int i = rem % samples;
      rem /= samples;
      x[a] = samples == 1 ? q.center[a] : q.center[a] - q.half_width + 2.0 * q.half_width * i / (samples - 1);
    }
    centers.push_back(x);
  }
  double best = -std::numeric_limits<double>::infinity();
  Point bx = q.center;
  double blog = lhi;
  for (const auto& x : centers)
    for (int k = 0; k < kCubeIndexRadii; ++k) {
      const double e = eval(x, radius_at(k));
      if (e > best) best = e, bx = x, blog = std::log(radius_at(k));
    }

  double dx = samples == 1 ? q.half_width : q.half_width / (samples - 1);
  double dl = (lhi - llo) / kCubeIndexRadii;
  for (int iter = 0; iter < 10; ++iter) {
    bool improved = true;
    for (int moves = 0; improved && moves < 50; ++moves) {
      improved = false;
      for (int a = 0; a <= n; ++a)
        for (int sgn : {-1, 1}) {
          Point x = bx;
          double l = blog;
          if (a < n) x[a] = std::clamp(x[a] + sgn * dx, q.center[a] - q.half_width, q.center[a] + q.half_width);
          else l = std::clamp(l + sgn * dl, llo, lhi);
          if (x == bx && l == blog) continue;
          const double e = eval(x, std::exp(l));
          if (e > best) best = e, bx = x, blog = l, improved = true;
        }
    }
    dx /= 2;
    dl /= 2;
  }
  rep.E = best;
  rep.witness_x = bx;
  rep.witness_r = std::exp(blog);
  rep.evaluations = evals;
  return rep;
}

}  // namespace nodal_lab
