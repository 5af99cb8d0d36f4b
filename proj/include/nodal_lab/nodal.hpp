#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include <json.hpp>

#include "nodal_lab/biharmonic.hpp"
#include "nodal_lab/frequency.hpp"
#include "nodal_lab/parallel.hpp"
#include "nodal_lab/region.hpp"

namespace nodal_lab {

using Segment = std::pair<Point, Point>;
using Region = std::variant<Ball, Cube>;

inline double segment_length(const Segment& s) { return distance(s.first, s.second); }
inline Point midpoint(const Segment& s) { return 0.5 * (s.first + s.second); }

struct NodalCurveSet {
  std::vector<Segment> segments;
  double h = 0.0;
  Region region;
  double total_length = 0.0;

  void write_csv(std::ostream& os) const {
    os << "x1,y1,x2,y2\n";
    char buf[128];
    for (const auto& [a, b] : segments) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", a[0], a[1], b[0], b[1]);
      os << buf;
    }
  }
};

inline double measure_h(const NodalCurveSet& c) {
  double s = 0.0;
  for (const auto& seg : c.segments) s += segment_length(seg);
  return s;
}

/// Tie rule for marching squares: a node value of exactly zero counts as +1e-300.
inline constexpr double kZeroPerturbation = 1e-300;

namespace detail {

/// Part of segment [a, b] inside the closed ball, or nothing.
inline std::optional<Segment> clip_to_ball(const Segment& s, const Ball& ball) {
  const Point d = s.second - s.first;
  const Point f = s.first - ball.center;
  const double A = dot(d, d), B = 2.0 * dot(f, d), C = dot(f, f) - ball.radius * ball.radius;
  const bool in_a = C <= 0.0, in_b = norm2(s.second - ball.center) <= ball.radius * ball.radius;
  if (in_a && in_b) return s;
  if (A == 0.0) return std::nullopt;
  const double disc = B * B - 4.0 * A * C;
  if (disc <= 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  const double t0 = std::max(0.0, (-B - sq) / (2.0 * A)), t1 = std::min(1.0, (-B + sq) / (2.0 * A));
  if (t0 >= t1) return std::nullopt;
  return Segment{in_a ? s.first : s.first + t0 * d, in_b ? s.second : s.first + t1 * d};
}

}  // namespace detail

/// Marching squares on a grid_n x grid_n cell grid over the region's bounding square.
/// Edge crossings are interpolated linearly from the lower-index node, so adjacent cells
/// produce identical points. Saddle cells use the mean of the four corners: if it has the sign
/// of the lower-left corner, the segments are (bottom, right) and (top, left), otherwise
/// (left, bottom) and (right, top). Segments are clipped to a ball region.
template <class F>
NodalCurveSet extract_nodal_curves_of(F&& u, const Region& region, int grid_n) {
  if (grid_n < 32) throw InvalidInput("extract_nodal_curves: grid_n must be >= 32");
  Point lo{};
  double side = 0.0;
  if (const auto* b = std::get_if<Ball>(&region)) {
    lo = b->center - Point{b->radius, b->radius, 0.0};
    side = 2.0 * b->radius;
  } else {
    const auto& q = std::get<Cube>(region);
    if (q.dim != 2) throw InvalidInput("extract_nodal_curves: only n = 2 is supported");
    lo = q.center - Point{q.half_width, q.half_width, 0.0};
    side = 2.0 * q.half_width;
  }
  lo[2] = 0.0;
  const int m = grid_n + 1;
  const double h = side / grid_n;
  auto node = [&](int i, int j) { return Point{lo[0] + h * i, lo[1] + h * j, 0.0}; };
  const auto rows = parallel_map<std::vector<double>>(m, [&](std::size_t j) {
    std::vector<double> row(m);
    for (int i = 0; i < m; ++i) {
      const double val = u(node(i, static_cast<int>(j)));
      row[i] = val == 0.0 ? kZeroPerturbation : val;
    }
    return row;
  });
  auto val = [&](int i, int j) { return rows[j][i]; };
  auto cross = [&](int ia, int ja, int ib, int jb) {
    // canonical orientation: interpolate from the lower-index node (row-major j, then i)
    if (std::tie(jb, ib) < std::tie(ja, ia)) std::swap(ia, ib), std::swap(ja, jb);
    const double va = val(ia, ja), vb = val(ib, jb);
    const double t = va / (va - vb);
    const Point pa = node(ia, ja), pb = node(ib, jb);
    return pa + t * (pb - pa);
  };
  NodalCurveSet out;
  out.h = h;
  out.region = region;
  const Ball* ball = std::get_if<Ball>(&region);
  auto emit = [&](const Point& a, const Point& b) {
    Segment s{a, b};
    if (ball) {
      const auto c = detail::clip_to_ball(s, *ball);
      if (!c) return;
      s = *c;
    }
    if (segment_length(s) > 0.0) out.segments.push_back(s);
  };
  for (int j = 0; j < grid_n; ++j)
    for (int i = 0; i < grid_n; ++i) {
      const double v00 = val(i, j), v10 = val(i + 1, j), v11 = val(i + 1, j + 1), v01 = val(i, j + 1);
      const bool s00 = v00 > 0, s10 = v10 > 0, s11 = v11 > 0, s01 = v01 > 0;
      std::array<std::optional<Point>, 4> e;  // bottom, right, top, left
      if (s00 != s10) e[0] = cross(i, j, i + 1, j);
      if (s10 != s11) e[1] = cross(i + 1, j, i + 1, j + 1);
      if (s01 != s11) e[2] = cross(i, j + 1, i + 1, j + 1);
      if (s00 != s01) e[3] = cross(i, j, i, j + 1);
      const int count = (e[0] ? 1 : 0) + (e[1] ? 1 : 0) + (e[2] ? 1 : 0) + (e[3] ? 1 : 0);
      if (count == 2) {
        std::array<Point, 2> p;
        int k = 0;
        for (const auto& x : e)
          if (x) p[k++] = *x;
        emit(p[0], p[1]);
      } else if (count == 4) {
        const double center = 0.25 * (v00 + v10 + v11 + v01);
        if ((center > 0) == s00) {
          emit(*e[0], *e[1]);
          emit(*e[2], *e[3]);
        } else {
          emit(*e[3], *e[0]);
          emit(*e[1], *e[2]);
        }
      }
    }
  out.total_length = measure_h(out);
  return out;
}

inline NodalCurveSet extract_nodal_curves(const BiharmonicFunction& f, const Region& region, int grid_n) {
  if (f.dim() != 2) throw InvalidInput("extract_nodal_curves: only n = 2 is supported");
  return extract_nodal_curves_of(f, region, grid_n);
}

enum class Stratum { C1 = 1, C2 = 2, C3 = 3, C4 = 4 };

inline std::string to_string(Stratum s) { return "C" + std::to_string(static_cast<int>(s)); }

/// tau_k are absolute when `relative` is false; otherwise each is multiplied by the local jet
/// scale max(|u|, |grad u|, |D^2 u|, |D^3 u|) at the point.
struct StrataThresholds {
  double tau1 = 1e-9, tau2 = 1e-9, tau3 = 1e-9;
  bool relative = true;
};

struct StratumLabel {
  Stratum stratum = Stratum::C1;
  double tau1 = 0.0, tau2 = 0.0, tau3 = 0.0;  // thresholds actually applied
};

inline StratumLabel classify_point(const JetValues& j, const StrataThresholds& t = {}) {
  const double g = norm(j.grad), h2 = std::sqrt(frobenius2(j.hess)), h3 = std::sqrt(frobenius2(j.third));
  const double scale = t.relative ? std::max({std::abs(j.u), g, h2, h3}) : 1.0;
  StratumLabel l{Stratum::C4, t.tau1 * scale, t.tau2 * scale, t.tau3 * scale};
  if (g > l.tau1) l.stratum = Stratum::C1;
  else if (h2 > l.tau2) l.stratum = Stratum::C2;
  else if (h3 > l.tau3) l.stratum = Stratum::C3;
  return l;
}

inline std::vector<StratumLabel> classify_strata(const BiharmonicFunction& f, const std::vector<Point>& points,
                                                 const StrataThresholds& t = {}) {
  std::vector<StratumLabel> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(classify_point(f.jet(p, 3), t));
  return out;
}

struct SeparationCheck {
  double m1 = 0.0, m2 = 0.0;
  double factor = 0.0;        // m1 / m2, 1 when both vanish
  bool vacuous = false;
  double c_required = 0.0;    // smallest c with factor <= 1 + c sqrt(eta)
  double c1_distance = 0.0;   // sampled max(sup|w1 - w2|, sup|grad(w1 - w2)|) on B_1
  double holder_seminorm = 0.0;  // sampled max over w1, w2 of [grad w]_{1/2} on B_1
};

namespace detail {

inline std::vector<Point> unit_disk_samples(int g) {
  std::vector<Point> pts;
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      const Point p{-1.0 + 2.0 * i / (g - 1), -1.0 + 2.0 * j / (g - 1), 0.0};
      if (norm2(p) <= 1.0) pts.push_back(p);
    }
  for (int k = 0; k < 4 * g; ++k) {
    const double t = 2.0 * kPi * k / (4 * g);
    pts.push_back({std::cos(t), std::sin(t), 0.0});
  }
  return pts;
}

/// Length of the nodal set of f inside `ball` restricted to segments whose midpoint has |grad f| > gmin.
inline double gradient_restricted_length(const BiharmonicFunction& f, const Ball& ball, double gmin, int grid_n) {
  const auto c = extract_nodal_curves(f, ball, grid_n);
  double s = 0.0;
  for (const auto& seg : c.segments)
    if (norm(f.jet(midpoint(seg), 1).grad) > gmin) s += segment_length(seg);
  return s;
}

}  // namespace detail

/// Preconditions are sampled on a 64 x 64 grid of B_1 plus 256 boundary points: the C^1 distance
/// must not exceed eta^5 / 2, and the Hoelder-1/2 seminorm of grad w (the C^{1,1/2} proxy, over all
/// sample pairs of a 24 x 24 subgrid) must not exceed 1.
inline SeparationCheck separation_stability(const BiharmonicFunction& w1, const BiharmonicFunction& w2, double eta,
                                            int grid_n = 512) {
  if (!(eta > 0.0 && eta < 1.0)) throw InvalidInput("separation_stability: eta must lie in (0, 1)");
  if (w1.dim() != 2 || w2.dim() != 2) throw InvalidInput("separation_stability: n = 2 only");
  SeparationCheck c;
  for (const Point& p : detail::unit_disk_samples(64)) {
    const auto a = w1.jet(p, 1), b = w2.jet(p, 1);
    c.c1_distance = std::max({c.c1_distance, std::abs(a.u - b.u), norm(a.grad - b.grad)});
  }
  const auto coarse = detail::unit_disk_samples(24);
  for (const auto* w : {&w1, &w2}) {
    std::vector<Point> grads;
    for (const Point& p : coarse) grads.push_back(w->jet(p, 1).grad);
    for (std::size_t i = 0; i < coarse.size(); ++i)
      for (std::size_t k = i + 1; k < coarse.size(); ++k) {
        const double d = distance(coarse[i], coarse[k]);
        if (d > 0.0) c.holder_seminorm = std::max(c.holder_seminorm, norm(grads[i] - grads[k]) / std::sqrt(d));
      }
  }
  const double budget = 0.5 * std::pow(eta, 5);
  if (c.c1_distance > budget * (1.0 + 1e-9) + 1e-15)
    throw InvalidInput("separation_stability: C^1 distance exceeds eta^5/2");
  if (c.holder_seminorm > 1.0 + 1e-12) throw InvalidInput("separation_stability: C^{1,1/2} proxy exceeds 1");
  c.m1 = detail::gradient_restricted_length(w1, Ball({0, 0, 0}, 1.0 - eta), eta, grid_n);
  c.m2 = detail::gradient_restricted_length(w2, Ball({0, 0, 0}, 1.0), eta / 2.0, grid_n);
  if (c.m1 == 0.0 && c.m2 == 0.0) {
    c.vacuous = true;
    c.factor = 1.0;
  } else {
    c.factor = c.m2 > 0.0 ? c.m1 / c.m2 : std::numeric_limits<double>::infinity();
  }
  c.c_required = std::max(0.0, (c.factor - 1.0) / std::sqrt(eta));
  return c;
}

struct CoverReport {
  std::vector<Ball> balls;
  double sum_pow = 0.0;         // sum r_i^{n-1}
  double residual_measure = 0.0; // length of target segments left outside the balls
  double gamma = 0.0;
  double r_cap = 0.0;
  bool budget_violated = false;
  std::size_t candidates = 0;
};

namespace detail {

/// Greedy cover of the segments whose midpoint has |grad u| < gamma.
inline CoverReport cover_segments(const BiharmonicFunction& f, const std::vector<Segment>& segs, const Ball& region,
                                  double gamma, double r_cap, double h) {
  CoverReport rep;
  rep.gamma = gamma;
  rep.r_cap = r_cap;
  struct Cand {
    double g;
    Point p;
    double len;
  };
  std::vector<Cand> cands;
  for (const auto& s : segs) {
    const Point m = midpoint(s);
    const double g = norm(f.jet(m, 1).grad);
    if (g < gamma) cands.push_back({g, m, segment_length(s)});
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    return std::tie(a.g, a.p[0], a.p[1]) < std::tie(b.g, b.p[0], b.p[1]);
  });
  rep.candidates = cands.size();
  std::vector<char> covered(cands.size(), 0);
  auto in_target = [&](const Point& p) {
    const auto j = f.jet(p, 1);
    return region.contains(p) && norm(j.grad) < gamma && std::abs(j.u) <= 10.0 * gamma * h;
  };
  for (std::size_t s = 0; s < cands.size(); ++s) {
    if (covered[s]) continue;
    Point c = cands[s].p;
    // pattern search on |grad u|^2 from the seed
    double step = h, best = norm2(f.jet(c, 1).grad);
    while (step > 1e-12 * region.radius) {
      bool moved = false;
      for (int a = 0; a < 2 && !moved; ++a)
        for (int sg : {-1, 1}) {
          Point q = c;
          q[a] += sg * step;
          const double g = norm2(f.jet(q, 1).grad);
          if (g < best && in_target(q)) {
            best = g;
            c = q;
            moved = true;
            break;
          }
        }
      if (!moved) step /= 2;
    }
    double rad = 0.0;
    for (std::size_t k = 0; k < cands.size(); ++k)
      if (!covered[k]) {
        const double d = distance(cands[k].p, c);
        if (d <= r_cap) rad = std::max(rad, d);
      }
    rad = std::max(rad, 0.5 * h);
    const Ball b(c, std::min(rad * (1.0 + 1e-12), std::max(r_cap, 0.5 * h)));
    for (std::size_t k = 0; k < cands.size(); ++k)
      if (!covered[k] && distance(cands[k].p, c) <= b.radius) covered[k] = 1;
    rep.balls.push_back(b);
  }
  for (std::size_t k = 0; k < cands.size(); ++k)
    if (!covered[k]) rep.residual_measure += cands[k].len;
  for (const auto& b : rep.balls) rep.sum_pow += b.radius;  // n = 2: r^{n-1} = r
  return rep;
}

}  // namespace detail

/// Balls covering the sampled critical part {u = 0, |grad u| < gamma} of the nodal set in `region`.
/// The radius of each ball is the largest distance (<= r_cap) to a still-uncovered candidate.
/// The budget flag is raised when sum r_i^{n-1} exceeds half the region radius^{n-1}.
inline CoverReport critical_cover(const BiharmonicFunction& f, const Ball& region, double gamma, double r_cap,
                                  int grid_n = 512) {
  if (f.dim() != 2) throw InvalidInput("critical_cover: n = 2 only");
  const auto curves = extract_nodal_curves(f, region, grid_n);
  auto rep = detail::cover_segments(f, curves.segments, region, gamma, r_cap, curves.h);
  rep.budget_violated = rep.sum_pow > 0.5 * region.radius;
  return rep;
}

struct StratifiedLevel {
  int level = 0;
  Ball region;
  double gamma = 0.0;
  CoverReport cover;
  std::array<double, 4> outside_measure{};  // per stratum, outside the cover
};

struct StratifiedBound {
  std::array<double, 4> stratum_measure{};  // whole nodal set in B_r by stratum
  std::vector<StratifiedLevel> levels;
  double total_outside = 0.0;  // sum over levels of measure outside the covers
  double N1 = 0.0;
  double bound_ratio = 0.0;    // total_outside / (max(N1, C0) r^{n-1})
  bool budget_flag = false;
  double N1_plus = 0.0, N1_minus = 0.0;  // N1(u + v), N1(u - v)
  bool pm_trick_holds = true;            // min(N1(u+v), N1(u-v)) <= 2 N1(u)
};

namespace detail {

inline std::array<double, 4> stratum_lengths(const BiharmonicFunction& f, const std::vector<Segment>& segs,
                                             const std::vector<Ball>& exclude) {
  std::array<double, 4> m{};
  for (const auto& s : segs) {
    const Point p = midpoint(s);
    bool inside = false;
    for (const auto& b : exclude)
      if (b.contains(p)) inside = true;
    if (inside) continue;
    m[static_cast<int>(classify_point(f.jet(p, 3)).stratum) - 1] += segment_length(s);
  }
  return m;
}

/// Largest gamma (bisection, 30 steps) whose cover keeps sum r_i <= rad/2 with r_i <= rad/2.
inline std::pair<double, CoverReport> budget_gamma(const BiharmonicFunction& f, const std::vector<Segment>& segs,
                                                   const Ball& region, double h) {
  double gmax = 0.0;
  for (const auto& s : segs) gmax = std::max(gmax, norm(f.jet(midpoint(s), 1).grad));
  double lo = 0.0, hi = gmax * (1.0 + 1e-12) + 1e-300;
  CoverReport best = cover_segments(f, segs, region, 0.0, region.radius / 2, h);
  for (int it = 0; it < 30; ++it) {
    const double mid = 0.5 * (lo + hi);
    auto rep = cover_segments(f, segs, region, mid, region.radius / 2, h);
    if (rep.sum_pow <= 0.5 * region.radius && rep.residual_measure == 0.0) {
      lo = mid;
      best = std::move(rep);
    } else {
      hi = mid;
    }
  }
  return {lo, best};
}

}  // namespace detail

/// One-step cover of the degenerate nodal points, measured outside the cover, iterated `depth`
/// levels inside the cover balls (at most 8 balls per level are followed).
inline StratifiedBound stratified_bound(const BiharmonicFunction& f, const Point& center, double r, int grid_n,
                                        int depth, double C0 = kDefaultC0) {
  if (f.dim() != 2) throw InvalidInput("stratified_bound: n = 2 only");
  if (depth < 0) throw InvalidInput("stratified_bound: depth must be >= 0");
  StratifiedBound out;
  const Ball root(center, r);
  const auto curves = extract_nodal_curves(f, root, grid_n);
  out.stratum_measure = detail::stratum_lengths(f, curves.segments, {});
  std::vector<Ball> frontier{root};
  for (int level = 0; level <= depth && !frontier.empty(); ++level) {
    std::vector<Ball> next;
    for (const auto& region : frontier) {
      const auto c = level == 0 ? curves : extract_nodal_curves(f, region, grid_n);
      StratifiedLevel L;
      L.level = level;
      L.region = region;
      std::tie(L.gamma, L.cover) = detail::budget_gamma(f, c.segments, region, c.h);
      L.cover.budget_violated = L.cover.sum_pow > 0.5 * region.radius;
      out.budget_flag = out.budget_flag || L.cover.budget_violated;
      L.outside_measure = detail::stratum_lengths(f, c.segments, L.cover.balls);
      for (double m : L.outside_measure) out.total_outside += m;
      for (std::size_t b = 0; b < L.cover.balls.size() && next.size() < 8; ++b) next.push_back(L.cover.balls[b]);
      out.levels.push_back(std::move(L));
    }
    frontier = std::move(next);
  }
  const auto E = PolarMetric::euclidean(2);
  try {
    out.N1 = gradient_frequencies(f, E, center, r).N1;
    out.N1_plus = gradient_frequencies(f.plus_v(1.0), E, center, r).N1;
    out.N1_minus = gradient_frequencies(f.plus_v(-1.0), E, center, r).N1;
    out.pm_trick_holds = std::min(out.N1_plus, out.N1_minus) <= 2.0 * out.N1 * (1.0 + 1e-12) + 1e-300;
  } catch (const DegenerateDenominator&) {
    out.N1 = 0.0;
  }
  out.bound_ratio = out.total_outside / (std::max(out.N1, C0) * r);
  return out;
}

struct NodalBoundRow {
  double measure = 0.0;
  double N = 0.0;      // max(C0, N(center, r))
  double ratio = 0.0;  // measure / (N r^{n-1})
  bool skipped = false;
  std::string flag;
};

struct NodalBoundReport {
  std::vector<NodalBoundRow> rows;
  double alpha_emp = std::numeric_limits<double>::quiet_NaN();  // OLS slope of log m on log N
  double C_fit = 0.0;                                            // max m / (N^alpha r^{n-1})
  bool bound_holds = true;
  int fitted = 0;
};

/// Least-squares slope of y on x.
inline double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
  return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

inline NodalBoundReport nodal_bound_report(const std::vector<BiharmonicFunction>& family, const Point& center,
                                           double r, int grid_n, double C0 = kDefaultC0) {
  NodalBoundReport rep;
  const auto E = PolarMetric::euclidean(2);
  rep.rows = parallel_map<NodalBoundRow>(family.size(), [&](std::size_t i) {
    const auto& f = family[i];
    if (f.dim() != 2) throw InvalidInput("nodal_bound_report: n = 2 only");
    NodalBoundRow row;
    try {
      row.N = std::max(C0, frequency_components(f, E, center, r).N);
    } catch (const DegenerateDenominator& e) {
      row.skipped = true;
      row.flag = "degenerate frequency";
      return row;
    }
    row.measure = extract_nodal_curves(f, Ball(center, r / 2), grid_n).total_length;
    row.ratio = row.measure / (row.N * r);
    return row;
  });
  std::vector<double> lx, ly;
  for (const auto& row : rep.rows)
    if (!row.skipped && row.measure > 0.0) lx.push_back(std::log(row.N)), ly.push_back(std::log(row.measure));
  rep.fitted = static_cast<int>(lx.size());
  if (lx.size() >= 2) rep.alpha_emp = ols_slope(lx, ly);
  const double alpha = std::isfinite(rep.alpha_emp) ? rep.alpha_emp : 1.0;
  for (const auto& row : rep.rows)
    if (!row.skipped) rep.C_fit = std::max(rep.C_fit, row.measure / (std::pow(row.N, alpha) * r));
  for (const auto& row : rep.rows)
    if (!row.skipped && row.measure > rep.C_fit * std::pow(row.N, alpha) * r * (1.0 + 1e-12)) rep.bound_holds = false;
  return rep;
}

inline nlohmann::json nodal_summary_json(const NodalCurveSet& c, const std::array<double, 4>& strata,
                                         const CoverReport& cover) {
  nlohmann::json balls = nlohmann::json::array();
  for (const auto& b : cover.balls) balls.push_back({{"center", {b.center[0], b.center[1]}}, {"radius", b.radius}});
  return {{"length", c.total_length},
          {"strata_counts", {{"C1", strata[0]}, {"C2", strata[1]}, {"C3", strata[2]}, {"C4", strata[3]}}},
          {"cover", {{"balls", balls}, {"sum_pow", cover.sum_pow}}}};
}

}  // namespace nodal_lab
