#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "nodal_lab/biharmonic.hpp"
#include "nodal_lab/errors.hpp"
#include "nodal_lab/geometry.hpp"
#include "nodal_lab/parallel.hpp"
#include "nodal_lab/sup.hpp"

namespace nodal_lab {

/// Relative threshold for ratio denominators: an integral counts as zero when it is below
/// this factor times (max integrand over the nodes) * (measure of the domain).
inline constexpr double kDegenerateFactor = 1e-14;

struct FrequencyValues {
  double r = 0.0;
  double D = 0.0;
  double H = 0.0;
  double N = 0.0;
};

namespace detail {

inline int quad_degree(const BiharmonicFunction& f, int degree) {
  return degree > 0 ? degree : default_quadrature_degree(f.degree());
}

inline void check_chart(const PolarMetric& metric, double r, const char* what) {
  if (!(r > 0.0)) throw InvalidInput(std::string(what) + ": radius must be positive");
  if (!metric.is_euclidean() && r > kChartRadius * (1.0 + 1e-12))
    throw InvalidInput(std::string(what) + ": radius leaves the metric chart");
}

inline void check_dims(const BiharmonicFunction& f, const PolarMetric& metric) {
  if (f.dim() != metric.dim()) throw InvalidInput("function and metric dimensions differ");
}

inline double sphere_measure(int n, double r) { return n == 2 ? 2.0 * kPi * r : 4.0 * kPi * r * r; }

template <class F>
double guarded_boundary_integral(const QuadratureRule& q, F&& integrand, int n, double r, const char* what) {
  double s = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double val = integrand(q.nodes[i]);
    peak = std::max(peak, std::abs(val));
    s += q.weights[i] * val;
  }
  if (!(s > kDegenerateFactor * peak * sphere_measure(n, r)) || peak == 0.0)
    throw DegenerateDenominator(std::string(what) + ": boundary integral vanishes");
  return s;
}

}  // namespace detail

/// H = int_{dB_r} (u^2 + v^2), D = int_{B_r} (|grad u|^2 + |grad v|^2 + u v) dV_M, N = r D / H.
/// Gradients are measured in the metric; v is the Euclidean Laplacian of u.
/// `degree` <= 0 selects the default quadrature degree 2 deg(u) + 8.
inline FrequencyValues frequency_components(const BiharmonicFunction& f, const PolarMetric& metric,
                                            const Point& center, double r, int degree = 0) {
  detail::check_dims(f, metric);
  detail::check_chart(metric, r, "frequency_components");
  const int deg = detail::quad_degree(f, degree);
  const Ball ball(center, r);
  const auto sq = sphere_quadrature(metric, ball, deg);
  FrequencyValues fv;
  fv.r = r;
  fv.H = detail::guarded_boundary_integral(
      sq, [&](const Point& x) { const auto j = f.jet(x, 0); return j.u * j.u + j.v * j.v; }, f.dim(), r,
      "frequency_components");
  const auto bq = ball_quadrature(metric, ball, deg);
  double d = 0.0;
  for (std::size_t i = 0; i < bq.size(); ++i) {
    const Point& x = bq.nodes[i];
    const auto j = f.jet(x, 1);
    const Point rel = x - center;
    d += bq.weights[i] * (metric.norm2(rel, j.grad) + metric.norm2(rel, j.grad_v) + j.u * j.v);
  }
  fv.D = d;
  fv.N = r * fv.D / fv.H;
  return fv;
}

struct GradientFrequencies {
  double r = 0.0;
  double N1 = 0.0;
  double N2 = 0.0;
};

/// N1 = r int(|grad u|^2 + |grad v|^2) / int_d(u^2 + v^2),
/// N2 = r int(|D^2 u|^2 + |D^2 v|^2) / int_d(|grad u|^2 + |grad v|^2), Hessians in Frobenius norm.
inline GradientFrequencies gradient_frequencies(const BiharmonicFunction& f, const PolarMetric& metric,
                                                const Point& center, double r, int degree = 0) {
  detail::check_dims(f, metric);
  detail::check_chart(metric, r, "gradient_frequencies");
  const int deg = detail::quad_degree(f, degree);
  const Ball ball(center, r);
  const auto sq = sphere_quadrature(metric, ball, deg);
  const double h0 = detail::guarded_boundary_integral(
      sq, [&](const Point& x) { const auto j = f.jet(x, 0); return j.u * j.u + j.v * j.v; }, f.dim(), r,
      "gradient_frequencies (N1)");
  const double h1 = detail::guarded_boundary_integral(
      sq,
      [&](const Point& x) {
        const auto j = f.jet(x, 1);
        return metric.norm2(x - center, j.grad) + metric.norm2(x - center, j.grad_v);
      },
      f.dim(), r, "gradient_frequencies (N2)");
  const auto bq = ball_quadrature(metric, ball, deg);
  double g1 = 0.0, g2 = 0.0;
  for (std::size_t i = 0; i < bq.size(); ++i) {
    const auto j = f.jet(bq.nodes[i], 2);
    const Point rel = bq.nodes[i] - center;
    g1 += bq.weights[i] * (metric.norm2(rel, j.grad) + metric.norm2(rel, j.grad_v));
    g2 += bq.weights[i] * (frobenius2(j.hess) + frobenius2(j.hess_v));
  }
  return {r, r * g1 / h0, r * g2 / h1};
}

/// int_{B_r} (u^2 + v^2) dV_M.
inline double l2_ball_integral(const BiharmonicFunction& f, const PolarMetric& metric, const Point& center, double r,
                               int degree = 0) {
  const auto q = ball_quadrature(metric, Ball(center, r), detail::quad_degree(f, degree));
  return q.integrate([&](const Point& x) { const auto j = f.jet(x, 0); return j.u * j.u + j.v * j.v; });
}

inline std::vector<double> log_spaced(double lo, double hi, int count) {
  if (count < 2 || !(lo > 0.0) || !(hi > lo)) throw InvalidInput("log_spaced: need 0 < lo < hi and count >= 2");
  std::vector<double> out(count);
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < count; ++i) out[i] = std::exp(a + (b - a) * i / (count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

inline std::vector<double> default_radius_grid() { return log_spaced(0.05, 0.8, 40); }

inline constexpr double kDefaultC0 = 1.0;
inline constexpr double kFloorFactor = 1.6;

struct FrequencyProfile {
  Point center{};
  std::string metric_id;
  double C0 = kDefaultC0;
  std::vector<FrequencyValues> samples;
  /// (r_i, N'/N at r_i) for interior samples with D > 0 and N > 0.
  std::vector<std::pair<double, double>> logderiv;
  std::vector<double> flagged_nonpositive_D;

  double C_emp = 0.0;
  bool c_emp_defined = false;
  /// N(rho) <= exp(C_emp r_max) max(N(r_max), C0) for every grid radius.
  bool upper_estimate_holds = true;
  double upper_estimate_worst = 0.0;
  /// Applies when N(r_min) >= 1.6 C0; then min N must stay >= C0.
  bool floor_applies = false;
  bool floor_holds = true;

  double logderiv_at(double r) const {
    for (const auto& [rr, ld] : logderiv)
      if (rr == r) return ld;
    return std::numeric_limits<double>::quiet_NaN();
  }

  void write_csv(std::ostream& os) const {
    os << "center_x,center_y,r,D,H,N,dlogN\n";
    char buf[256];
    for (const auto& s : samples) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", center[0], center[1], s.r, s.D, s.H,
                    s.N, logderiv_at(s.r));
      os << buf;
    }
  }
};

inline FrequencyProfile monotonicity_profile(const BiharmonicFunction& f, const PolarMetric& metric,
                                             const Point& center, const std::vector<double>& r_grid,
                                             double C0 = kDefaultC0, int degree = 0) {
  if (r_grid.size() < 5) throw InvalidInput("monotonicity_profile: need at least 5 radii");
  for (std::size_t i = 1; i < r_grid.size(); ++i)
    if (!(r_grid[i] > r_grid[i - 1])) throw InvalidInput("monotonicity_profile: radii must be strictly increasing");
  FrequencyProfile p;
  p.center = center;
  p.metric_id = metric.id();
  p.C0 = C0;
  p.samples = parallel_map<FrequencyValues>(r_grid.size(), [&](std::size_t i) {
    return frequency_components(f, metric, center, r_grid[i], degree);
  });
  double min_ld = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.samples.size(); ++i) {
    const auto& s = p.samples[i];
    if (s.D <= 0.0) p.flagged_nonpositive_D.push_back(s.r);
    if (i == 0 || i + 1 == p.samples.size()) continue;
    if (s.D <= 0.0 || s.N <= 0.0) continue;
    const double dn = (p.samples[i + 1].N - p.samples[i - 1].N) / (p.samples[i + 1].r - p.samples[i - 1].r);
    const double ld = dn / s.N;
    p.logderiv.push_back({s.r, ld});
    if (s.N >= C0) {
      min_ld = std::min(min_ld, ld);
      p.c_emp_defined = true;
    }
  }
  p.C_emp = p.c_emp_defined ? std::max(0.0, -min_ld) : 0.0;
  const double r_max = p.samples.back().r;
  const double bound = std::exp(p.C_emp * r_max) * std::max(p.samples.back().N, C0);
  for (const auto& s : p.samples) {
    p.upper_estimate_worst = std::max(p.upper_estimate_worst, s.N / bound);
    if (s.N > bound) p.upper_estimate_holds = false;
  }
  if (p.samples.front().N >= kFloorFactor * C0) {
    p.floor_applies = true;
    for (const auto& s : p.samples)
      if (s.N < C0) p.floor_holds = false;
  }
  return p;
}

enum class DoublingNorm { l2_ball, sup_ball };

struct DoublingCheck {
  DoublingNorm norm = DoublingNorm::l2_ball;
  double r = 0.0, t = 0.0, eps = 0.0;
  double ratio = 0.0;
  double log_ratio = 0.0;       // log_t(ratio)
  double upper_quantity = 0.0;  // N(r) (L2) or E(2tr) (sup)
  double lower_quantity = 0.0;  // N(r/t) (L2) or E(r) (sup)
  double upper_exponent = 0.0;  // 2(1+eps) * upper_quantity
  double lower_exponent = 0.0;  // 2(1-eps) * lower_quantity
  double C_req = 0.0;           // smallest C with log_ratio <= upper_exponent + C
  double C_prime_req = 0.0;     // smallest C' with log_ratio >= lower_exponent - C'
  bool holds_with_zero_C() const { return C_req <= 0.0; }
};

/// L2: ratio = int_{B_r}(u^2+v^2) / int_{B_{r/t}}(u^2+v^2) against t^{2(1+eps) N(r) + C} and t^{2(1-eps) N(r/t) - C'}.
/// sup: ratio = S(tr) / S(r), S = sup u^2 + sup v^2, against E(2tr) and E(r).
inline DoublingCheck doubling_check(const BiharmonicFunction& f, const PolarMetric& metric, const Point& center,
                                    double r, double t, double eps, DoublingNorm norm, int degree = 0,
                                    const SupRule& rule = {}) {
  detail::check_dims(f, metric);
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidInput("doubling_check: eps must lie in (0, 1)");
  DoublingCheck c;
  c.norm = norm;
  c.r = r;
  c.t = t;
  c.eps = eps;
  if (norm == DoublingNorm::l2_ball) {
    if (!(t > 1.0)) throw InvalidInput("doubling_check: t must exceed 1");
    detail::check_chart(metric, r, "doubling_check");
    const double outer = l2_ball_integral(f, metric, center, r, degree);
    const double inner = l2_ball_integral(f, metric, center, r / t, degree);
    if (!(inner > 0.0)) throw DegenerateDenominator("doubling_check: inner L2 integral vanishes");
    c.ratio = outer / inner;
    c.upper_quantity = frequency_components(f, metric, center, r, degree).N;
    c.lower_quantity = frequency_components(f, metric, center, r / t, degree).N;
  } else {
    if (!(t > 2.0)) throw InvalidInput("doubling_check: sup mode needs t > 2");
    if (!(r > 0.0)) throw InvalidInput("doubling_check: radius must be positive");
    const double outer = sup_on_ball(f, Ball(center, t * r), rule).total();
    const double inner = sup_on_ball(f, Ball(center, r), rule).total();
    if (!(inner > 0.0)) throw DegenerateDenominator("doubling_check: inner sup vanishes");
    c.ratio = outer / inner;
    c.upper_quantity = doubling_index(f, center, 2.0 * t * r, rule);
    c.lower_quantity = doubling_index(f, center, r, rule);
  }
  c.log_ratio = std::log(c.ratio) / std::log(t);
  c.upper_exponent = 2.0 * (1.0 + eps) * c.upper_quantity;
  c.lower_exponent = 2.0 * (1.0 - eps) * c.lower_quantity;
  c.C_req = c.log_ratio - c.upper_exponent;
  c.C_prime_req = c.lower_exponent - c.log_ratio;
  return c;
}

}  // namespace nodal_lab
