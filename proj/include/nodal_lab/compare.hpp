#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "nodal_lab/solver.hpp"

namespace nodal_lab {

struct CoefficientComparison {
  double omega = 0.0;            // omega(center, 1)
  double distance_u = 0.0;       // (max |u - phi| + max |grad(u - phi)|) / ||u||_{L2(dB_1)}
  double distance_v = 0.0;       // same for v - psi
  double ratio_u = 0.0;          // distance_u / omega (0 when omega = 0)
  double ratio_v = 0.0;
  std::array<double, 2> gradient_component_distance{};  // max |d_k u - d_k phi| / ||u||_{L2(dB_1)}
  double residual_u = 0.0, residual_v = 0.0;            // relative residuals of the B_1 solve
  int resolution = 0;
};

/// Solves L v = 0, L u = v on B_1 with the given data, then the constant-coefficient system
/// Lap psi = 0, Lap phi = psi on B_{3/4} with data (u, v), and measures the sampled C^1 distances
/// over the interior nodes of B_{3/4}. The B_{3/4} grid reuses the inner 3/4 of the B_1 rings,
/// so `resolution` must be a multiple of 8.
inline CoefficientComparison constant_coefficient_compare(const EllipticOperator& op, int resolution,
                                                          const BoundaryData& boundary_u,
                                                          const BoundaryData& boundary_v) {
  if (resolution % 8 != 0) throw InvalidInput("constant_coefficient_compare: resolution must be a multiple of 8");
  const Point c = op.center();
  const auto outer = PolarGrid::with_resolution(c, 1.0, resolution);
  const auto full = solve_split_biharmonic(op, outer, boundary_u, boundary_v);
  CoefficientComparison out;
  out.resolution = resolution;
  out.residual_u = full.residual_u;
  out.residual_v = full.residual_v;
  out.omega = op.omega(c, 1.0);

  const int nr_in = outer.nr * 3 / 4;
  const PolarGrid inner(c, 0.75, nr_in, outer.nt);
  const int ring_b = nr_in;
  auto ring_value = [&](const GridField& g) {
    return [&g, &outer, ring_b](const Point& x) {
      double t = std::atan2(x[1] - outer.center[1], x[0] - outer.center[0]);
      if (t < 0) t += 2.0 * kPi;
      const int j = static_cast<int>(std::lround(t / outer.dtheta())) % outer.nt;
      return g.at(ring_b, j);
    };
  };
  const auto cc = solve_split_biharmonic(PolarCoefficients::from_metric(PolarMetric::euclidean(2)), inner,
                                         ring_value(full.u), ring_value(full.v));

  auto boundary_norm = [&](const BoundaryData& g) {
    double s = 0.0;
    for (int j = 0; j < outer.nt; ++j) {
      const double val = g(outer.node(outer.index(outer.nr, j)));
      s += val * val;
    }
    return std::sqrt(s * outer.dtheta());
  };
  const double nu = boundary_norm(boundary_u), nv = boundary_norm(boundary_v);

  double du0 = std::abs(full.u.values[0] - cc.u.values[0]), dv0 = std::abs(full.v.values[0] - cc.v.values[0]);
  double du1 = 0.0, dv1 = 0.0;
  std::array<double, 2> comp{};
  for (int i = 1; i < nr_in; ++i)
    for (int j = 0; j < outer.nt; ++j) {
      du0 = std::max(du0, std::abs(full.u.at(i, j) - cc.u.at(i, j)));
      dv0 = std::max(dv0, std::abs(full.v.at(i, j) - cc.v.at(i, j)));
      const Point gu = full.u.node_gradient(i, j) - cc.u.node_gradient(i, j);
      const Point gv = full.v.node_gradient(i, j) - cc.v.node_gradient(i, j);
      du1 = std::max(du1, norm(gu));
      dv1 = std::max(dv1, norm(gv));
      for (int k = 0; k < 2; ++k) comp[k] = std::max(comp[k], std::abs(gu[k]));
    }
  out.distance_u = nu > 0.0 ? (du0 + du1) / nu : 0.0;
  out.distance_v = nv > 0.0 ? (dv0 + dv1) / nv : 0.0;
  for (int k = 0; k < 2; ++k) out.gradient_component_distance[k] = nu > 0.0 ? comp[k] / nu : 0.0;
  if (out.omega > 0.0) {
    out.ratio_u = out.distance_u / out.omega;
    out.ratio_v = out.distance_v / out.omega;
  }
  return out;
}

}  // namespace nodal_lab
