#pragma once

#include <cmath>
#include <string>

#include "nodal_lab/biharmonic.hpp"
#include "nodal_lab/frequency.hpp"
#include "nodal_lab/solver.hpp"

namespace nodal_lab {

/// How the harmonic part u_bar (Lap_M u_bar = 0 in B_r, u_bar = u on dB_r) is obtained.
///   spectral: exact Fourier extension of the trace (Euclidean n = 2 only); energies by quadrature.
///   grid:     polar finite elements for any n = 2 metric; energies from the discrete stiffness and mass.
struct LaplaceSolver {
  enum class Kind { spectral, grid } kind = Kind::spectral;
  int resolution = 128;

  static LaplaceSolver spectral() { return {Kind::spectral, 0}; }
  static LaplaceSolver grid(int resolution) { return {Kind::grid, resolution}; }
};

struct ProofDecomposition {
  double r = 0.0;
  double D = 0.0;
  double D1 = 0.0, D2 = 0.0, D3 = 0.0, D4 = 0.0;
  double residual = 0.0;          // |D - (D1 + D2 + D3 + D4)|
  double d4_ratio = 0.0;          // D4 / (r^2 D2 + r^2 D)
  double d2_ratio = 0.0;          // D2 / (r^2 D)
  double boundary_mismatch = 0.0; // max |u_bar - u| on the sphere samples
  double harmonic_residual = 0.0; // relative discrete residual of u_bar (grid) or 0 (spectral)
  std::string backend;
};

inline ProofDecomposition proof_decomposition(const BiharmonicFunction& f, const PolarMetric& metric,
                                              const Point& center, double r,
                                              const LaplaceSolver& solver = LaplaceSolver::spectral()) {
  if (f.dim() != 2 || metric.dim() != 2) throw InvalidInput("proof_decomposition supports n = 2");
  detail::check_chart(metric, r, "proof_decomposition");
  ProofDecomposition p;
  p.r = r;
  const BoundaryData trace = [&f](const Point& x) { return f(x); };
  if (solver.kind == LaplaceSolver::Kind::spectral) {
    if (!metric.is_euclidean()) throw InvalidInput("spectral Laplace solver needs the Euclidean metric");
    p.backend = "spectral";
    const int deg = std::max(1, f.degree());
    const SpectralHarmonic ubar(trace, center, r, std::max(64, 4 * deg + 4));
    const auto q = ball_quadrature(metric, Ball(center, r), default_quadrature_degree(deg));
    double d1 = 0, d2 = 0, d3 = 0, d4 = 0, d = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const Point& x = q.nodes[i];
      const Point rel = x - center;
      const auto j = f.jet(x, 1);
      const Point gb = ubar.gradient(x);
      const Point gw = j.grad - gb;
      const double w = q.weights[i];
      d1 += w * (metric.norm2(rel, gb) + metric.norm2(rel, j.grad_v));
      d2 += w * metric.norm2(rel, gw);
      d3 += w * 2.0 * metric.inner(rel, gb, gw);
      d4 += w * j.u * j.v;
      d += w * (metric.norm2(rel, j.grad) + metric.norm2(rel, j.grad_v) + j.u * j.v);
    }
    p.D = d, p.D1 = d1, p.D2 = d2, p.D3 = d3, p.D4 = d4;
    for (const Point& x : sphere_quadrature(metric, Ball(center, r), 64).nodes)
      p.boundary_mismatch = std::max(p.boundary_mismatch, std::abs(ubar(x) - f(x)));
  } else {
    p.backend = "grid";
    const auto grid = PolarGrid::with_resolution(center, r, solver.resolution);
    DiskFem fem(grid, PolarCoefficients::from_metric(metric));
    const GridField u = GridField::sample(grid, trace);
    const GridField v = GridField::sample(grid, [&f](const Point& x) { return f.v(x); });
    const GridField ubar = fem.solve({}, trace);
    p.harmonic_residual = fem.relative_residual(ubar);
    std::vector<double> wv(u.values.size());
    for (std::size_t k = 0; k < wv.size(); ++k) wv[k] = u.values[k] - ubar.values[k];
    const GridField w(grid, wv);
    for (int k = grid.interior_size(); k < grid.size(); ++k)
      p.boundary_mismatch = std::max(p.boundary_mismatch, std::abs(ubar.values[k] - u.values[k]));
    p.D1 = fem.energy(ubar, ubar) + fem.energy(v, v);
    p.D2 = fem.energy(w, w);
    p.D3 = 2.0 * fem.energy(ubar, w);
    p.D4 = fem.mass_product(u, v);
    p.D = fem.energy(u, u) + fem.energy(v, v) + fem.mass_product(u, v);
  }
  p.residual = std::abs(p.D - (p.D1 + p.D2 + p.D3 + p.D4));
  const double r2 = r * r;
  p.d4_ratio = (p.D2 + p.D) != 0.0 ? p.D4 / (r2 * p.D2 + r2 * p.D) : 0.0;
  p.d2_ratio = p.D != 0.0 ? p.D2 / (r2 * p.D) : 0.0;
  return p;
}

}  // namespace nodal_lab
