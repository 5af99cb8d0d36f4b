#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <vector>

#include "nodal_lab/frequency.hpp"
#include "nodal_lab/sup.hpp"

namespace nodal_lab {

struct FrequencyIndexRelation {
  double E = 0.0;
  double N_lower = 0.0;  // N(x0, (1+eta) r / 2)
  double N_upper = 0.0;  // N(x0, (1+eta) r)
  double lower_bound = 0.0;  // (1-eps)^2 N_lower
  double upper_bound = 0.0;  // (1+eps)^2 N_upper
  double C_lower_req = 0.0;  // smallest C with lower_bound - C <= E
  double C_upper_req = 0.0;  // smallest C with E <= upper_bound + C
};

inline FrequencyIndexRelation frequency_index_relation(const BiharmonicFunction& f, const PolarMetric& metric,
                                                       const Point& center, double r, double eps, double eta,
                                                       const SupRule& rule = {}, int degree = 0) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidInput("frequency_index_relation: eps must lie in (0, 1)");
  if (!(eta > 0.0 && eta < std::exp(eps) - 1.0))
    throw InvalidInput("frequency_index_relation: eta must lie in (0, e^eps - 1)");
  FrequencyIndexRelation rel;
  rel.E = doubling_index(f, center, r, rule);
  rel.N_lower = frequency_components(f, metric, center, (1.0 + eta) * r / 2.0, degree).N;
  rel.N_upper = frequency_components(f, metric, center, (1.0 + eta) * r, degree).N;
  rel.lower_bound = (1.0 - eps) * (1.0 - eps) * rel.N_lower;
  rel.upper_bound = (1.0 + eps) * (1.0 + eps) * rel.N_upper;
  rel.C_lower_req = rel.lower_bound - rel.E;
  rel.C_upper_req = rel.E - rel.upper_bound;
  return rel;
}

struct ChangingCenterCheck {
  double E_far = 0.0;    // E(x2, C rho)
  double target = 0.0;   // 0.99 E(x1, rho)
  bool pass = false;
};

inline constexpr double kChangingCenterFactor = 0.99;

inline ChangingCenterCheck changing_center_check(const BiharmonicFunction& f, const Point& x1, const Point& x2,
                                                 double rho, double c_factor = 4.0, const SupRule& rule = {}) {
  if (!(rho > 0.0)) throw InvalidInput("changing_center_check: rho must be positive");
  if (!(distance(x1, x2) < rho)) throw InvalidInput("changing_center_check: need |x1 - x2| < rho");
  if (!(c_factor > 1.0)) throw InvalidInput("changing_center_check: C must exceed 1");
  ChangingCenterCheck c;
  c.E_far = doubling_index(f, x2, c_factor * rho, rule);
  c.target = kChangingCenterFactor * doubling_index(f, x1, rho, rule);
  c.pass = c.E_far >= c.target;
  return c;
}

inline void write_cube_index_csv(std::ostream& os, const std::vector<CubeIndexReport>& reps) {
  os << "cube_center_x,cube_center_y,cube_center_z,half_width,E,witness_x,witness_y,witness_z,witness_r,clipped\n";
  char buf[320];
  for (const auto& r : reps) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", r.cube.center[0],
                  r.cube.center[1], r.cube.center[2], r.cube.half_width, r.E, r.witness_x[0], r.witness_x[1],
                  r.witness_x[2], r.witness_r, r.clipped ? 1 : 0);
    os << buf;
  }
}

}  // namespace nodal_lab
