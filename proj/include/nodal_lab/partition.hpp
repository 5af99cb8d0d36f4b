#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "nodal_lab/biharmonic.hpp"
#include "nodal_lab/geometry.hpp"
#include "nodal_lab/nodal.hpp"
#include "nodal_lab/parallel.hpp"
#include "nodal_lab/sup.hpp"

namespace nodal_lab {

struct Hyperplane {
  int axis = 1;  // x_n for n = 2
  double offset = 0.0;
};

enum class ThresholdRule { half, contraction };

inline std::string to_string(ThresholdRule r) { return r == ThresholdRule::half ? "half" : "contraction"; }

inline ThresholdRule threshold_rule_from_string(const std::string& s) {
  if (s == "half") return ThresholdRule::half;
  if (s == "contraction") return ThresholdRule::contraction;
  throw InvalidInput("unknown threshold rule '" + s + "'");
}

/// half: E(q) > E(parent) / 2. contraction: E(q) >= E(parent) / (1 + c).
inline double rule_threshold(ThresholdRule rule, double parent_E, double c) {
  return rule == ThresholdRule::half ? parent_E / 2.0 : parent_E / (1.0 + c);
}

inline bool rule_exceeds(ThresholdRule rule, double E, double threshold) {
  return rule == ThresholdRule::half ? E > threshold : E >= threshold;
}

struct SubcubeEntry {
  int level = 1;
  std::vector<int> address;  // lineage relative to Q
  double E = 0.0;
  bool meets_hyperplane = false;
  bool exceeds = false;
};

struct PartitionLevel {
  int level = 0;
  long T = 0;                 // exceeding hyperplane cubes at this level
  long candidates = 0;        // hyperplane-meeting subcubes examined
  bool structural_bound = true;  // T_k <= T_{k-1} A^{n-1}
  bool strong_bound = true;      // T_k <= T_{k-1} (A^{n-1} - 1)
};

struct PartitionReport {
  Cube Q;
  int A = 3;
  Hyperplane plane;
  ThresholdRule rule = ThresholdRule::half;
  double c = 0.05;
  double E_Q = 0.0;
  double threshold = 0.0;  // first-level threshold
  std::vector<SubcubeEntry> entries;
  std::vector<PartitionLevel> levels;  // levels[0] is Q itself with T = 1
  int depth = 1;

  long count() const { return levels.size() > 1 ? levels[1].T : 0; }

  void write_csv(std::ostream& os) const {
    os << "level,address,E,meets_hyperplane,exceeds\n";
    char buf[96];
    for (const auto& e : entries) {
      std::string addr;
      for (std::size_t i = 0; i < e.address.size(); ++i) addr += (i ? "-" : "") + std::to_string(e.address[i]);
      std::snprintf(buf, sizeof buf, ",%.17g,%d,%d\n", e.E, e.meets_hyperplane ? 1 : 0, e.exceeds ? 1 : 0);
      os << e.level << ',' << addr << buf;
    }
  }
};

/// Number of first-level hyperplane cubes whose index passes `threshold` under `rule`.
inline long count_exceeding(const PartitionReport& rep, double threshold) {
  long n = 0;
  for (const auto& e : rep.entries)
    if (e.level == 1 && e.meets_hyperplane && rule_exceeds(rep.rule, e.E, threshold)) ++n;
  return n;
}

/// Partitions Q into A^n subcubes, evaluates cube_index on those meeting the hyperplane (all
/// subcubes with `scan_all`), and counts exceedances. Exceeding cubes are partitioned again, up
/// to `depth` levels, each compared with its own parent index.
inline PartitionReport dividing_scan(const BiharmonicFunction& f, const Cube& Q, int A, const Hyperplane& plane,
                                     ThresholdRule rule, double c = 0.05, int depth = 1, int samples = 5,
                                     bool scan_all = false, const SupRule& sup = {}) {
  if (A < 3 || A % 2 == 0) throw InvalidInput("dividing_scan: A must be an odd integer >= 3");
  if (depth < 1) throw InvalidInput("dividing_scan: depth must be >= 1");
  if (!(c > 0.0)) throw InvalidInput("dividing_scan: c must be positive");
  if (plane.axis < 0 || plane.axis >= Q.dim) throw InvalidInput("dividing_scan: hyperplane axis out of range");
  if (f.dim() != Q.dim) throw InvalidInput("dividing_scan: dimension mismatch");
  PartitionReport rep;
  rep.Q = Cube(Q.dim, Q.center, Q.half_width);
  rep.A = A;
  rep.plane = plane;
  rep.rule = rule;
  rep.c = c;
  rep.depth = depth;
  rep.E_Q = cube_index(f, rep.Q, samples, sup).E;
  rep.threshold = rule_threshold(rule, rep.E_Q, c);
  const long face = Q.dim == 2 ? A : static_cast<long>(A) * A;
  rep.levels.push_back({0, 1, 1, true, true});

  struct Parent {
    Cube cube;
    double E;
  };
  std::vector<Parent> parents{{rep.Q, rep.E_Q}};
  for (int level = 1; level <= depth; ++level) {
    std::vector<Cube> todo;
    std::vector<double> parent_E;
    for (const auto& p : parents)
      for (auto& q : cube_partition(p.cube, A))
        if (scan_all || meets_hyperplane(q, plane.axis, plane.offset)) {
          todo.push_back(q);
          parent_E.push_back(p.E);
        }
    const auto E = parallel_map<double>(todo.size(), [&](std::size_t i) { return cube_index(f, todo[i], samples, sup).E; });
    PartitionLevel L;
    L.level = level;
    std::vector<Parent> next;
    for (std::size_t i = 0; i < todo.size(); ++i) {
      SubcubeEntry e;
      e.level = level;
      e.address = todo[i].lineage;
      e.E = E[i];
      e.meets_hyperplane = meets_hyperplane(todo[i], plane.axis, plane.offset);
      e.exceeds = e.meets_hyperplane && rule_exceeds(rule, E[i], rule_threshold(rule, parent_E[i], c));
      if (e.meets_hyperplane) ++L.candidates;
      if (e.exceeds) {
        ++L.T;
        next.push_back({todo[i], E[i]});
      }
      rep.entries.push_back(std::move(e));
    }
    const long prev = rep.levels.back().T;
    L.structural_bound = L.T <= prev * face;
    L.strong_bound = L.T <= prev * (face - 1);
    rep.levels.push_back(L);
    parents = std::move(next);
    if (parents.empty()) {
      for (int rest = level + 1; rest <= depth; ++rest) rep.levels.push_back({rest, 0, 0, true, true});
      break;
    }
  }
  return rep;
}

struct SimplexCheck {
  Simplex simplex;
  double kappa = 0.0, K = 0.0, c = 0.0;
  double rho = 0.0;
  int samples = 0;
  double worst_margin = 0.0;  // min over samples of rho - min_i |y - x_i|
  long failing = 0;
  bool pass = false;
};

namespace detail {

inline std::vector<Point> sphere_samples(int n, int count) {
  std::vector<Point> out;
  out.reserve(count);
  if (n == 2) {
    for (int i = 0; i < count; ++i) {
      const double t = 2.0 * kPi * i / count;
      out.push_back({std::cos(t), std::sin(t), 0.0});
    }
  } else {
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / count;
      const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
      out.push_back({s * std::cos(golden * i), s * std::sin(golden * i), z});
    }
  }
  return out;
}

}  // namespace detail

inline constexpr int kSimplexSamples = 10000;

/// Checks that the sphere of radius (1+c) rho about the barycenter lies in the union of the balls
/// B_rho(x_i), rho = K diam(S).
inline SimplexCheck simplex_cover_check(const Simplex& S, double kappa, double K, double c,
                                        int samples = kSimplexSamples) {
  if (!(kappa > 0.0)) throw InvalidInput("simplex_cover_check: kappa must be positive");
  if (!(S.width > kappa)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "simplex_cover_check: width %.17g does not exceed kappa %.17g", S.width, kappa);
    throw InvalidInput(buf);
  }
  if (!(K > 0.0) || !(c > 0.0)) throw InvalidInput("simplex_cover_check: K and c must be positive");
  if (samples < kSimplexSamples) throw InvalidInput("simplex_cover_check: at least 10^4 samples are required");
  SimplexCheck out;
  out.simplex = S;
  out.kappa = kappa;
  out.K = K;
  out.c = c;
  out.rho = K * S.diameter;
  out.samples = samples;
  out.worst_margin = std::numeric_limits<double>::infinity();
  const double R = (1.0 + c) * out.rho;
  for (const Point& d : detail::sphere_samples(S.dim, samples)) {
    const Point y = S.barycenter + R * d;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& v : S.vertices) best = std::min(best, distance(y, v));
    const double margin = out.rho - best;
    if (margin < 0.0) ++out.failing;
    out.worst_margin = std::min(out.worst_margin, margin);
  }
  out.pass = out.failing == 0;
  return out;
}

struct CoverConstant {
  bool found = false;
  double K0 = 0.0;  // smallest passing K (bisection)
  double K1 = 0.0;  // largest passing K (bisection)
  double c = 0.0;
};

/// Scans K on 96 log-spaced values in [0.05, 2000] for a passing value, then bisects both edges
/// of the passing window to relative width 1e-10.
inline CoverConstant find_cover_constant(const Simplex& S, double kappa, double c, int samples = kSimplexSamples) {
  CoverConstant out;
  out.c = c;
  const int grid = 96;
  auto K_at = [&](int i) { return 0.05 * std::pow(2000.0 / 0.05, static_cast<double>(i) / (grid - 1)); };
  auto ok = [&](double K) { return simplex_cover_check(S, kappa, K, c, samples).pass; };
  int hit = -1;
  for (int i = 0; i < grid && hit < 0; ++i)
    if (ok(K_at(i))) hit = i;
  if (hit < 0) return out;
  out.found = true;
  auto bisect = [&](double pass, double fail) {
    while (std::abs(pass - fail) > 1e-10 * pass) {
      const double mid = 0.5 * (pass + fail);
      (ok(mid) ? pass : fail) = mid;
    }
    return pass;
  };
  out.K0 = hit == 0 ? K_at(0) : bisect(K_at(hit), K_at(hit - 1));
  int last = hit;
  while (last + 1 < grid && ok(K_at(last + 1))) ++last;
  out.K1 = last + 1 == grid ? K_at(last) : bisect(K_at(last), K_at(last + 1));
  return out;
}

/// One member of a Cauchy-data family: u, its gradient and the source v = L u.
struct PropagationMember {
  std::string label;
  std::function<double(const Point&)> u;
  std::function<Point(const Point&)> grad;
  std::function<double(const Point&)> source;
};

/// sin(m x) sinh(m y) / sinh(m pi), harmonic on [0, pi]^2 with vanishing trace on y = 0.
inline PropagationMember harmonic_model_member(int m) {
  const double s = std::sinh(m * kPi);
  return {"m=" + std::to_string(m),
          [m, s](const Point& x) { return std::sin(m * x[0]) * std::sinh(m * x[1]) / s; },
          [m, s](const Point& x) {
            return Point{m * std::cos(m * x[0]) * std::sinh(m * x[1]) / s,
                         m * std::sin(m * x[0]) * std::cosh(m * x[1]) / s, 0.0};
          },
          [](const Point&) { return 0.0; }};
}

inline PropagationMember biharmonic_member(const BiharmonicFunction& f, std::string label) {
  if (f.dim() != 2) throw InvalidInput("propagation members must be planar");
  return {std::move(label), [f](const Point& x) { return f(x); }, [f](const Point& x) { return f.jet(x, 1).grad; },
          [f](const Point& x) { return f.v(x); }};
}

struct Face {
  int axis = 1;
  int side = -1;  // -1: lower face, +1: upper face
};

/// Trapezium presets. lemma42: base = F, top r/2, height 3r/4. lemma43: base r/(16 sqrt n),
/// top r/(32 sqrt n), height 3r/(64 sqrt n), centered on F.
enum class TrapeziumPreset { lemma42, lemma43 };

inline std::string to_string(TrapeziumPreset p) { return p == TrapeziumPreset::lemma42 ? "lemma42" : "lemma43"; }

inline TrapeziumPreset trapezium_preset_from_string(const std::string& s) {
  if (s == "lemma42") return TrapeziumPreset::lemma42;
  if (s == "lemma43") return TrapeziumPreset::lemma43;
  throw InvalidInput("unknown trapezium preset '" + s + "'");
}

/// Where the half cube sits: sharing the center of F, or concentric with Q.
enum class HalfCube { face_adjacent, concentric };

struct PropagationRow {
  std::string label;
  double eps = 0.0;
  double sup_half = 0.0;       // sup over 1/2 Q in the chosen placement
  double sup_concentric = 0.0; // sup over the concentric 1/2 Q
  double sup_trapezium = 0.0;
  bool included = true;
  std::string flag;
};

struct PropagationReport {
  Cube Q;
  Face F;
  int grid = 512;
  std::vector<PropagationRow> rows;
  double alpha_emp = std::numeric_limits<double>::quiet_NaN();  // fit of log sup_half on log eps
  double alpha_trapezium = std::numeric_limits<double>::quiet_NaN();
  double fit_residual = 0.0;  // RMS residual of the half-cube fit
  double eps_decades = 0.0;
  bool degenerate = false;
  bool fit_well_posed = false;  // >= 5 points spanning >= 3 decades

  void write_csv(std::ostream& os) const {
    os << "label,eps,sup_half,sup_concentric,sup_trapezium,included,flag\n";
    char buf[160];
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,%.17g,%d,", r.eps, r.sup_half, r.sup_concentric,
                    r.sup_trapezium, r.included ? 1 : 0);
      os << r.label << buf << r.flag << '\n';
    }
  }
};

namespace detail {

/// Local frame of Q relative to F: s runs along F in [0, r], t is the distance from F in [0, r].
struct FaceFrame {
  Cube Q;
  Face F;
  Point at(double s, double t) const {
    Point x = Q.center;
    const int along = 1 - F.axis;
    x[along] = Q.center[along] - Q.half_width + s;
    x[F.axis] = F.side < 0 ? Q.center[F.axis] - Q.half_width + t : Q.center[F.axis] + Q.half_width - t;
    return x;
  }
};

inline double rms_residual(const std::vector<double>& x, const std::vector<double>& y, double slope) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= x.size();
  my /= y.size();
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (my + slope * (x[i] - mx));
    s += e * e;
  }
  return std::sqrt(s / x.size());
}

}  // namespace detail

/// Cauchy data size eps = max(sup_F |u|, r sup_F |grad u|, r^2 sup_Q |v|), r the edge of Q.
/// Members with sup_Q |u| > 1 or eps >= 1 are excluded with a flag. Sups are taken over
/// grid x grid samples of each region (F over 8 grid samples).
inline PropagationReport cauchy_propagation_experiment(const std::vector<PropagationMember>& family, const Cube& Q,
                                                       const Face& F, int grid = 512,
                                                       TrapeziumPreset preset = TrapeziumPreset::lemma42,
                                                       HalfCube half = HalfCube::face_adjacent) {
  if (Q.dim != 2) throw InvalidInput("cauchy_propagation_experiment: n = 2 only");
  if (F.axis < 0 || F.axis > 1 || (F.side != -1 && F.side != 1)) throw InvalidInput("cauchy_propagation_experiment: bad face");
  if (grid < 16) throw InvalidInput("cauchy_propagation_experiment: grid must be >= 16");
  PropagationReport rep;
  rep.Q = Q;
  rep.F = F;
  rep.grid = grid;
  const detail::FaceFrame frame{Q, F};
  const double r = Q.edge();
  const double sq = std::sqrt(2.0);
  const double base = preset == TrapeziumPreset::lemma42 ? r : r / (16.0 * sq);
  const double top = preset == TrapeziumPreset::lemma42 ? r / 2.0 : r / (32.0 * sq);
  const double height = preset == TrapeziumPreset::lemma42 ? 0.75 * r : 3.0 * r / (64.0 * sq);

  rep.rows = parallel_map<PropagationRow>(family.size(), [&](std::size_t idx) {
    const auto& m = family[idx];
    PropagationRow row;
    row.label = m.label;
    double sup_q = 0.0, sup_v = 0.0;
    for (int i = 0; i <= grid; ++i)
      for (int j = 0; j <= grid; ++j) {
        const Point x = frame.at(r * i / grid, r * j / grid);
        sup_q = std::max(sup_q, std::abs(m.u(x)));
        if (m.source) sup_v = std::max(sup_v, std::abs(m.source(x)));
      }
    double sup_fu = 0.0, sup_fg = 0.0;
    for (int i = 0; i <= 8 * grid; ++i) {
      const Point x = frame.at(r * i / (8 * grid), 0.0);
      sup_fu = std::max(sup_fu, std::abs(m.u(x)));
      sup_fg = std::max(sup_fg, norm(m.grad(x)));
    }
    row.eps = std::max({sup_fu, r * sup_fg, r * r * sup_v});
    if (sup_q > 1.0) {
      row.included = false;
      row.flag = "sup over Q exceeds 1";
    } else if (!(row.eps < 1.0)) {
      row.included = false;
      row.flag = "eps not below 1";
    }
    auto sup_rect = [&](double s0, double t0, double side) {
      double s = 0.0;
      for (int i = 0; i <= grid; ++i)
        for (int j = 0; j <= grid; ++j)
          s = std::max(s, std::abs(m.u(frame.at(s0 + side * i / grid, t0 + side * j / grid))));
      return s;
    };
    const double adj = sup_rect(r / 4, 0.0, r / 2), conc = sup_rect(r / 4, r / 4, r / 2);
    row.sup_concentric = conc;
    row.sup_half = half == HalfCube::face_adjacent ? adj : conc;
    for (int j = 0; j <= grid; ++j) {
      const double t = height * j / grid;
      const double w = base + (top - base) * t / height;
      for (int i = 0; i <= grid; ++i)
        row.sup_trapezium =
            std::max(row.sup_trapezium, std::abs(m.u(frame.at(r / 2 - w / 2 + w * i / grid, t))));
    }
    return row;
  });

  std::vector<double> lx, ly, lt;
  for (const auto& row : rep.rows)
    if (row.included && row.eps > 0.0 && row.sup_half > 0.0) {
      lx.push_back(std::log(row.eps));
      ly.push_back(std::log(row.sup_half));
      lt.push_back(std::log(std::max(row.sup_trapezium, std::numeric_limits<double>::min())));
    }
  if (lx.size() < 2) {
    rep.degenerate = true;
    return rep;
  }
  rep.alpha_emp = ols_slope(lx, ly);
  rep.alpha_trapezium = ols_slope(lx, lt);
  rep.fit_residual = detail::rms_residual(lx, ly, rep.alpha_emp);
  const auto [lo, hi] = std::minmax_element(lx.begin(), lx.end());
  rep.eps_decades = (*hi - *lo) / std::log(10.0);
  rep.fit_well_posed = lx.size() >= 5 && rep.eps_decades >= 3.0;
  return rep;
}

struct FCurve {
  std::vector<double> E_grid;
  std::vector<double> F_emp;
  std::vector<bool> is_bad;
  double A2 = 9.0, c = 0.05;
  double alpha = 0.0;      // log_{1+c}(4 A2)
  double C_fit = 0.0;      // max F_emp(E) / E^alpha over E > 0
  bool fit_holds = true;
  struct Sample {
    std::size_t member = 0, cube = 0;
    double E = 0.0;
    double normalized_measure = 0.0;  // H^{n-1}(nodal set in cube) / diam^{n-1}
  };
  std::vector<Sample> samples;

  void write_csv(std::ostream& os) const {
    os << "E,F_emp,is_bad\n";
    char buf[96];
    for (std::size_t i = 0; i < E_grid.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", E_grid[i], F_emp[i], is_bad[i] ? 1 : 0);
      os << buf;
    }
  }
};

inline double recursion_alpha(double A2, double c) {
  if (!(A2 > 0.0) || !(c > 0.0)) throw InvalidInput("recursion_alpha: A2 and c must be positive");
  return std::log(4.0 * A2) / std::log1p(c);
}

/// Empirical F(E) = max over (member, cube) with E(Q) <= E of the normalized nodal measure.
/// E is a bad number when F(E) >= 4 A2 F(E / (1 + c)) with F(E) > 0.
inline FCurve f_recursion(const std::vector<BiharmonicFunction>& family, const std::vector<Cube>& cubes, double A2,
                          double c, const std::vector<double>& E_grid, int grid_n = 256, int samples = 5,
                          const SupRule& sup = {}) {
  if (family.empty()) throw InvalidInput("f_recursion: family must be nonempty");
  for (std::size_t i = 1; i < E_grid.size(); ++i)
    if (!(E_grid[i] > E_grid[i - 1])) throw InvalidInput("f_recursion: E grid must be increasing");
  FCurve out;
  out.A2 = A2;
  out.c = c;
  out.alpha = recursion_alpha(A2, c);
  out.E_grid = E_grid;
  const std::size_t total = family.size() * cubes.size();
  out.samples = parallel_map<FCurve::Sample>(total, [&](std::size_t k) {
    const std::size_t i = k / cubes.size(), j = k % cubes.size();
    FCurve::Sample s{i, j, 0.0, 0.0};
    s.E = cube_index(family[i], cubes[j], samples, sup).E;
    s.normalized_measure = extract_nodal_curves(family[i], cubes[j], grid_n).total_length / cubes[j].diameter();
    return s;
  });
  auto F = [&](double E) {
    double best = 0.0;
    for (const auto& s : out.samples)
      if (s.E <= E) best = std::max(best, s.normalized_measure);
    return best;
  };
  for (double E : E_grid) {
    const double fe = F(E);
    out.F_emp.push_back(fe);
    out.is_bad.push_back(fe > 0.0 && fe >= 4.0 * A2 * F(E / (1.0 + c)));
  }
  for (std::size_t i = 0; i < E_grid.size(); ++i)
    if (E_grid[i] > 0.0) out.C_fit = std::max(out.C_fit, out.F_emp[i] / std::pow(E_grid[i], out.alpha));
  for (std::size_t i = 0; i < E_grid.size(); ++i)
    if (E_grid[i] > 0.0 && out.F_emp[i] > out.C_fit * std::pow(E_grid[i], out.alpha) * (1.0 + 1e-12))
      out.fit_holds = false;
  return out;
}

}  // namespace nodal_lab
