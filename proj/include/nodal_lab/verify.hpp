#pragma once

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "nodal_lab/compare.hpp"
#include "nodal_lab/decomposition.hpp"
#include "nodal_lab/defaults.hpp"
#include "nodal_lab/doubling.hpp"
#include "nodal_lab/frequency.hpp"
#include "nodal_lab/nodal.hpp"
#include "nodal_lab/partition.hpp"
#include "nodal_lab/solver.hpp"

namespace nodal_lab {

enum class VerifyLevel { fast, full };

inline VerifyLevel verify_level_from_string(const std::string& s) {
  if (s == "fast") return VerifyLevel::fast;
  if (s == "full") return VerifyLevel::full;
  throw UsageError("--level", "must be \"fast\" or \"full\"");
}

struct CriterionResult {
  CriterionResult() = default;
  CriterionResult(int id, std::string name) : id(id), name(std::move(name)) {}

  int id = 0;
  std::string name;
  bool pass = false;
  bool skipped = false;
  std::string detail;  // deterministic; no timings
  double seconds = 0.0;

  std::string line() const {
    return "criterion " + std::to_string(id) + " " + name + ": " + (skipped ? "SKIP" : pass ? "PASS" : "FAIL") +
           (detail.empty() ? "" : " | " + detail);
  }
};

struct VerifySummary {
  VerifyLevel level = VerifyLevel::fast;
  std::vector<CriterionResult> results;
  int passed = 0, failed = 0, skipped = 0;

  bool ok() const { return failed == 0; }
  std::string report() const {
    std::string s;
    for (const auto& r : results) s += r.line() + "\n";
    s += "summary: " + std::to_string(passed) + " passed, " + std::to_string(failed) + " failed, " +
         std::to_string(skipped) + " skipped of " + std::to_string(results.size()) + "\n";
    return s;
  }
};

/// Fixed seed of the random Almansi family used by criteria 3 to 6.
inline constexpr std::uint64_t kVerifySeed = 20261015;

namespace verify_detail {

inline std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline std::vector<BiharmonicFunction> random_family() { return random_almansi_family(kVerifySeed, 6, 20); }

inline std::string runtime_note(double s, double budget) { return s < budget ? "" : fmt(" runtime over %g s", budget); }

inline CriterionResult frequency_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto E = PolarMetric::euclidean(2);
  double worst = 0.0;
  for (int k = 1; k <= 8; ++k) {
    const auto f = family::re_zk(k);
    for (double r : log_spaced(0.05, 0.8, 10))
      worst = std::max(worst, std::abs(frequency_components(f, E, {}, r).N - k));
  }
  CriterionResult c{1, "frequency exactness"};
  c.seconds = seconds_since(t0);
  c.pass = worst <= defaults::kFrequencyExactTol && c.seconds < defaults::kRuntimeFrequency;
  c.detail = fmt("max |N - k| = %.3e (tol %.0e)", worst, defaults::kFrequencyExactTol) +
             runtime_note(c.seconds, defaults::kRuntimeFrequency);
  return c;
}

inline CriterionResult closed_form_frequency() {
  const auto E = PolarMetric::euclidean(2);
  const auto f = family::radius_squared();
  double worst = 0.0;
  for (double r : {0.25, 0.5, 1.0}) {
    const double r4 = r * r * r * r;
    worst = std::max(worst, std::abs(frequency_components(f, E, {}, r).N - 2.0 * r4 / (r4 + 16.0)));
  }
  CriterionResult c{2, "closed-form frequency"};
  c.pass = worst <= defaults::kClosedFormTol;
  c.detail = fmt("max |N - 2r^4/(r^4+16)| = %.3e", worst);
  return c;
}

inline CriterionResult almost_monotonicity() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto fam = random_family();
  double worst_drift = 0.0, c_max = 0.0;
  bool finite = true;
  for (const auto& metric : {PolarMetric::euclidean(2), PolarMetric(2, MetricFamily::bump, 0.2)}) {
    for (const auto& f : fam) {
      const int d = detail::quad_degree(f, 0);
      const auto a = monotonicity_profile(f, metric, {}, default_radius_grid(), kDefaultC0, d);
      const auto b = monotonicity_profile(f, metric, {}, default_radius_grid(), kDefaultC0, 2 * d);
      finite = finite && std::isfinite(a.C_emp) && std::isfinite(b.C_emp);
      const double scale = std::max(a.C_emp, b.C_emp);
      if (scale > 0.0) worst_drift = std::max(worst_drift, std::abs(a.C_emp - b.C_emp) / scale);
      c_max = std::max({c_max, a.C_emp, b.C_emp});
    }
  }
  CriterionResult c{3, "almost monotonicity"};
  c.seconds = seconds_since(t0);
  c.pass = finite && worst_drift < defaults::kCEmpDrift && c.seconds < defaults::kRuntimeMonotonicity;
  c.detail = fmt("max C_emp = %.6g, max drift under doubled quadrature = %.3e (identity and bump(0.2))", c_max,
                 worst_drift) +
             runtime_note(c.seconds, defaults::kRuntimeMonotonicity);
  return c;
}

inline CriterionResult l2_doubling() {
  const auto E = PolarMetric::euclidean(2);
  double C_fit = 0.0;
  for (const auto& f : random_family())
    for (double t : {2.0, 4.0})
      for (double r : {0.1, 0.2, 0.4, 0.8})
        C_fit = std::max(C_fit, doubling_check(f, E, {}, r, t, defaults::kEps, DoublingNorm::l2_ball).C_req);
  const int k = 3;
  const auto z3 = doubling_check(family::re_zk(k), E, {}, 0.5, 2.0, defaults::kEps, DoublingNorm::l2_ball);
  const double exact = std::pow(2.0, 2 * k + 2);
  const double rel = std::abs(z3.ratio - exact) / exact;
  CriterionResult c{4, "L2 doubling"};
  c.pass = C_fit <= defaults::kL2DoublingCMax && rel <= defaults::kL2RatioRelTol;
  c.detail = fmt("fitted C = %.6g (max %g); Re z^3 ratio %.15g vs %g, rel err %.3e", C_fit, defaults::kL2DoublingCMax,
                 z3.ratio, exact, rel);
  return c;
}

struct CenterCase {
  std::size_t member;
  Point x1, x2;
  double rho;
};

/// Seeded (x1, x2, rho) cases: rho in [0.05, 0.2), x1 uniform in B_0.2, |x2 - x1| < rho.
inline std::vector<CenterCase> changing_center_cases(int count) {
  SeededUniform rng(kVerifySeed + 1);
  auto u01 = [&] { return rng.unit(); };
  std::vector<CenterCase> out;
  for (int i = 0; i < count; ++i) {
    CenterCase c;
    c.member = static_cast<std::size_t>(i);
    c.rho = 0.05 + 0.15 * u01();
    const double a1 = 2.0 * kPi * u01(), s1 = 0.2 * std::sqrt(u01());
    c.x1 = {s1 * std::cos(a1), s1 * std::sin(a1), 0.0};
    const double a2 = 2.0 * kPi * u01(), s2 = c.rho * u01();
    c.x2 = {c.x1[0] + s2 * std::cos(a2), c.x1[1] + s2 * std::sin(a2), 0.0};
    out.push_back(c);
  }
  return out;
}

inline CriterionResult doubling_index_exactness() {
  double worst = 0.0;
  for (int k = 1; k <= 8; ++k)
    for (double r : {0.25, 0.5, 1.0}) worst = std::max(worst, std::abs(doubling_index(family::re_zk(k), {}, r) - k));
  const auto fam = random_family();
  int passed = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  for (const auto& cs : changing_center_cases(10)) {
    const auto cc = changing_center_check(fam[cs.member], cs.x1, cs.x2, cs.rho, 4.0);
    passed += cc.pass ? 1 : 0;
    min_margin = std::min(min_margin, cc.E_far - cc.target);
  }
  CriterionResult c{5, "doubling index"};
  c.pass = worst <= defaults::kDoublingIndexTol && passed == 10;
  c.detail = fmt("max |E - k| = %.3e; changing center %d/10 at C = 4, min margin %.6g", worst, passed, min_margin);
  return c;
}

inline CriterionResult solver_convergence() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto E = PolarMetric::euclidean(2);
  const auto z3 = family::re_zk(3);
  const auto r2 = family::radius_squared();
  std::vector<double> e1, e2;
  for (int J : {64, 128, 256, 512}) {
    const auto g = PolarGrid::with_resolution({}, 0.5, J);
    const auto u = solve_laplace(E, g, [&](const Point& x) { return z3(x); });
    double a = 0.0;
    for (int k = 0; k < g.size(); ++k) a = std::max(a, std::abs(u.values[k] - z3(g.node(k))));
    const auto g1 = PolarGrid::with_resolution({}, 1.0, J);
    const auto s = solve_split_biharmonic(PolarCoefficients::from_metric(E), g1, [&](const Point& x) { return r2(x); },
                                          [&](const Point& x) { return r2.v(x); });
    double b = 0.0;
    for (int k = 0; k < g1.size(); ++k)
      b = std::max({b, std::abs(s.u.values[k] - r2(g1.node(k))), std::abs(s.v.values[k] - r2.v(g1.node(k)))});
    e1.push_back(a);
    e2.push_back(b);
  }
  bool ok = true;
  std::string ratios;
  for (const auto* e : {&e1, &e2}) {
    for (std::size_t i = 1; i < e->size(); ++i) {
      const double q = (*e)[i - 1] / (*e)[i];
      ok = ok && q >= defaults::kSolverRatioLo && q <= defaults::kSolverRatioHi;
      ratios += fmt("%s%.4f", i == 1 ? "" : " ", q);
    }
    ratios += e == &e1 ? " (Re z^3); " : " (r^2, v = 4)";
  }
  CriterionResult c{9, "solver convergence"};
  c.seconds = seconds_since(t0);
  c.pass = ok && c.seconds < defaults::kRuntimeSolver;
  c.detail = "ratios " + ratios + runtime_note(c.seconds, defaults::kRuntimeSolver);
  return c;
}

inline CriterionResult proof_decomposition_check(bool solver_ok) {
  CriterionResult c{6, "proof decomposition"};
  if (!solver_ok) {
    c.detail = "solver convergence (criterion 9) failed";
    return c;
  }
  const auto fam = random_family();
  const auto E = PolarMetric::euclidean(2);
  double worst_d3 = 0.0, worst_res = 0.0;
  for (std::size_t i = 0; i < 10; ++i)
    for (double r : {0.2, 0.4, 0.6}) {
      const auto p = proof_decomposition(fam[i], E, {}, r, LaplaceSolver::spectral());
      worst_d3 = std::max(worst_d3, std::abs(p.D3) / p.D);
      worst_res = std::max(worst_res, p.residual / p.D);
    }
  c.pass = worst_d3 <= defaults::kDecompositionRelTol && worst_res <= defaults::kDecompositionRelTol;
  c.detail = fmt("max |D3|/D = %.3e, max |D - sum D_i|/D = %.3e", worst_d3, worst_res);
  return c;
}

inline CriterionResult nodal_measure() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto f = family::re_zk(3);
  const Ball b({}, 0.5);
  const double fine = extract_nodal_curves(f, b, 1024).total_length;
  const double coarse = extract_nodal_curves(f, b, 512).total_length;
  const double err = std::abs(fine - 3.0) / 3.0, cauchy = std::abs(fine - coarse) / fine;
  CriterionResult c{7, "nodal measure"};
  c.seconds = seconds_since(t0);
  c.pass = err <= defaults::kNodalLengthRelTol && cauchy < defaults::kNodalCauchyTol &&
           c.seconds < defaults::kRuntimeNodal;
  c.detail = fmt("length %.10f (rel err %.3e), grid-halving difference %.3e", fine, err, cauchy) +
             runtime_note(c.seconds, defaults::kRuntimeNodal);
  return c;
}

inline CriterionResult nodal_exponent() {
  std::vector<BiharmonicFunction> fam;
  for (int k = 1; k <= 8; ++k) fam.push_back(family::re_zk(k));
  const auto rep = nodal_bound_report(fam, {}, 1.0, defaults::kNodalGrid);
  CriterionResult c{8, "nodal exponent"};
  c.pass = std::abs(rep.alpha_emp - 1.0) <= defaults::kNodalSlopeTol && rep.bound_holds && rep.fitted == 8;
  c.detail = fmt("alpha_emp = %.6f, C_fit = %.6f, bound holds for all: %s", rep.alpha_emp, rep.C_fit,
                 rep.bound_holds ? "yes" : "no");
  return c;
}

inline CriterionResult propagation_exponent() {
  std::vector<PropagationMember> fam;
  for (int m = 2; m <= 8; ++m) fam.push_back(harmonic_model_member(m));
  const auto rep =
      cauchy_propagation_experiment(fam, Cube(2, {kPi / 2, kPi / 2, 0.0}, kPi / 2), {1, -1}, defaults::kPropagationGrid);
  CriterionResult c{10, "propagation exponent"};
  c.pass = !rep.degenerate && rep.alpha_emp >= defaults::kPropagationAlphaLo &&
           rep.alpha_emp <= defaults::kPropagationAlphaHi;
  c.detail = fmt("alpha_emp = %.6f over %.2f decades of eps", rep.alpha_emp, rep.eps_decades);
  return c;
}

inline CriterionResult partition_counts() {
  const int A = 27;
  const auto rep = dividing_scan(family::re_zk(6), Cube(2, {}, 0.4), A, {1, 0.0}, ThresholdRule::contraction,
                                 defaults::kContractionC);
  const double limit = defaults::kPartitionFraction * A;
  bool strata_ok = true;
  const Stratum expected[4] = {Stratum::C1, Stratum::C2, Stratum::C3, Stratum::C4};
  for (bool relative : {false, true}) {
    const StrataThresholds tau{defaults::kStrataTau, defaults::kStrataTau, defaults::kStrataTau, relative};
    for (int k = 1; k <= 4; ++k)
      strata_ok = strata_ok && classify_strata(family::re_zk(k), {Point{}}, tau)[0].stratum == expected[k - 1];
  }
  CriterionResult c{11, "partition counts"};
  c.pass = rep.count() < limit && strata_ok;
  c.detail = fmt("E(Q) = %.6f, count %ld of %ld hyperplane cubes (limit %.1f); strata labels %s", rep.E_Q, rep.count(),
                 rep.levels[1].candidates, limit, strata_ok ? "match" : "differ");
  return c;
}

inline CriterionResult simplex_covering() {
  const double s3 = std::sqrt(3.0);
  const Simplex tri = simplex_geometry({{0, 0, 0}, {1, 0, 0}, {0.5, s3 / 2, 0}});
  const Simplex tet = simplex_geometry({{0, 0, 0}, {1, 0, 0}, {0.5, s3 / 2, 0}, {0.5, s3 / 6, std::sqrt(2.0 / 3.0)}});
  bool ok = true;
  std::string detail;
  for (const auto* s : {&tri, &tet}) {
    const double kappa = 0.5 * s->width;
    const auto k = find_cover_constant(*s, kappa, defaults::kSimplexC);
    const bool pass = k.found && simplex_cover_check(*s, kappa, k.K0, defaults::kSimplexC).pass;
    ok = ok && pass;
    detail += fmt("n = %d: K0 = %.6f, K1 = %.6f; ", s->dim, k.K0, k.K1);
  }
  int rejected = 0;
  const std::vector<std::vector<Point>> degenerate = {{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}},
                                                      {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}}};
  for (const auto& v : degenerate) {
    try {
      simplex_cover_check(simplex_geometry(v), 0.1, 3.0, defaults::kSimplexC);
    } catch (const InvalidInput&) {
      ++rejected;
    }
  }
  CriterionResult c{12, "simplex covering"};
  c.pass = ok && rejected == 2;
  c.detail = detail + fmt("degenerate rejected %d/2", rejected);
  return c;
}

inline std::vector<CriterionResult> run_criteria(const std::function<void(const CriterionResult&)>& on_result) {
  std::vector<CriterionResult> out;
  auto add = [&](CriterionResult r) {
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  };
  auto solver = solver_convergence();
  const bool solver_ok = solver.pass;
  add(frequency_exactness());
  add(closed_form_frequency());
  add(almost_monotonicity());
  add(l2_doubling());
  add(doubling_index_exactness());
  add(proof_decomposition_check(solver_ok));
  add(nodal_measure());
  add(nodal_exponent());
  add(std::move(solver));
  add(propagation_exponent());
  add(partition_counts());
  add(simplex_covering());
  return out;
}

inline std::string criteria_report(const std::vector<CriterionResult>& rs) {
  std::string s;
  for (const auto& r : rs) s += r.line() + "\n";
  return s;
}

class ScopedThreads {
 public:
  explicit ScopedThreads(int n) {
    if (const char* v = std::getenv("NODAL_LAB_THREADS")) old_ = v;
    ::setenv("NODAL_LAB_THREADS", std::to_string(n).c_str(), 1);
  }
  ~ScopedThreads() {
    if (old_) ::setenv("NODAL_LAB_THREADS", old_->c_str(), 1);
    else ::unsetenv("NODAL_LAB_THREADS");
  }

 private:
  std::optional<std::string> old_;
};

}  // namespace verify_detail

/// Runs criteria 1 to 12; `full` adds criterion 13, which reruns 1 to 12 under a different worker
/// cap and compares the two reports byte for byte. `on_result` sees each result as it completes.
inline VerifySummary verify_suite(VerifyLevel level,
                                  const std::function<void(const CriterionResult&)>& on_result = {}) {
  using namespace verify_detail;
  VerifySummary s;
  s.level = level;
  s.results = run_criteria(on_result);
  CriterionResult det{13, "determinism"};
  if (level == VerifyLevel::fast) {
    det.skipped = true;
    det.detail = "full level only";
  } else {
    const auto t0 = std::chrono::steady_clock::now();
    const std::string first = criteria_report(s.results);
    const int other = worker_count() == 1 ? 3 : 1;
    std::vector<CriterionResult> again;
    {
      ScopedThreads guard(other);
      again = run_criteria({});
    }
    const std::string second = criteria_report(again);
    det.pass = first == second;
    det.seconds = seconds_since(t0);
    det.detail = fmt("rerun with %d worker(s): reports %s (%zu bytes)", other, det.pass ? "identical" : "differ",
                     first.size());
  }
  if (on_result) on_result(det);
  s.results.push_back(det);
  for (const auto& r : s.results) {
    if (r.skipped) ++s.skipped;
    else if (r.pass) ++s.passed;
    else ++s.failed;
  }
  return s;
}

}  // namespace nodal_lab
