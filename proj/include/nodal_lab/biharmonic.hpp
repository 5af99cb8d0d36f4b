#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "nodal_lab/errors.hpp"
#include "nodal_lab/harmonic.hpp"
#include "nodal_lab/polynomial.hpp"
#include "nodal_lab/region.hpp"

namespace nodal_lab {

/// Derivatives of u up to third order plus v = Lap u with its gradient and Hessian.
/// Entries beyond the active dimension are zero.
struct JetValues {
  int n = 2;
  double u = 0.0;
  Point grad{};
  Mat3 hess{};
  Tensor3 third{};
  double v = 0.0;
  Point grad_v{};
  Mat3 hess_v{};
};

/// u = h1 + |x|^2 h2 with v = Lap u = sum_d (2n + 4d) h2_d kept in basis form.
class BiharmonicFunction {
 public:
  BiharmonicFunction() : BiharmonicFunction(HarmonicPolynomial::zero(2), HarmonicPolynomial::zero(2)) {}

  BiharmonicFunction(HarmonicPolynomial h1, HarmonicPolynomial h2) : h1_(std::move(h1)), h2_(std::move(h2)) {
    if (h1_.dim() != h2_.dim()) throw InvalidInput("almansi_compose: h1 and h2 differ in dimension");
    const int n = h1_.dim();
    v_ = h2_.scaled_by_degree([n](int d) { return 2.0 * n + 4.0 * d; });
    auto c = std::make_shared<Cache>();
    c->u = h1_.polynomial() + Polynomial::radius_squared(n) * h2_.polynomial();
    c->v = v_.polynomial();
    for (int i = 0; i < 3; ++i) {
      c->du[i] = c->u.derivative(i);
      c->dv[i] = c->v.derivative(i);
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        c->d2u[i][j] = c->du[i].derivative(j);
        c->d2v[i][j] = c->dv[i].derivative(j);
        for (int k = 0; k < 3; ++k) c->d3u[i][j][k] = c->d2u[i][j].derivative(k);
      }
    c->degree = std::max(0, std::max(c->u.degree(), c->v.degree()));
    cache_ = std::move(c);
  }

  int dim() const { return h1_.dim(); }
  const HarmonicPolynomial& h1() const { return h1_; }
  const HarmonicPolynomial& h2() const { return h2_; }
  const HarmonicPolynomial& v_harmonic() const { return v_; }
  const Polynomial& u_polynomial() const { return cache_->u; }
  const Polynomial& v_polynomial() const { return cache_->v; }
  int degree() const { return std::max(0, cache_->u.degree()); }
  bool is_zero() const { return h1_.is_zero() && h2_.is_zero(); }

  double operator()(const Point& x) const { return cache_->u(x); }
  double v(const Point& x) const { return cache_->v(x); }

  /// Jet at x. `order` limits the work: 0 -> u, v; 1 adds gradients; 2 Hessians; 3 third derivatives.
  JetValues jet(const Point& x, int order = 3) const {
    const Cache& c = *cache_;
    const int n = dim();
    JetValues j;
    j.n = n;
    const auto pw = Polynomial::powers(x, c.degree);
    j.u = c.u.evaluate_powers(pw);
    j.v = c.v.evaluate_powers(pw);
    if (order < 1) return j;
    for (int a = 0; a < n; ++a) {
      j.grad[a] = c.du[a].evaluate_powers(pw);
      j.grad_v[a] = c.dv[a].evaluate_powers(pw);
    }
    if (order < 2) return j;
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        j.hess[a][b] = j.hess[b][a] = c.d2u[a][b].evaluate_powers(pw);
        j.hess_v[a][b] = j.hess_v[b][a] = c.d2v[a][b].evaluate_powers(pw);
      }
    if (order < 3) return j;
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b)
        for (int d = b; d < n; ++d) {
          const double t = c.d3u[a][b][d].evaluate_powers(pw);
          j.third[a][b][d] = j.third[a][d][b] = j.third[b][a][d] = t;
          j.third[b][d][a] = j.third[d][a][b] = j.third[d][b][a] = t;
        }
    return j;
  }

  BiharmonicFunction scaled(double s) const { return {s * h1_, s * h2_}; }

  /// u + s v, again biharmonic since v is harmonic.
  BiharmonicFunction plus_v(double s) const { return {h1_ + s * v_, h2_}; }

  bool operator==(const BiharmonicFunction& o) const { return h1_ == o.h1_ && h2_ == o.h2_; }

 private:
  struct Cache {
    Polynomial u, v;
    std::array<Polynomial, 3> du, dv;
    std::array<std::array<Polynomial, 3>, 3> d2u, d2v;
    std::array<std::array<std::array<Polynomial, 3>, 3>, 3> d3u;
    int degree = 0;
  };

  HarmonicPolynomial h1_, h2_, v_;
  std::shared_ptr<const Cache> cache_;
};

inline BiharmonicFunction almansi_compose(const HarmonicPolynomial& h1, const HarmonicPolynomial& h2) {
  return BiharmonicFunction(h1, h2);
}

inline JetValues evaluate_jet(const BiharmonicFunction& f, const Point& x) { return f.jet(x, 3); }

/// Convenience constructors used throughout the tests and demos.
namespace family {

/// Index of r^m cos(m theta) (kind 0) or r^m sin(m theta) (kind 1) in the n = 2 basis.
inline int planar_index(int m, bool sine) {
  if (m < 0) throw InvalidInput("negative harmonic order");
  if (m == 0) {
    if (sine) throw InvalidInput("sin with m = 0 is not a basis element");
    return 0;
  }
  return sine ? 2 * m : 2 * m - 1;
}

inline BiharmonicFunction re_zk(int k, double scale = 1.0) {
  return {HarmonicPolynomial::basis_element(2, planar_index(k, false), scale), HarmonicPolynomial::zero(2)};
}

inline BiharmonicFunction im_zk(int k, double scale = 1.0) {
  return {HarmonicPolynomial::basis_element(2, planar_index(k, true), scale), HarmonicPolynomial::zero(2)};
}

inline BiharmonicFunction constant(double c, int n = 2) {
  return {HarmonicPolynomial(n, {{0, c}}), HarmonicPolynomial::zero(n)};
}

/// |x|^2, with v = 2n.
inline BiharmonicFunction radius_squared(int n = 2) {
  return {HarmonicPolynomial::zero(n), HarmonicPolynomial(n, {{0, 1.0}})};
}

/// x^3 + x y^2 = |x|^2 x, with v = 8x.
inline BiharmonicFunction r2_times_x() {
  return {HarmonicPolynomial::zero(2), HarmonicPolynomial(2, {{planar_index(1, false), 1.0}})};
}

}  // namespace family

/// Uniform doubles in [-1, 1) from a 64-bit Mersenne twister; the mapping is fixed
/// so streams are reproducible across standard libraries.
class SeededUniform {
 public:
  explicit SeededUniform(std::uint64_t seed) : rng_(seed) {}
  double next() { return 2.0 * unit() - 1.0; }
  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  std::uint64_t raw() { return rng_(); }

 private:
  std::mt19937_64 rng_;
};

/// `count` functions with h1 of degree <= degree_cap and h2 of degree <= degree_cap - 2,
/// coefficients uniform in [-1, 1).
inline std::vector<BiharmonicFunction> random_almansi_family(std::uint64_t seed, int degree_cap, int count, int n = 2) {
  if (degree_cap < 0) throw InvalidInput("random family: degree cap must be >= 0");
  if (count < 0) throw InvalidInput("random family: count must be >= 0");
  SeededUniform rng(seed);
  std::vector<BiharmonicFunction> out;
  out.reserve(count);
  const int cap = std::max(kDefaultDegreeCap, degree_cap);
  for (int i = 0; i < count; ++i) {
    std::vector<HarmonicPolynomial::Term> t1, t2;
    for (int k = 0; k < basis_size(n, degree_cap); ++k) t1.push_back({k, rng.next()});
    for (int k = 0; k < basis_size(n, degree_cap - 2); ++k) t2.push_back({k, rng.next()});
    out.emplace_back(HarmonicPolynomial(n, t1, cap), HarmonicPolynomial(n, t2, cap));
  }
  return out;
}

/// Max over `samples` points of |Lap^2 f| using sum_ij d_i^2 d_j^2 with step h = 0.2 radius,
/// combined over h, h/2 and h/4 (two Richardson levels, exact for polynomials of degree <= 9) and evaluated in long double.
template <class Sampler>
long double bilaplacian_at(Sampler&& f, const std::array<long double, 3>& x, int n, long double h) {
  auto at = [&](int a, int sa, int b, int sb) {
    auto y = x;
    y[a] += sa * h;
    y[b] += sb * h;
    const long double val = f(y);
    if (!std::isfinite(static_cast<double>(val))) throw DiagnosticFailure("biharmonic_residual: non-finite sample");
    return val;
  };
  const long double f0 = at(0, 0, 0, 0);
  long double s = 0.0L;
  for (int a = 0; a < n; ++a) {
    s += at(a, 2, a, 0) - 4.0L * at(a, 1, a, 0) + 6.0L * f0 - 4.0L * at(a, -1, a, 0) + at(a, -2, a, 0);
    for (int b = a + 1; b < n; ++b) {
      long double m = 0.0L;
      for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j) {
          const long double w = (i == 0 ? -2.0L : 1.0L) * (j == 0 ? -2.0L : 1.0L);
          m += w * at(a, i, b, j);
        }
      s += 2.0L * m;
    }
  }
  return s / (h * h * h * h);
}

template <class Sampler>
double biharmonic_residual(Sampler&& f, const Ball& ball, int n, int samples, std::uint64_t seed = 0x6a09e667f3bcc908ULL) {
  if (samples < 1) throw InvalidInput("biharmonic_residual: samples must be >= 1");
  if (n != 2 && n != 3) throw InvalidInput("biharmonic_residual: n must be 2 or 3");
  SeededUniform rng(seed);
  const long double h = 0.2L * ball.radius;
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Point p{};
    do {
      for (int a = 0; a < n; ++a) p[a] = rng.next();
    } while (norm2(p) > 1.0);
    std::array<long double, 3> x{};
    for (int a = 0; a < 3; ++a) x[a] = static_cast<long double>(ball.center[a]) + ball.radius * p[a];
    const long double b1 = bilaplacian_at(f, x, n, h);
    const long double b2 = bilaplacian_at(f, x, n, h / 2);
    const long double b4 = bilaplacian_at(f, x, n, h / 4);
    const long double r1 = (4.0L * b2 - b1) / 3.0L, r2 = (4.0L * b4 - b2) / 3.0L;
    worst = std::max(worst, std::abs(static_cast<double>((16.0L * r2 - r1) / 15.0L)));
  }
  return worst;
}

inline double biharmonic_residual(const BiharmonicFunction& f, const Ball& ball, int samples) {
  const Polynomial& u = f.u_polynomial();
  return biharmonic_residual([&u](const std::array<long double, 3>& x) { return u.evaluate_at(x); }, ball, f.dim(),
                             samples);
}

// JSON form: {"n": 2, "h1": [[m, "cos"|"sin", c], ...], "h2": [...]} for n = 2 and
// {"n": 3, "h1": [[k, "Y", c], ...], ...} for n = 3 with k the flat solid-harmonic index.

inline nlohmann::json harmonic_terms_to_json(const HarmonicPolynomial& h) {
  auto arr = nlohmann::json::array();
  for (const auto& t : h.terms()) {
    if (h.dim() == 2) {
      const int m = (t.index + 1) / 2;
      const bool sine = t.index > 0 && t.index % 2 == 0;
      arr.push_back({m, sine ? "sin" : "cos", t.coeff});
    } else {
      arr.push_back({t.index, "Y", t.coeff});
    }
  }
  return arr;
}

inline HarmonicPolynomial harmonic_terms_from_json(int n, const nlohmann::json& j, const std::string& path) {
  if (!j.is_array()) throw UsageError(path, "expected an array of [index, kind, coeff] triples");
  std::vector<HarmonicPolynomial::Term> terms;
  int cap = kDefaultDegreeCap;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    const std::string p = path + "[" + std::to_string(i) + "]";
    if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() || !e[1].is_string() || !e[2].is_number())
      throw UsageError(p, "expected [integer, kind, number]");
    const int m = e[0].get<int>();
    const std::string kind = e[1].get<std::string>();
    int idx = 0;
    try {
      if (n == 2) {
        if (kind != "cos" && kind != "sin") throw UsageError(p, "kind must be \"cos\" or \"sin\" for n = 2");
        idx = family::planar_index(m, kind == "sin");
      } else {
        if (kind != "Y") throw UsageError(p, "kind must be \"Y\" for n = 3");
        if (m < 0) throw InvalidInput("negative solid-harmonic index");
        idx = m;
      }
    } catch (const InvalidInput& ex) {
      throw UsageError(p, ex.what());
    }
    cap = std::max(cap, basis_degree(n, idx));
    terms.push_back({idx, e[2].get<double>()});
  }
  return HarmonicPolynomial(n, terms, cap);
}

inline nlohmann::json to_json(const BiharmonicFunction& f) {
  return {{"n", f.dim()}, {"h1", harmonic_terms_to_json(f.h1())}, {"h2", harmonic_terms_to_json(f.h2())}};
}

inline BiharmonicFunction biharmonic_from_json(const nlohmann::json& j, const std::string& path = "") {
  if (!j.is_object()) throw UsageError(path, "function must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "n" && it.key() != "h1" && it.key() != "h2") throw UsageError(path + "." + it.key(), "unknown key");
  if (!j.contains("n") || !j["n"].is_number_integer()) throw UsageError(path + ".n", "required integer");
  const int n = j["n"].get<int>();
  if (n != 2 && n != 3) throw UsageError(path + ".n", "must be 2 or 3");
  const auto empty = nlohmann::json::array();
  return {harmonic_terms_from_json(n, j.contains("h1") ? j["h1"] : empty, path + ".h1"),
          harmonic_terms_from_json(n, j.contains("h2") ? j["h2"] : empty, path + ".h2")};
}

}  // namespace nodal_lab
