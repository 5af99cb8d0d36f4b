#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "nodal_lab/errors.hpp"
#include "nodal_lab/polynomial.hpp"

namespace nodal_lab {

inline constexpr int kDefaultDegreeCap = 12;

// Flat basis indexing.
//   n = 2: index 0 -> 1, 2m-1 -> Re z^m = r^m cos(m theta), 2m -> Im z^m = r^m sin(m theta).
//   n = 3: index l(l+1)+m with -l <= m <= l. m >= 0 is the cos-type solid harmonic
//          Re[(x+iy)^m] q_lm(z, r^2), m < 0 the sin-type Im[(x+iy)^|m|] q_l|m|(z, r^2),
//          where q_lm is the m-th derivative of the Legendre polynomial P_l written as a
//          homogeneous polynomial of degree l-m (no Condon-Shortley phase, no normalization).

inline int basis_degree(int dim, int index) {
  if (index < 0) throw InvalidInput("negative basis index");
  if (dim == 2) return (index + 1) / 2;
  if (dim == 3) return static_cast<int>(std::floor(std::sqrt(static_cast<double>(index)) + 1e-9));
  throw InvalidInput("harmonic basis supports n = 2 or 3");
}

inline int basis_size(int dim, int degree) {
  if (degree < 0) return 0;
  if (dim == 2) return 1 + 2 * degree;
  if (dim == 3) return (degree + 1) * (degree + 1);
  throw InvalidInput("harmonic basis supports n = 2 or 3");
}

namespace detail {

inline double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

inline double binomial(int n, int k) {
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return std::round(b);
}

/// Re and Im of (x + i y)^m as polynomials in `dim` variables.
inline std::pair<Polynomial, Polynomial> complex_power(int dim, int m) {
  Polynomial re(dim), im(dim);
  for (int j = 0; j <= m; ++j) {
    const double c = binomial(m, j);
    const Polynomial::Exponent e{m - j, j, 0};
    // i^j cycles through 1, i, -1, -i.
    switch (j % 4) {
      case 0: re += Polynomial::monomial(dim, e, c); break;
      case 1: im += Polynomial::monomial(dim, e, c); break;
      case 2: re += Polynomial::monomial(dim, e, -c); break;
      case 3: im += Polynomial::monomial(dim, e, -c); break;
    }
  }
  return {re, im};
}

inline Polynomial basis_polynomial(int dim, int index) {
  const int deg = basis_degree(dim, index);
  if (dim == 2) {
    if (index == 0) return Polynomial::constant(2, 1.0);
    auto [re, im] = complex_power(2, deg);
    return (index % 2 == 1) ? re : im;
  }
  const int l = deg;
  const int m_signed = index - l * (l + 1);
  const int m = std::abs(m_signed);
  Polynomial q(3);
  const Polynomial r2 = Polynomial::radius_squared(3);
  for (int k = 0; 2 * k <= l - m; ++k) {
    const double a = ((k % 2) ? -1.0 : 1.0) * factorial(2 * l - 2 * k) /
                     (std::pow(2.0, l) * factorial(k) * factorial(l - k) * factorial(l - 2 * k - m));
    Polynomial term = Polynomial::monomial(3, {0, 0, l - m - 2 * k}, a);
    for (int p = 0; p < k; ++p) term = term * r2;
    q += term;
  }
  auto [re, im] = complex_power(3, m);
  return (m_signed >= 0 ? re : im) * q;
}

}  // namespace detail

/// A harmonic polynomial given by coefficients over the fixed solid-harmonic basis.
class HarmonicPolynomial {
 public:
  struct Term {
    int index;
    double coeff;
    bool operator==(const Term&) const = default;
  };

  HarmonicPolynomial() : HarmonicPolynomial(2, {}) {}

  HarmonicPolynomial(int dim, std::vector<Term> terms, int degree_cap = kDefaultDegreeCap)
      : dim_(dim), degree_cap_(degree_cap) {
    if (dim != 2 && dim != 3) throw InvalidInput("harmonic polynomials support n = 2 or 3");
    if (degree_cap < 0) throw InvalidInput("degree cap must be non-negative");
    std::map<int, double> acc;
    for (const auto& t : terms) {
      if (basis_degree(dim, t.index) > degree_cap)
        throw InvalidInput("basis index " + std::to_string(t.index) + " exceeds degree cap " +
                           std::to_string(degree_cap));
      acc[t.index] += t.coeff;
    }
    poly_ = Polynomial(dim);
    for (const auto& [idx, c] : acc) {
      if (c == 0.0) continue;
      terms_.push_back({idx, c});
      poly_ += c * detail::basis_polynomial(dim, idx);
    }
  }

  static HarmonicPolynomial zero(int dim) { return HarmonicPolynomial(dim, {}); }

  static HarmonicPolynomial basis_element(int dim, int index, double coeff = 1.0) {
    return HarmonicPolynomial(dim, {{index, coeff}}, std::max(kDefaultDegreeCap, basis_degree(dim, index)));
  }

  int dim() const { return dim_; }
  int degree_cap() const { return degree_cap_; }
  const std::vector<Term>& terms() const { return terms_; }
  const Polynomial& polynomial() const { return poly_; }
  bool is_zero() const { return terms_.empty(); }

  int degree() const {
    int d = -1;
    for (const auto& t : terms_) d = std::max(d, basis_degree(dim_, t.index));
    return d;
  }

  double operator()(const Point& x) const { return poly_(x); }

  /// Multiplies each homogeneous component of degree d by factor(d).
  template <class Factor>
  HarmonicPolynomial scaled_by_degree(Factor&& factor) const {
    std::vector<Term> out;
    for (const auto& t : terms_) out.push_back({t.index, t.coeff * factor(basis_degree(dim_, t.index))});
    return HarmonicPolynomial(dim_, out, degree_cap_);
  }

  friend HarmonicPolynomial operator+(const HarmonicPolynomial& a, const HarmonicPolynomial& b) {
    if (a.dim_ != b.dim_) throw InvalidInput("harmonic polynomial dimension mismatch");
    std::vector<Term> t = a.terms_;
    t.insert(t.end(), b.terms_.begin(), b.terms_.end());
    return HarmonicPolynomial(a.dim_, t, std::max(a.degree_cap_, b.degree_cap_));
  }

  friend HarmonicPolynomial operator*(double s, const HarmonicPolynomial& h) {
    return h.scaled_by_degree([s](int) { return s; });
  }

  bool operator==(const HarmonicPolynomial& o) const {
    return dim_ == o.dim_ && degree_cap_ == o.degree_cap_ && terms_ == o.terms_;
  }

 private:
  int dim_;
  int degree_cap_;
  std::vector<Term> terms_;
  Polynomial poly_;
};

/// All basis solid harmonics of degree <= `degree`, in flat-index order.
inline std::vector<HarmonicPolynomial> harmonic_basis(int n, int degree) {
  if (degree < 0) throw InvalidInput("harmonic_basis: degree must be >= 0");
  if (n != 2 && n != 3) throw InvalidInput("harmonic_basis: n must be 2 or 3");
  std::vector<HarmonicPolynomial> out;
  const int cap = std::max(kDefaultDegreeCap, degree);
  for (int k = 0; k < basis_size(n, degree); ++k) out.emplace_back(n, std::vector<HarmonicPolynomial::Term>{{k, 1.0}}, cap);
  return out;
}

}  // namespace nodal_lab
