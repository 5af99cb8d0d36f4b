#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "nodal_lab/errors.hpp"
#include "nodal_lab/point.hpp"

namespace nodal_lab {

/// Sparse real polynomial in up to three variables, stored as sorted monomials.
/// Differentiation is exact on the coefficient list.
class Polynomial {
 public:
  using Exponent = std::array<int, 3>;
  struct Term {
    Exponent exp;
    double coef;
  };

  Polynomial() = default;
  explicit Polynomial(int dim) : dim_(dim) {
    if (dim < 1 || dim > 3) throw InvalidInput("polynomial dimension must be 1..3");
  }

  static Polynomial constant(int dim, double c) {
    return monomial(dim, {0, 0, 0}, c);
  }

  static Polynomial monomial(int dim, Exponent e, double c) {
    Polynomial p(dim);
    for (int i = dim; i < 3; ++i)
      if (e[i] != 0) throw InvalidInput("monomial exponent on an inactive axis");
    if (c != 0.0) p.terms_.push_back({e, c});
    p.normalize();
    return p;
  }

  /// The coordinate function x_axis.
  static Polynomial coordinate(int dim, int axis) {
    Exponent e{0, 0, 0};
    e[axis] = 1;
    return monomial(dim, e, 1.0);
  }

  int dim() const { return dim_; }
  bool is_zero() const { return terms_.empty(); }
  const std::vector<Term>& terms() const { return terms_; }

  int degree() const { return degree_; }

  static constexpr int kMaxPow = 40;

  template <class T>
  using PowerTable = std::array<std::array<T, kMaxPow>, 3>;

  /// Powers x_a^k for k <= deg, shared across several polynomials evaluated at one point.
  template <class T>
  static PowerTable<T> powers(const std::array<T, 3>& x, int deg) {
    if (deg >= kMaxPow) throw InvalidInput("polynomial degree too large to evaluate");
    PowerTable<T> pw;
    for (int a = 0; a < 3; ++a) {
      pw[a][0] = T(1);
      for (int k = 1; k <= deg; ++k) pw[a][k] = pw[a][k - 1] * x[a];
    }
    return pw;
  }

  /// Evaluation against a table built for degree >= this->degree().
  template <class T>
  T evaluate_powers(const PowerTable<T>& pw) const {
    T s = T(0);
    for (const auto& t : terms_)
      s += static_cast<T>(t.coef) * pw[0][t.exp[0]] * pw[1][t.exp[1]] * pw[2][t.exp[2]];
    return s;
  }

  template <class T>
  T evaluate_at(const std::array<T, 3>& x) const {
    if (terms_.empty()) return T(0);
    return evaluate_powers(powers(x, degree_));
  }

  template <class T = double>
  T evaluate(const Point& x) const {
    return evaluate_at(std::array<T, 3>{static_cast<T>(x[0]), static_cast<T>(x[1]), static_cast<T>(x[2])});
  }

  double operator()(const Point& x) const { return evaluate<double>(x); }

  Polynomial derivative(int axis) const {
    Polynomial out(dim_);
    if (axis >= dim_) return out;
    for (const auto& t : terms_) {
      if (t.exp[axis] == 0) continue;
      Exponent e = t.exp;
      const double c = t.coef * e[axis];
      --e[axis];
      out.terms_.push_back({e, c});
    }
    out.normalize();
    return out;
  }

  Polynomial laplacian() const {
    Polynomial out(dim_);
    for (int a = 0; a < dim_; ++a) out += derivative(a).derivative(a);
    return out;
  }

  Polynomial& operator+=(const Polynomial& o) {
    check_dim(o);
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    normalize();
    return *this;
  }

  Polynomial& operator-=(const Polynomial& o) { return *this += (-1.0) * o; }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }

  friend Polynomial operator*(double s, Polynomial p) {
    for (auto& t : p.terms_) t.coef *= s;
    p.normalize();
    return p;
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.check_dim(b);
    Polynomial out(a.dim_);
    out.terms_.reserve(a.terms_.size() * b.terms_.size());
    for (const auto& s : a.terms_)
      for (const auto& t : b.terms_)
        out.terms_.push_back({{s.exp[0] + t.exp[0], s.exp[1] + t.exp[1], s.exp[2] + t.exp[2]},
                              s.coef * t.coef});
    out.normalize();
    return out;
  }

  /// |x|^2 in the active dimension.
  static Polynomial radius_squared(int dim) {
    Polynomial p(dim);
    for (int a = 0; a < dim; ++a) {
      Exponent e{0, 0, 0};
      e[a] = 2;
      p += monomial(dim, e, 1.0);
    }
    return p;
  }

  /// Part of total degree exactly d.
  Polynomial homogeneous_part(int d) const {
    Polynomial out(dim_);
    for (const auto& t : terms_)
      if (t.exp[0] + t.exp[1] + t.exp[2] == d) out.terms_.push_back(t);
    out.normalize();
    return out;
  }

  double max_abs_coefficient() const {
    double m = 0.0;
    for (const auto& t : terms_) m = std::max(m, std::abs(t.coef));
    return m;
  }

  bool operator==(const Polynomial& o) const {
    if (dim_ != o.dim_ || terms_.size() != o.terms_.size()) return false;
    for (std::size_t i = 0; i < terms_.size(); ++i)
      if (terms_[i].exp != o.terms_[i].exp || terms_[i].coef != o.terms_[i].coef) return false;
    return true;
  }

 private:
  void check_dim(const Polynomial& o) const {
    if (o.dim_ != dim_) throw InvalidInput("polynomial dimension mismatch");
  }

  void normalize() {
    std::map<Exponent, double> acc;
    for (const auto& t : terms_) acc[t.exp] += t.coef;
    terms_.clear();
    degree_ = -1;
    for (const auto& [e, c] : acc) {
      if (c == 0.0) continue;
      terms_.push_back({e, c});
      degree_ = std::max(degree_, e[0] + e[1] + e[2]);
    }
  }

  int dim_ = 2;
  int degree_ = -1;
  std::vector<Term> terms_;
};

}  // namespace nodal_lab
