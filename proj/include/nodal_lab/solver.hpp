#pragma once

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "nodal_lab/errors.hpp"
#include "nodal_lab/geometry.hpp"
#include "nodal_lab/point.hpp"

namespace nodal_lab {

inline constexpr double kSolverTolerance = 1e-10;
inline constexpr int kSolverMaxIterations = 100000;
inline constexpr int kMinAngularResolution = 64;

/// Polar grid on a disk: node 0 is the center, then rings i = 1..nr at r_i = i R / nr,
/// each with nt equispaced angles theta_j = 2 pi j / nt. Node (i, j) has index 1 + (i-1) nt + j.
struct PolarGrid {
  Point center{};
  double radius = 1.0;
  int nr = 32;
  int nt = 64;

  PolarGrid() = default;
  PolarGrid(Point c, double r, int nr_, int nt_) : center(c), radius(r), nr(nr_), nt(nt_) {
    if (!(r > 0.0)) throw InvalidInput("polar grid radius must be positive");
    if (nr < 2) throw InvalidInput("polar grid needs at least 2 rings");
    if (nt < 4) throw InvalidInput("polar grid needs at least 4 angles");
  }

  /// Angular count J with J/2 rings.
  static PolarGrid with_resolution(Point c, double r, int resolution) {
    if (resolution < kMinAngularResolution) throw InvalidInput("grid resolution must be >= 64");
    return PolarGrid(c, r, resolution / 2, resolution);
  }

  int size() const { return 1 + nr * nt; }
  int interior_size() const { return 1 + (nr - 1) * nt; }
  double dr() const { return radius / nr; }
  double dtheta() const { return 2.0 * kPi / nt; }
  double r(int i) const { return radius * i / nr; }
  double theta(int j) const { return dtheta() * j; }
  int index(int i, int j) const { return i == 0 ? 0 : 1 + (i - 1) * nt + ((j % nt) + nt) % nt; }
  int ring_of(int k) const { return k == 0 ? 0 : 1 + (k - 1) / nt; }
  int angle_of(int k) const { return k == 0 ? 0 : (k - 1) % nt; }
  bool on_boundary(int k) const { return k >= interior_size(); }

  Point node(int k) const {
    if (k == 0) return center;
    const double rr = r(ring_of(k)), t = theta(angle_of(k));
    return center + Point{rr * std::cos(t), rr * std::sin(t), 0.0};
  }

  bool operator==(const PolarGrid&) const = default;
};

/// Nodal values on a polar grid. The outermost ring is the boundary layer.
struct GridField {
  PolarGrid grid;
  std::vector<double> values;

  GridField() = default;
  GridField(PolarGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (static_cast<int>(values.size()) != grid.size()) throw InvalidInput("grid field size mismatch");
  }

  static GridField sample(const PolarGrid& g, const std::function<double(const Point&)>& f) {
    std::vector<double> v(g.size());
    for (int k = 0; k < g.size(); ++k) v[k] = f(g.node(k));
    return {g, v};
  }

  bool finite() const {
    return std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); });
  }

  double at(int i, int j) const { return values[grid.index(i, j)]; }

  /// Bilinear interpolation in (r, theta); in the center cell the value is (1 - rho) u_0 + rho * (ring-1 angular interpolant).
  double operator()(const Point& x) const {
    const Point d = x - grid.center;
    const double r = std::hypot(d[0], d[1]);
    if (r > grid.radius * (1.0 + 1e-12)) throw InvalidInput("grid field evaluated outside its disk");
    double t = std::atan2(d[1], d[0]);
    if (t < 0) t += 2.0 * kPi;
    const double sj = t / grid.dtheta();
    int j = std::min(static_cast<int>(sj), grid.nt - 1);
    const double s = sj - j;
    const double si = std::min(r / grid.dr(), static_cast<double>(grid.nr));
    int i = std::min(static_cast<int>(si), grid.nr - 1);
    const double rho = si - i;
    auto ring = [&](int ii) { return (1.0 - s) * at(ii, j) + s * at(ii, j + 1); };
    const double inner = i == 0 ? values[0] : ring(i);
    return (1.0 - rho) * inner + rho * ring(i + 1);
  }

  /// Cartesian gradient at an interior ring node from central differences in r and theta.
  Point node_gradient(int i, int j) const {
    if (i < 1 || i >= grid.nr) throw InvalidInput("node_gradient needs an interior ring");
    const double ur = (at(i + 1, j) - (i == 1 ? values[0] : at(i - 1, j))) / (2.0 * grid.dr());
    const double ut = (at(i, j + 1) - at(i, j - 1)) / (2.0 * grid.dtheta());
    const double t = grid.theta(j), r = grid.r(i);
    return {ur * std::cos(t) - ut * std::sin(t) / r, ur * std::sin(t) + ut * std::cos(t) / r, 0.0};
  }

  void write_csv(std::ostream& os) const {
    os << "i,j,x,y,value\n";
    char buf[160];
    for (int k = 0; k < grid.size(); ++k) {
      const Point p = grid.node(k);
      std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g\n", grid.ring_of(k), grid.angle_of(k), p[0], p[1], values[k]);
      os << buf;
    }
  }

  /// Binary layout, little-endian: char[8] "NLGRID01"; int32 n (= 2); int32 nr; int32 nt;
  /// float64 h (= R / nr); float64 center_x, center_y; then size() float64 values in node order.
  void write_binary(std::ostream& os) const {
    os.write("NLGRID01", 8);
    auto put_i = [&](std::int32_t v) { write_le(os, &v, 4); };
    auto put_d = [&](double v) { write_le(os, &v, 8); };
    put_i(2);
    put_i(grid.nr);
    put_i(grid.nt);
    put_d(grid.dr());
    put_d(grid.center[0]);
    put_d(grid.center[1]);
    for (double v : values) put_d(v);
  }

  static GridField read_binary(std::istream& is) {
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, "NLGRID01", 8) != 0) throw InvalidInput("not a grid field file");
    auto get_i = [&] { std::int32_t v; read_le(is, &v, 4); return v; };
    auto get_d = [&] { double v; read_le(is, &v, 8); return v; };
    const int n = get_i(), nr = get_i(), nt = get_i();
    if (n != 2) throw InvalidInput("grid field file: unsupported dimension");
    const double h = get_d();
    const double cx = get_d(), cy = get_d();
    PolarGrid g({cx, cy, 0.0}, h * nr, nr, nt);
    std::vector<double> v(g.size());
    for (auto& x : v) x = get_d();
    if (!is) throw InvalidInput("grid field file truncated");
    return {g, v};
  }

  static GridField read_csv(std::istream& is, const PolarGrid& g) {
    std::string line;
    std::getline(is, line);
    std::vector<double> v(g.size(), std::numeric_limits<double>::quiet_NaN());
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string cell;
      std::array<double, 5> c{};
      for (int q = 0; q < 5 && std::getline(ss, cell, ','); ++q) c[q] = std::stod(cell);
      const int k = g.index(static_cast<int>(c[0]), static_cast<int>(c[1]));
      v[k] = c[4];
    }
    GridField f(g, v);
    if (!f.finite()) throw InvalidInput("grid field csv: missing nodes");
    return f;
  }

 private:
  static void write_le(std::ostream& os, const void* p, int bytes) {
    unsigned char b[8];
    std::memcpy(b, p, bytes);
    if (!little_endian()) std::reverse(b, b + bytes);
    os.write(reinterpret_cast<const char*>(b), bytes);
  }
  static void read_le(std::istream& is, void* p, int bytes) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), bytes);
    if (!little_endian()) std::reverse(b, b + bytes);
    std::memcpy(p, b, bytes);
  }
  static bool little_endian() {
    const std::uint16_t one = 1;
    unsigned char c;
    std::memcpy(&c, &one, 1);
    return c == 1;
  }
};

/// Symmetric coefficient field a_ij(x) in two dimensions, normalized so that a(center) = I.
class EllipticOperator {
 public:
  using Field = std::function<Mat3(const Point&)>;

  EllipticOperator(std::string name, Field a, Point center = {}) : name_(std::move(name)), a_(std::move(a)), center_(center) {
    const Mat3 a0 = a_(center_);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        if (std::abs(a0[i][j] - (i == j ? 1.0 : 0.0)) > 1e-12)
          throw InvalidInput("elliptic operator: a(center) must be the identity");
    lambda_ = std::numeric_limits<double>::infinity();
    Lambda_ = 0.0;
    for (const Point& x : sample_points(center_, 1.0)) {
      const Mat3 m = a_(x);
      if (std::abs(m[0][1] - m[1][0]) > 1e-14 * (1.0 + std::abs(m[0][1])))
        throw InvalidInput("elliptic operator: coefficients must be symmetric");
      const double tr = m[0][0] + m[1][1], det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
      const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
      lambda_ = std::min(lambda_, tr / 2.0 - disc);
      Lambda_ = std::max(Lambda_, tr / 2.0 + disc);
    }
    if (!(lambda_ > 0.0)) throw InvalidInput("elliptic operator: coefficients are not uniformly elliptic on B_1");
  }

  static EllipticOperator laplacian() {
    return EllipticOperator("laplacian", [](const Point&) {
      Mat3 m{};
      m[0][0] = m[1][1] = 1.0;
      return m;
    });
  }

  /// a_ij = delta_ij (1 + slope x_axis).
  static EllipticOperator diagonal_linear(double slope, int axis = 0) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "diagonal_linear(%.17g,%d)", slope, axis);
    return EllipticOperator(buf, [slope, axis](const Point& x) {
      Mat3 m{};
      m[0][0] = m[1][1] = 1.0 + slope * x[axis];
      return m;
    });
  }

  const std::string& name() const { return name_; }
  Mat3 operator()(const Point& x) const { return a_(x); }
  const Point& center() const { return center_; }
  double lambda() const { return lambda_; }
  double Lambda() const { return Lambda_; }

  /// omega(y, r) = sup over B_r(y) of sum_ij r |grad a_ij|, sampled on the 64 x 64 grid of the
  /// bounding square restricted to the ball, gradients by central differences of step 1e-6 r.
  double omega(const Point& y, double r) const {
    const double h = 1e-6 * r;
    double best = 0.0;
    for (const Point& x : sample_points(y, r)) {
      const Mat3 ax0 = a_(x + Point{h, 0, 0}), ax1 = a_(x - Point{h, 0, 0});
      const Mat3 ay0 = a_(x + Point{0, h, 0}), ay1 = a_(x - Point{0, h, 0});
      double s = 0.0;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          s += r * std::hypot((ax0[i][j] - ax1[i][j]) / (2 * h), (ay0[i][j] - ay1[i][j]) / (2 * h));
      best = std::max(best, s);
    }
    return best;
  }

 private:
  static std::vector<Point> sample_points(const Point& y, double r) {
    std::vector<Point> pts;
    for (int i = 0; i < 64; ++i)
      for (int j = 0; j < 64; ++j) {
        const Point p{-1.0 + 2.0 * i / 63.0, -1.0 + 2.0 * j / 63.0, 0.0};
        if (norm2(p) <= 1.0) pts.push_back(y + r * p);
      }
    return pts;
  }

  std::string name_;
  Field a_;
  Point center_{};
  double lambda_ = 1.0, Lambda_ = 1.0;
};

/// Energy density in polar coordinates (E such that the energy is int grad_p^T E grad_p dr dtheta
/// with grad_p = (u_r, u_theta)) and the volume weight w (dV = w dr dtheta).
struct PolarCoefficients {
  std::function<std::array<double, 4>(double r, double theta)> energy;
  std::function<double(double r, double theta)> weight;

  /// Delta_M for a polar-normal-form metric around the disk center (n = 2).
  static PolarCoefficients from_metric(const PolarMetric& m) {
    if (m.dim() != 2) throw InvalidInput("grid solver supports n = 2 only");
    return {[m](double r, double t) {
              const double sb = m.sqrt_det_b(r, {std::cos(t), std::sin(t), 0.0});
              return std::array<double, 4>{r * sb, 0.0, 0.0, 1.0 / (r * sb)};
            },
            [m](double r, double t) { return r * m.sqrt_det_b(r, {std::cos(t), std::sin(t), 0.0}); }};
  }

  /// L = div(a grad) in Cartesian coordinates, expressed on a disk centered at c.
  static PolarCoefficients from_operator(const EllipticOperator& op, const Point& c) {
    return {[op, c](double r, double t) {
              const double ct = std::cos(t), st = std::sin(t);
              const Mat3 a = op(c + Point{r * ct, r * st, 0.0});
              // P = R^T a R with R = [e_r, e_theta]
              const double prr = ct * (a[0][0] * ct + a[0][1] * st) + st * (a[1][0] * ct + a[1][1] * st);
              const double prt = ct * (-a[0][0] * st + a[0][1] * ct) + st * (-a[1][0] * st + a[1][1] * ct);
              const double ptt = -st * (-a[0][0] * st + a[0][1] * ct) + ct * (-a[1][0] * st + a[1][1] * ct);
              return std::array<double, 4>{r * prr, prt, prt, ptt / r};
            },
            [](double r, double) { return r; }};
  }
};

struct SolveStats {
  int iterations = 0;
  double residual = 0.0;
};

/// Q1 finite elements in (r, theta) on a polar grid, 2 x 2 Gauss points per cell.
/// The center cell collapses one edge, so the center node carries the basis function 1 - r/r_1.
/// L u = f with Dirichlet data g is solved as K_II u_I = -(M f)_I - K_IB g_B by diagonally
/// preconditioned CG (relative residual 1e-10, cap 1e5 iterations, zero initial guess).
class DiskFem {
 public:
  using SpMat = Eigen::SparseMatrix<double>;

  DiskFem(const PolarGrid& grid, const PolarCoefficients& coeff) : grid_(grid) { assemble(coeff); }

  const PolarGrid& grid() const { return grid_; }
  const SpMat& stiffness() const { return K_; }
  const SpMat& mass() const { return M_; }
  const SolveStats& last_stats() const { return stats_; }

  /// Nodal f (full grid) and boundary function g; returns the full nodal solution.
  GridField solve(const std::vector<double>& f, const std::function<double(const Point&)>& g) {
    const int nI = grid_.interior_size(), nn = grid_.size();
    Eigen::VectorXd full = Eigen::VectorXd::Zero(nn);
    for (int k = nI; k < nn; ++k) full[k] = g(grid_.node(k));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nI);
    if (!f.empty()) {
      Eigen::Map<const Eigen::VectorXd> fv(f.data(), nn);
      rhs -= (M_ * fv).head(nI);
    }
    rhs -= (K_ * full).head(nI);
    Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
    cg.setTolerance(kSolverTolerance);
    cg.setMaxIterations(kSolverMaxIterations);
    cg.compute(Kii_);
    Eigen::VectorXd x = cg.solve(rhs);
    stats_ = {static_cast<int>(cg.iterations()), cg.error()};
    if (cg.info() != Eigen::Success || !x.allFinite())
      throw SolverError("CG did not reach the residual target", cg.error(), static_cast<int>(cg.iterations()));
    full.head(nI) = x;
    return GridField(grid_, std::vector<double>(full.data(), full.data() + nn));
  }

  /// || K_II u_I + K_IB u_B + (M f)_I || / max(|| K_IB u_B ||, || (M f)_I ||, tiny)
  double relative_residual(const GridField& u, const std::vector<double>& f = {}) const {
    const int nI = grid_.interior_size(), nn = grid_.size();
    Eigen::Map<const Eigen::VectorXd> uv(u.values.data(), nn);
    Eigen::VectorXd r = (K_ * uv).head(nI);
    double scale = 0.0;
    if (!f.empty()) {
      Eigen::Map<const Eigen::VectorXd> fv(f.data(), nn);
      const Eigen::VectorXd mf = (M_ * fv).head(nI);
      r += mf;
      scale = mf.norm();
    }
    Eigen::VectorXd ub = uv;
    ub.head(nI).setZero();
    scale = std::max({scale, (K_ * ub).head(nI).norm(), 1e-300});
    return r.norm() / scale;
  }

  double energy(const GridField& a, const GridField& b) const {
    Eigen::Map<const Eigen::VectorXd> x(a.values.data(), grid_.size()), y(b.values.data(), grid_.size());
    return x.dot(K_ * y);
  }

  double mass_product(const GridField& a, const GridField& b) const {
    Eigen::Map<const Eigen::VectorXd> x(a.values.data(), grid_.size()), y(b.values.data(), grid_.size());
    return x.dot(M_ * y);
  }

 private:
  void assemble(const PolarCoefficients& c) {
    const int nn = grid_.size();
    const double dr = grid_.dr(), dt = grid_.dtheta();
    const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
    std::vector<Eigen::Triplet<double>> kt, mt;
    kt.reserve(static_cast<std::size_t>(nn) * 16);
    mt.reserve(static_cast<std::size_t>(nn) * 16);
    for (int i = 0; i < grid_.nr; ++i)
      for (int j = 0; j < grid_.nt; ++j) {
        // local nodes: (i, j), (i+1, j), (i, j+1), (i+1, j+1); in the center cell the first and third coincide
        std::array<int, 4> ids = {grid_.index(i, j), grid_.index(i + 1, j), grid_.index(i, j + 1), grid_.index(i + 1, j + 1)};
        double ke[4][4] = {}, me[4][4] = {};
        for (double p : gp)
          for (double q : gp) {
            const double r = grid_.r(i) + p * dr, t = grid_.theta(j) + q * dt;
            const double wq = 0.25 * dr * dt;
            const double phi[4] = {(1 - p) * (1 - q), p * (1 - q), (1 - p) * q, p * q};
            double dphi_r[4] = {-(1 - q) / dr, (1 - q) / dr, -q / dr, q / dr};
            double dphi_t[4] = {-(1 - p) / dt, -p / dt, (1 - p) / dt, p / dt};
            const auto e = c.energy(r, t);
            const double w = c.weight(r, t);
            for (int a = 0; a < 4; ++a)
              for (int b = 0; b < 4; ++b) {
                ke[a][b] += wq * (dphi_r[a] * (e[0] * dphi_r[b] + e[1] * dphi_t[b]) +
                                  dphi_t[a] * (e[2] * dphi_r[b] + e[3] * dphi_t[b]));
                me[a][b] += wq * w * phi[a] * phi[b];
              }
          }
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) {
            kt.emplace_back(ids[a], ids[b], ke[a][b]);
            mt.emplace_back(ids[a], ids[b], me[a][b]);
          }
      }
    K_.resize(nn, nn);
    M_.resize(nn, nn);
    K_.setFromTriplets(kt.begin(), kt.end());
    M_.setFromTriplets(mt.begin(), mt.end());
    const int nI = grid_.interior_size();
    Kii_ = K_.topLeftCorner(nI, nI);
  }

  PolarGrid grid_;
  SpMat K_, M_, Kii_;
  SolveStats stats_;
};

using BoundaryData = std::function<double(const Point&)>;

/// Harmonic (L u = 0) extension of boundary data on the grid's disk.
inline GridField solve_laplace(const PolarCoefficients& coeff, const PolarGrid& grid, const BoundaryData& g) {
  if (grid.nt < kMinAngularResolution) throw InvalidInput("solve_laplace: resolution must be >= 64");
  DiskFem fem(grid, coeff);
  return fem.solve({}, g);
}

inline GridField solve_laplace(const PolarMetric& metric, const PolarGrid& grid, const BoundaryData& g) {
  return solve_laplace(PolarCoefficients::from_metric(metric), grid, g);
}

inline GridField solve_laplace(const EllipticOperator& op, const PolarGrid& grid, const BoundaryData& g) {
  return solve_laplace(PolarCoefficients::from_operator(op, grid.center), grid, g);
}

struct SplitSolution {
  GridField u;
  GridField v;
  double residual_u = 0.0;
  double residual_v = 0.0;
};

/// L v = 0 with data boundary_v, then L u = v with data boundary_u.
inline SplitSolution solve_split_biharmonic(const PolarCoefficients& coeff, const PolarGrid& grid,
                                            const BoundaryData& boundary_u, const BoundaryData& boundary_v) {
  if (grid.nt < kMinAngularResolution) throw InvalidInput("solve_split_biharmonic: resolution must be >= 64");
  DiskFem fem(grid, coeff);
  SplitSolution s;
  s.v = fem.solve({}, boundary_v);
  s.residual_v = fem.relative_residual(s.v);
  s.u = fem.solve(s.v.values, boundary_u);
  s.residual_u = fem.relative_residual(s.u, s.v.values);
  return s;
}

inline SplitSolution solve_split_biharmonic(const EllipticOperator& op, const PolarGrid& grid,
                                            const BoundaryData& boundary_u, const BoundaryData& boundary_v) {
  return solve_split_biharmonic(PolarCoefficients::from_operator(op, grid.center), grid, boundary_u, boundary_v);
}

/// Exact harmonic extension of a trigonometric-polynomial trace on a Euclidean disk:
/// the trace is sampled at `samples` angles, its Fourier coefficients up to order samples/2 - 1
/// give u(x) = Re sum_m c_m ((x - c)/R)^m.
class SpectralHarmonic {
 public:
  SpectralHarmonic(const BoundaryData& g, const Point& center, double radius, int samples = 64)
      : center_(center), radius_(radius) {
    if (samples < 4) throw InvalidInput("spectral extension needs at least 4 samples");
    const int mmax = samples / 2 - 1;
    std::vector<double> gs(samples);
    for (int k = 0; k < samples; ++k) {
      const double t = 2.0 * kPi * k / samples;
      gs[k] = g(center + Point{radius * std::cos(t), radius * std::sin(t), 0.0});
    }
    coef_.assign(mmax + 1, {0.0, 0.0});
    for (int m = 0; m <= mmax; ++m) {
      double a = 0.0, b = 0.0;
      for (int k = 0; k < samples; ++k) {
        const double t = 2.0 * kPi * static_cast<double>((static_cast<long>(m) * k) % samples) / samples;
        a += gs[k] * std::cos(t);
        b += gs[k] * std::sin(t);
      }
      const double s = (m == 0 ? 1.0 : 2.0) / samples;
      coef_[m] = {a * s, -b * s};
    }
  }

  double operator()(const Point& x) const {
    const std::complex<double> z((x[0] - center_[0]) / radius_, (x[1] - center_[1]) / radius_);
    std::complex<double> s = 0.0;
    for (int m = static_cast<int>(coef_.size()) - 1; m >= 0; --m) s = s * z + coef_[m];
    return s.real();
  }

  Point gradient(const Point& x) const {
    const std::complex<double> z((x[0] - center_[0]) / radius_, (x[1] - center_[1]) / radius_);
    std::complex<double> s = 0.0;
    for (int m = static_cast<int>(coef_.size()) - 1; m >= 1; --m) s = s * z + static_cast<double>(m) * coef_[m];
    return {s.real() / radius_, -s.imag() / radius_, 0.0};
  }

 private:
  Point center_;
  double radius_;
  std::vector<std::complex<double>> coef_;
};

}  // namespace nodal_lab
