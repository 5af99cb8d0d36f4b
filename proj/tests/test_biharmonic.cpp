#include <gtest/gtest.h>

#include "support.hpp"

using namespace nodal_lab;
using nl_test::disk_points;

namespace {

HarmonicPolynomial planar(int m, bool sine, double c = 1.0) {
  return HarmonicPolynomial(2, {{family::planar_index(m, sine), c}});
}

}  // namespace

TEST(Almansi, HarmonicCaseHasZeroV) {
  const auto u = almansi_compose(planar(2, false), HarmonicPolynomial::zero(2));
  for (const auto& p : disk_points(1, 50)) EXPECT_EQ(u.v(p), 0.0);
}

TEST(Almansi, RadiusSquaredHasVFour) {
  const auto u = almansi_compose(HarmonicPolynomial::zero(2), HarmonicPolynomial(2, {{0, 1.0}}));
  for (const auto& p : disk_points(2, 50)) {
    EXPECT_NEAR(u(p), p[0] * p[0] + p[1] * p[1], 1e-15);
    EXPECT_NEAR(u.v(p), 4.0, 1e-14);
  }
}

TEST(Almansi, CubicWithLinearH2) {
  const auto u = almansi_compose(HarmonicPolynomial::zero(2), planar(1, false));
  for (const auto& p : disk_points(3, 50)) {
    EXPECT_NEAR(u(p), p[0] * p[0] * p[0] + p[0] * p[1] * p[1], 1e-15);
    EXPECT_NEAR(u.v(p), 8.0 * p[0], 1e-14);
  }
}

TEST(Almansi, DimensionMismatchRejected) {
  EXPECT_THROW(almansi_compose(HarmonicPolynomial::zero(2), HarmonicPolynomial::zero(3)), InvalidInput);
}

TEST(HarmonicBasis, Counts) {
  EXPECT_EQ(harmonic_basis(2, 0).size(), 1u);
  EXPECT_EQ(harmonic_basis(2, 2).size(), 5u);
  EXPECT_EQ(harmonic_basis(3, 1).size(), 4u);
  EXPECT_THROW(harmonic_basis(2, -1), InvalidInput);
}

TEST(HarmonicBasis, PlanarDegreeTwoElements) {
  const auto b = harmonic_basis(2, 2);
  const std::vector<std::function<double(const Point&)>> expect = {
      [](const Point&) { return 1.0; }, [](const Point& x) { return x[0]; }, [](const Point& x) { return x[1]; },
      [](const Point& x) { return x[0] * x[0] - x[1] * x[1]; }, [](const Point& x) { return 2.0 * x[0] * x[1]; }};
  for (std::size_t k = 0; k < b.size(); ++k)
    for (const auto& p : disk_points(4, 20)) EXPECT_NEAR(b[k](p), expect[k](p), 1e-15) << "element " << k;
}

TEST(HarmonicBasis, SpatialDegreeOneIsCoordinates) {
  const auto b = harmonic_basis(3, 1);
  for (const auto& p : disk_points(5, 20, 3)) {
    std::vector<double> vals;
    for (const auto& h : b) vals.push_back(h(p));
    std::sort(vals.begin(), vals.end());
    std::vector<double> want = {1.0, p[0], p[1], p[2]};
    std::sort(want.begin(), want.end());
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(vals[i], want[i], 1e-15);
  }
}

TEST(HarmonicBasis, EveryElementIsHarmonic) {
  for (int n : {2, 3})
    for (const auto& h : harmonic_basis(n, 6))
      for (const auto& p : disk_points(6, 25, n)) {
        const auto u = [&](const Point& x) { return h(x); };
        const double fd = (4.0 * nl_test::fd_laplacian(u, p, n, 5e-3) - nl_test::fd_laplacian(u, p, n, 1e-2)) / 3.0;
        EXPECT_NEAR(fd, 0.0, 1e-8 * h.polynomial().max_abs_coefficient());
      }
}

TEST(Jet, RadiusSquaredAtUnitX) {
  const auto j = evaluate_jet(family::radius_squared(), {1.0, 0.0, 0.0});
  EXPECT_DOUBLE_EQ(j.u, 1.0);
  EXPECT_DOUBLE_EQ(j.grad[0], 2.0);
  EXPECT_DOUBLE_EQ(j.grad[1], 0.0);
  EXPECT_DOUBLE_EQ(j.v, 4.0);
}

TEST(Jet, ReZ3AtOneOne) {
  const auto j = evaluate_jet(family::re_zk(3), {1.0, 1.0, 0.0});
  EXPECT_DOUBLE_EQ(j.u, -2.0);
  EXPECT_DOUBLE_EQ(j.grad[0], 0.0);
  EXPECT_DOUBLE_EQ(j.grad[1], -6.0);
}

TEST(Jet, ZeroFunction) {
  const auto j = evaluate_jet(BiharmonicFunction(), {0.3, -0.2, 0.0});
  EXPECT_EQ(j.u, 0.0);
  EXPECT_EQ(j.v, 0.0);
  EXPECT_EQ(norm(j.grad), 0.0);
  EXPECT_EQ(frobenius2(j.hess), 0.0);
  EXPECT_EQ(frobenius2(j.third), 0.0);
}

TEST(Jet, TraceOfHessianIsV) {
  for (int n : {2, 3})
    for (const auto& f : random_almansi_family(11, 6, 5, n))
      for (const auto& p : disk_points(7, 30, n)) {
        const auto j = f.jet(p);
        double tr = 0.0;
        for (int a = 0; a < n; ++a) tr += j.hess[a][a];
        EXPECT_NEAR(tr, j.v, 1e-10 * std::max(1.0, std::abs(j.v)));
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) EXPECT_EQ(j.hess[a][b], j.hess[b][a]);
      }
}

TEST(Jet, GradientMatchesFiniteDifferences) {
  for (const auto& f : random_almansi_family(12, 6, 4))
    for (const auto& p : disk_points(8, 100, 2, 0.9)) {
      const auto j = f.jet(p, 1);
      const double scale = std::max(1.0, norm(j.grad));
      for (int a = 0; a < 2; ++a)
        EXPECT_NEAR(nl_test::central_diff([&](const Point& x) { return f(x); }, p, a), j.grad[a], 1e-6 * scale);
    }
}

TEST(Jet, ThirdDerivativesMatchFiniteDifferencesOfHessian) {
  const auto f = random_almansi_family(13, 5, 1, 3).front();
  for (const auto& p : disk_points(9, 10, 3, 0.8)) {
    const auto j = f.jet(p);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 3; ++c) {
          const double fd = nl_test::central_diff([&](const Point& x) { return f.jet(x, 2).hess[a][b]; }, p, c);
          EXPECT_NEAR(j.third[a][b][c], fd, 1e-5 * std::max(1.0, std::abs(fd)));
        }
  }
}

TEST(Jet, StoredVMatchesFiniteDifferenceLaplacian) {
  for (int n : {2, 3})
    for (const auto& f : random_almansi_family(14, 6, 3, n))
      for (const auto& p : disk_points(10, 20, n, 0.8)) {
        const auto u = [&](const Point& x) { return f(x); };
        const double fd = (4.0 * nl_test::fd_laplacian(u, p, n, 1e-3) - nl_test::fd_laplacian(u, p, n, 2e-3)) / 3.0;
        EXPECT_NEAR(f.v(p), fd, 1e-7 * std::max(1.0, f.u_polynomial().max_abs_coefficient()));
      }
}

TEST(Residual, AlmansiFunctionsAreBiharmonic) {
  for (int n : {2, 3})
    for (const auto& f : random_almansi_family(15, 6, 5, n)) EXPECT_LE(biharmonic_residual(f, Ball({}, 1.0), 20), 1e-6);
}

TEST(Residual, QuarticRadiusGivesSixtyFour) {
  const auto r4 = [](const std::array<long double, 3>& x) {
    const long double s = x[0] * x[0] + x[1] * x[1];
    return s * s;
  };
  EXPECT_NEAR(biharmonic_residual(r4, Ball({}, 1.0), 2, 10), 64.0, 1e-6);
}

TEST(Residual, HarmonicPolynomialBelowTolerance) {
  EXPECT_LE(biharmonic_residual(family::re_zk(5), Ball({}, 1.0), 20), 1e-8);
}

TEST(Residual, NonFiniteSampleIsDiagnosticFailure) {
  const auto bad = [](const std::array<long double, 3>&) { return static_cast<long double>(NAN); };
  EXPECT_THROW(biharmonic_residual(bad, Ball({}, 1.0), 2, 1), DiagnosticFailure);
}

TEST(Linearity, AlmansiComposeIsLinearInH1) {
  const auto h1 = planar(3, false, 0.7), h1b = planar(2, true, -1.3), h2 = planar(1, true, 0.4);
  const double a = 2.5;
  const auto lhs = almansi_compose(a * h1 + h1b, h2);
  const auto u1 = almansi_compose(h1, HarmonicPolynomial::zero(2)), u1b = almansi_compose(h1b, h2);
  for (const auto& p : disk_points(16, 100)) EXPECT_NEAR(lhs(p), a * u1(p) + u1b(p), 1e-14);
}

TEST(Serialization, JsonRoundTrip) {
  for (int n : {2, 3})
    for (const auto& f : random_almansi_family(17, 5, 3, n)) EXPECT_EQ(biharmonic_from_json(to_json(f)), f);
}

TEST(Serialization, UnknownKeyRejectedWithPath) {
  try {
    biharmonic_from_json({{"n", 2}, {"h1", nlohmann::json::array()}, {"bogus", 1}}, "$.f");
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_EQ(e.path, "$.f.bogus");
  }
}
