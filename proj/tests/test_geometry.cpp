#include <gtest/gtest.h>

#include "support.hpp"

using namespace nodal_lab;

namespace {

const auto kEuclid2 = PolarMetric::euclidean(2);

}  // namespace

TEST(BallQuadrature, UnitDiskArea) {
  EXPECT_NEAR(ball_quadrature(kEuclid2, Ball({}, 1.0), 8).integrate([](const Point&) { return 1.0; }), kPi, 1e-12);
}

TEST(BallQuadrature, RadiusSquared) {
  const auto q = ball_quadrature(kEuclid2, Ball({}, 1.0), 8);
  EXPECT_NEAR(q.integrate([](const Point& x) { return norm2(x); }), kPi / 2, 1e-12);
}

TEST(BallQuadrature, ConformalVolume) {
  const PolarMetric m(2, MetricFamily::conformal, 0.1);
  // 2 pi int_0^1 sqrt(1 + s r) r dr with u = 1 + s r
  const double s = 0.1;
  const auto F = [](double u) { return 0.4 * std::pow(u, 2.5) - 2.0 / 3.0 * std::pow(u, 1.5); };
  const double want = 2.0 * kPi * (F(1.0 + s) - F(1.0)) / (s * s);
  EXPECT_NEAR(ball_quadrature(m, Ball({}, 1.0), 8).integrate([](const Point&) { return 1.0; }), want, 1e-9);
}

TEST(BallQuadrature, MatchesIndependentMidpointRuleForBump) {
  const PolarMetric m(2, MetricFamily::bump, 0.2);
  const auto f = family::re_zk(2);
  const double lib = ball_quadrature(m, Ball({}, 0.7), 16).integrate([&](const Point& x) { return f(x) * f(x); });
  const double ref = nl_test::polar_midpoint(
      [&](double r, double t) {
        const Point w{std::cos(t), std::sin(t), 0.0};
        const double u = f(r * w);
        return u * u * m.sqrt_det_b(r, w);
      },
      0.7);
  EXPECT_NEAR(lib, ref, 1e-5 * std::abs(ref));
}

TEST(BallQuadrature, RejectsBadInput) {
  EXPECT_THROW(Ball({}, 0.0), InvalidInput);
  EXPECT_THROW(ball_quadrature(PolarMetric(2, MetricFamily::conformal, 0.1), Ball({}, 1.5), 8), InvalidInput);
}

TEST(SphereQuadrature, Circumference) {
  EXPECT_NEAR(sphere_quadrature(kEuclid2, Ball({}, 1.0), 8).integrate([](const Point&) { return 1.0; }), 2 * kPi, 1e-12);
}

TEST(SphereQuadrature, CosineSquared) {
  const auto q = sphere_quadrature(kEuclid2, Ball({}, 1.0), 8);
  EXPECT_NEAR(q.integrate([](const Point& x) { return x[0] * x[0]; }), kPi, 1e-12);
}

TEST(SphereQuadrature, SphereOfRadiusTwoInR3) {
  const auto q = sphere_quadrature(PolarMetric::euclidean(3), Ball({}, 2.0), 8);
  EXPECT_NEAR(q.integrate([](const Point&) { return 1.0; }), 16 * kPi, 1e-11);
}

TEST(Quadrature, ExactForRandomPolynomials) {
  SeededUniform rng(21);
  for (int n : {2, 3})
    for (int trial = 0; trial < 20; ++trial) {
      std::array<int, 3> e{};
      int deg = 0;
      for (int a = 0; a < n; ++a) deg += (e[a] = static_cast<int>(rng.unit() * 4));
      const auto mono = [&](const Point& x) {
        double s = 1.0;
        for (int a = 0; a < n; ++a) s *= std::pow(x[a], e[a]);
        return s;
      };
      // int over the unit sphere of prod x_a^{e_a} via the Gamma-function formula
      bool odd = false;
      double g = 1.0, sum = 0.0;
      for (int a = 0; a < n; ++a) {
        odd |= e[a] % 2 == 1;
        g *= std::tgamma((e[a] + 1) / 2.0);
        sum += (e[a] + 1) / 2.0;
      }
      const double sphere = odd ? 0.0 : 2.0 * g / std::tgamma(sum);
      const double ball = sphere / (deg + n);
      const auto q = ball_quadrature(PolarMetric::euclidean(n), Ball({}, 1.0), 2 * deg + 2);
      const auto s = sphere_quadrature(PolarMetric::euclidean(n), Ball({}, 1.0), 2 * deg + 2);
      EXPECT_NEAR(q.integrate(mono), ball, 1e-12 * std::max(1.0, std::abs(ball))) << n << " " << e[0] << e[1] << e[2];
      EXPECT_NEAR(s.integrate(mono), sphere, 1e-12 * std::max(1.0, std::abs(sphere)));
    }
}

TEST(Metric, InvariantsOverParameterRange) {
  SeededUniform rng(22);
  for (int n : {2, 3})
    for (auto [fam, pmax] : {std::pair{MetricFamily::conformal, 1.0}, std::pair{MetricFamily::bump, 0.2}})
      for (double p : {-pmax, -0.5 * pmax, 0.0, 0.5 * pmax, pmax}) {
        const PolarMetric m(n, fam, p);
        for (int s = 0; s < 1000; ++s) {
          Point w{rng.next(), rng.next(), n == 3 ? rng.next() : 0.0};
          if (norm(w) < 1e-3) continue;
          w = (1.0 / norm(w)) * w;
          const double r = rng.unit();
          const Mat3 b0 = m.b(0.0, w), b = m.b(r, w), db = m.b_radial_derivative(w);
          for (int i = 0; i < n - 1; ++i)
            for (int j = 0; j < n - 1; ++j) {
              EXPECT_EQ(b0[i][j], i == j ? 1.0 : 0.0);
              EXPECT_EQ(b[i][j], b[j][i]);
              EXPECT_LE(std::abs(db[i][j]), m.lambda() + 1e-15);
            }
          EXPECT_GT(m.det_b(r, w), 0.0);
          EXPECT_GT(b[0][0], 0.0);
        }
      }
}

TEST(Metric, OutOfRangeParametersRejected) {
  EXPECT_THROW(PolarMetric(2, MetricFamily::conformal, 1.5), InvalidInput);
  EXPECT_THROW(PolarMetric(2, MetricFamily::bump, 0.3), InvalidInput);
  EXPECT_THROW(PolarMetric(4, MetricFamily::identity), InvalidInput);
}

TEST(CubePartition, Counts) {
  const Cube q2(2, {}, 1.0);
  const auto p3 = cube_partition(q2, 3);
  EXPECT_EQ(p3.size(), 9u);
  EXPECT_EQ(std::count_if(p3.begin(), p3.end(), [](const Cube& c) { return meets_hyperplane(c, 1, 0.0); }), 3);
  EXPECT_EQ(cube_partition(q2, 2).size(), 4u);
  const auto p5 = cube_partition(Cube(3, {}, 1.0), 5);
  EXPECT_EQ(p5.size(), 125u);
  EXPECT_EQ(std::count_if(p5.begin(), p5.end(), [](const Cube& c) { return meets_hyperplane(c, 2, 0.0); }), 25);
  EXPECT_THROW(cube_partition(q2, 1), InvalidInput);
}

TEST(CubePartition, OddAHitsExactlyAToTheNMinusOneForEveryAxis) {
  for (int n : {2, 3})
    for (int A : {3, 5, 7, 9})
      for (int axis = 0; axis < n; ++axis) {
        const Point c{0.1, -0.2, 0.3};
        const auto parts = cube_partition(Cube(n, c, 0.4), A);
        const long hits = std::count_if(parts.begin(), parts.end(),
                                        [&](const Cube& q) { return meets_hyperplane(q, axis, c[axis]); });
        EXPECT_EQ(hits, n == 2 ? A : A * A);
      }
}

TEST(CubePartition, TilesVolumeAndLineageRebuilds) {
  for (int n : {2, 3}) {
    const Cube root(n, {0.05, 0.1, -0.1}, 0.3);
    for (int A : {2, 3, 4}) {
      double vol = 0.0;
      for (const auto& c : cube_partition(root, A)) {
        vol += c.volume();
        EXPECT_EQ(cube_from_lineage(root, c.lineage, A), c);
        for (const auto& g : cube_partition(c, A)) EXPECT_EQ(cube_from_lineage(root, g.lineage, A), g);
      }
      EXPECT_NEAR(vol, root.volume(), 1e-15 * root.volume() * A * A * A);
    }
  }
}

TEST(Simplex, EquilateralTriangle) {
  const auto s = simplex_geometry({{0, 0, 0}, {1, 0, 0}, {0.5, std::sqrt(3.0) / 2, 0}});
  EXPECT_NEAR(s.diameter, 1.0, 1e-15);
  EXPECT_NEAR(s.width, std::sqrt(3.0) / 2, 1e-12);
  EXPECT_NEAR(s.barycenter[0], 0.5, 1e-15);
  EXPECT_NEAR(s.barycenter[1], std::sqrt(3.0) / 6, 1e-15);
}

TEST(Simplex, CollinearHasZeroWidth) {
  EXPECT_NEAR(simplex_geometry({{0, 0, 0}, {1, 1, 0}, {2, 2, 0}}).width, 0.0, 1e-15);
}

TEST(Simplex, RightSimplexDiameter) {
  const auto s = simplex_geometry({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}});
  EXPECT_NEAR(s.diameter, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(s.width, std::sqrt(0.5), 1e-12);
}

TEST(Simplex, DirectionTableSizes) {
  EXPECT_EQ(width_directions(2).size(), 720u);
  EXPECT_EQ(width_directions(3).size(), 2562u);
}

TEST(Simplex, RegularTetrahedronWidthCloseToExact) {
  const double a = 1.0;
  const std::vector<Point> v{{0, 0, 0}, {a, 0, 0}, {a / 2, a * std::sqrt(3.0) / 2, 0},
                             {a / 2, a * std::sqrt(3.0) / 6, a * std::sqrt(2.0 / 3.0)}};
  const auto s = simplex_geometry(v);
  // exact width is the distance between opposite edges, attained along their common normal
  const Point e1 = v[1] - v[0], e2 = v[3] - v[2];
  Point d{e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2], e1[0] * e2[1] - e1[1] * e2[0]};
  d = (1.0 / norm(d)) * d;
  const double exact = a / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(dot(v[2] - v[0], d)), exact, 1e-12);
  double gap = 2.0;
  for (const auto& w : width_directions(3)) gap = std::min({gap, distance(w, d), distance(w, -1.0 * d)});
  EXPECT_GE(s.width, exact - 1e-12);
  EXPECT_LE(s.width, exact + a * gap + 1e-12);
}
