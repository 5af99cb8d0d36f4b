#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace nodal_lab;

namespace {

const auto kEuclid2 = PolarMetric::euclidean(2);

double brute_sup_u2(const BiharmonicFunction& f, const Ball& b, int m = 801) {
  double best = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const Point t{-1.0 + 2.0 * i / (m - 1), -1.0 + 2.0 * j / (m - 1), 0.0};
      if (norm2(t) > 1.0) continue;
      const double u = f(b.center + b.radius * t);
      best = std::max(best, u * u);
    }
  return best;
}

}  // namespace

TEST(Sup, ReZkOnCenteredBall) {
  for (int k = 1; k <= 6; ++k) {
    const auto s = sup_on_ball(family::re_zk(k), Ball({}, 0.5));
    EXPECT_NEAR(s.sup_u2, std::pow(0.25, k), 1e-12 * std::pow(0.25, k));
    EXPECT_EQ(s.sup_v2, 0.0);
  }
}

TEST(Sup, RadiusSquaredIncludesV) {
  const auto s = sup_on_ball(family::radius_squared(), Ball({}, 1.0));
  EXPECT_NEAR(s.sup_u2, 1.0, 1e-12);
  EXPECT_NEAR(s.sup_v2, 16.0, 1e-12);
  EXPECT_NEAR(s.total(), 17.0, 1e-12);
}

TEST(Sup, NeverBelowBruteForceAndClose) {
  for (const auto& f : random_almansi_family(41, 6, 4)) {
    const Ball b({0.1, -0.2, 0.0}, 0.3);
    const double brute = brute_sup_u2(f, b);
    const double lib = sup_on_ball(f, b).sup_u2;
    EXPECT_GE(lib, brute * (1.0 - 1e-6));
    EXPECT_LE(lib, brute * (1.0 + 1e-3) + 1e-14);
  }
}

TEST(Sup, RejectsBadRule) {
  EXPECT_THROW(sup_on_ball(family::re_zk(2), Ball({}, 0.5), SupRule{1, 5}), InvalidInput);
  EXPECT_THROW(sup_on_ball(family::re_zk(2), Ball({}, 0.5), SupRule{64, -1}), InvalidInput);
}

TEST(DoublingIndex, ReZkAtOriginIsK) {
  for (int k = 1; k <= 8; ++k)
    for (double r : {0.01, 0.2, 0.9}) EXPECT_NEAR(doubling_index(family::re_zk(k), {}, r), k, 1e-9) << k << " " << r;
}

TEST(DoublingIndex, RadiusSquaredClosedForm) {
  const double want = 0.5 * std::log2(17.0 / (1.0 / 16.0 + 16.0));
  EXPECT_NEAR(doubling_index(family::radius_squared(), {}, 1.0), want, 1e-10);
  EXPECT_NEAR(want, 0.0409, 5e-5);
}

TEST(DoublingIndex, ConstantIsZero) {
  EXPECT_NEAR(doubling_index(family::constant(2.0), {0.3, 0.1, 0.0}, 0.4), 0.0, 1e-15);
}

TEST(DoublingIndex, InvariantUnderScalingOfU) {
  for (const auto& f : random_almansi_family(42, 5, 3)) {
    const BiharmonicFunction g(-2.5 * f.h1(), -2.5 * f.h2());
    const Point c{0.2, 0.1, 0.0};
    EXPECT_NEAR(doubling_index(g, c, 0.3), doubling_index(f, c, 0.3), 1e-10);
  }
}

TEST(DoublingIndex, ZeroFunctionIsDegenerate) {
  EXPECT_THROW(doubling_index(BiharmonicFunction(), {}, 0.5), DegenerateDenominator);
  EXPECT_THROW(doubling_index(family::re_zk(1), {}, 0.0), InvalidInput);
}

TEST(CubeIndex, HomogeneousCubeAtOrigin) {
  const auto rep = cube_index(family::re_zk(3), Cube(2, {}, 0.03), 3);
  EXPECT_NEAR(rep.E, 3.0, 1e-6);
  EXPECT_FALSE(rep.clipped);
  EXPECT_GT(rep.evaluations, 0);
}

TEST(CubeIndex, DominatesEveryGridEvaluation) {
  const auto f = random_almansi_family(43, 5, 1).front();
  const Cube q(2, {0.1, 0.05, 0.0}, 0.04);
  const auto rep = cube_index(f, q, 3);
  const double diam = q.diameter();
  for (double r : {0.05 * diam, 0.5 * diam, 5.0 * diam})
    for (const Point& x : {q.center, Point{0.06, 0.01, 0.0}, Point{0.14, 0.09, 0.0}})
      EXPECT_GE(rep.E, doubling_index(f, x, r) - 1e-12);
}

TEST(CubeIndex, LargeCubeIsClipped) {
  EXPECT_TRUE(cube_index(family::re_zk(2), Cube(2, {}, 0.2), 2).clipped);
}

TEST(CubeIndex, ZeroFunctionGivesZero) {
  EXPECT_EQ(cube_index(BiharmonicFunction(), Cube(2, {}, 0.05), 2).E, 0.0);
}

TEST(CubeIndex, SubcubesOfHomogeneousFunctionStayBelowParent) {
  const auto f = family::re_zk(4);
  const Cube q(2, {}, 0.05);
  const double parent = cube_index(f, q, 3).E;
  for (const auto& c : cube_partition(q, 3)) EXPECT_LE(cube_index(f, c, 3).E, parent + 1e-6);
}

TEST(CubeIndex, CsvLayout) {
  std::ostringstream os;
  write_cube_index_csv(os, {cube_index(family::re_zk(2), Cube(2, {}, 0.02), 2)});
  const auto s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')),
            "cube_center_x,cube_center_y,cube_center_z,half_width,E,witness_x,witness_y,witness_z,witness_r,clipped");
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 2);
}

TEST(FrequencyIndexRelation, ReZkSitsInsideBounds) {
  for (int k = 1; k <= 5; ++k) {
    const auto rel = frequency_index_relation(family::re_zk(k), kEuclid2, {}, 0.4, 0.5, 0.2);
    EXPECT_NEAR(rel.E, k, 1e-9);
    EXPECT_NEAR(rel.N_lower, k, 1e-9);
    EXPECT_NEAR(rel.N_upper, k, 1e-9);
    EXPECT_LE(rel.C_lower_req, 0.0);
    EXPECT_LE(rel.C_upper_req, 0.0);
  }
}

TEST(FrequencyIndexRelation, RejectsEtaOutOfRange) {
  EXPECT_THROW(frequency_index_relation(family::re_zk(2), kEuclid2, {}, 0.4, 0.5, 0.7), InvalidInput);
  EXPECT_THROW(frequency_index_relation(family::re_zk(2), kEuclid2, {}, 0.4, 1.5, 0.1), InvalidInput);
}

TEST(ChangingCenter, RandomFamilyPasses) {
  const auto fam = random_almansi_family(44, 5, 6);
  int pass = 0;
  for (const auto& f : fam) pass += changing_center_check(f, {0.05, 0.0, 0.0}, {0.0, 0.05, 0.0}, 0.1).pass ? 1 : 0;
  EXPECT_EQ(pass, 6);
}

TEST(ChangingCenter, RejectsFarCenters) {
  EXPECT_THROW(changing_center_check(family::re_zk(2), {0.0, 0.0, 0.0}, {0.2, 0.0, 0.0}, 0.1), InvalidInput);
  EXPECT_THROW(changing_center_check(family::re_zk(2), {}, {}, 0.1, 1.0), InvalidInput);
}
