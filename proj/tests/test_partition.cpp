#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace nodal_lab;

namespace {

const Cube kModelCube(2, {kPi / 2, kPi / 2, 0.0}, kPi / 2);

PropagationMember linear_member(double a) {
  return {"a", [a](const Point& x) { return a * x[1]; }, [a](const Point&) { return Point{0.0, a, 0.0}; },
          [](const Point&) { return 0.0; }};
}

}  // namespace

TEST(Threshold, Rules) {
  EXPECT_EQ(rule_threshold(ThresholdRule::half, 6.0, 0.05), 3.0);
  EXPECT_NEAR(rule_threshold(ThresholdRule::contraction, 6.3, 0.05), 6.0, 1e-15);
  EXPECT_FALSE(rule_exceeds(ThresholdRule::half, 3.0, 3.0));
  EXPECT_TRUE(rule_exceeds(ThresholdRule::contraction, 6.0, 6.0));
  EXPECT_EQ(threshold_rule_from_string(to_string(ThresholdRule::contraction)), ThresholdRule::contraction);
  EXPECT_THROW(threshold_rule_from_string("third"), InvalidInput);
}

TEST(DividingScan, ReZ3HalfRuleOnCenteredCube) {
  const auto rep = dividing_scan(family::re_zk(3), Cube(2, {}, 0.4), 9, {1, 0.0}, ThresholdRule::half, 0.05, 1, 3);
  EXPECT_NEAR(rep.E_Q, 3.0, 1e-3);
  ASSERT_EQ(rep.levels.size(), 2u);
  EXPECT_EQ(rep.levels[0].T, 1);
  EXPECT_EQ(rep.levels[1].candidates, 9);
  EXPECT_EQ(rep.entries.size(), 9u);
  EXPECT_TRUE(rep.levels[1].structural_bound);
  EXPECT_LE(rep.levels[1].T, 9);
}

TEST(DividingScan, ConstantHasNoExceedances) {
  const auto rep = dividing_scan(family::constant(1.0), Cube(2, {}, 0.4), 3, {1, 0.0}, ThresholdRule::half, 0.05, 2, 2);
  EXPECT_EQ(rep.E_Q, 0.0);
  EXPECT_EQ(rep.levels[1].T, 0);
  ASSERT_EQ(rep.levels.size(), 3u);
  EXPECT_EQ(rep.levels[2].T, 0);
}

TEST(DividingScan, CountIsMonotoneInThreshold) {
  const auto f = random_almansi_family(61, 5, 1).front();
  const auto rep = dividing_scan(f, Cube(2, {}, 0.3), 5, {0, 0.0}, ThresholdRule::half, 0.05, 1, 2);
  long prev = count_exceeding(rep, -1.0);
  EXPECT_EQ(prev, 5);
  for (double t = 0.0; t <= rep.E_Q + 1.0; t += 0.1) {
    const long n = count_exceeding(rep, t);
    EXPECT_LE(n, prev);
    prev = n;
  }
  EXPECT_EQ(count_exceeding(rep, 1e9), 0);
}

TEST(DividingScan, ScanAllRecordsEverySubcube) {
  const auto rep = dividing_scan(family::re_zk(2), Cube(2, {}, 0.2), 3, {1, 0.0}, ThresholdRule::half, 0.05, 1, 2, true);
  EXPECT_EQ(rep.entries.size(), 9u);
  EXPECT_EQ(rep.levels[1].candidates, 3);
}

TEST(DividingScan, RejectsBadInput) {
  const auto f = family::re_zk(2);
  const Cube q(2, {}, 0.2);
  EXPECT_THROW(dividing_scan(f, q, 4, {1, 0.0}, ThresholdRule::half), InvalidInput);
  EXPECT_THROW(dividing_scan(f, q, 3, {1, 0.0}, ThresholdRule::half, 0.05, 0), InvalidInput);
  EXPECT_THROW(dividing_scan(f, q, 3, {2, 0.0}, ThresholdRule::half), InvalidInput);
  EXPECT_THROW(dividing_scan(f, q, 3, {1, 0.0}, ThresholdRule::contraction, 0.0), InvalidInput);
}

TEST(SimplexCover, EquilateralTriangleWindow) {
  const auto S = simplex_geometry({{0, 0, 0}, {1, 0, 0}, {0.5, std::sqrt(3.0) / 2, 0}});
  const auto k = find_cover_constant(S, 0.1, 0.02);
  ASSERT_TRUE(k.found);
  EXPECT_LT(k.K0, k.K1);
  EXPECT_TRUE(simplex_cover_check(S, 0.1, std::sqrt(k.K0 * k.K1), 0.02).pass);
  EXPECT_FALSE(simplex_cover_check(S, 0.1, 0.98 * k.K0, 0.02).pass);
  EXPECT_FALSE(simplex_cover_check(S, 0.1, 1.02 * k.K1, 0.02).pass);
}

TEST(SimplexCover, FailingMarginIsNegative) {
  const auto S = simplex_geometry({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}});
  const auto c = simplex_cover_check(S, 0.1, 100.0, 0.02);
  EXPECT_FALSE(c.pass);
  EXPECT_LT(c.worst_margin, 0.0);
  EXPECT_GT(c.failing, 0);
  EXPECT_EQ(c.samples, 10000);
}

TEST(SimplexCover, RejectsThinSimplexAndFewSamples) {
  const auto thin = simplex_geometry({{0, 0, 0}, {1, 0, 0}, {0.5, 0.01, 0}});
  EXPECT_THROW(simplex_cover_check(thin, 0.1, 1.0, 0.02), InvalidInput);
  const auto S = simplex_geometry({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}});
  EXPECT_THROW(simplex_cover_check(S, 0.1, 1.0, 0.02, 100), InvalidInput);
  EXPECT_THROW(simplex_cover_check(S, 0.0, 1.0, 0.02), InvalidInput);
}

TEST(Propagation, HarmonicModelExponent) {
  std::vector<PropagationMember> fam;
  for (int m = 2; m <= 8; ++m) fam.push_back(harmonic_model_member(m));
  const auto rep = cauchy_propagation_experiment(fam, kModelCube, {1, -1}, 256);
  EXPECT_FALSE(rep.degenerate);
  EXPECT_TRUE(rep.fit_well_posed);
  EXPECT_GE(rep.alpha_emp, 0.4);
  EXPECT_LE(rep.alpha_emp, 0.6);
}

TEST(Propagation, HarmonicModelCauchyData) {
  const auto m = harmonic_model_member(3);
  for (double x : {0.3, 1.1, 2.5}) {
    EXPECT_NEAR(m.u({x, 0.0, 0.0}), 0.0, 1e-15);
    const Point p{x, 0.7, 0.0};
    EXPECT_NEAR(nl_test::fd_laplacian(m.u, p, 2), 0.0, 1e-6);
    EXPECT_NEAR(m.grad(p)[0], nl_test::central_diff(m.u, p, 0), 1e-8);
    EXPECT_NEAR(m.grad(p)[1], nl_test::central_diff(m.u, p, 1), 1e-8);
  }
}

TEST(Propagation, LinearFamilyHasExponentOne) {
  std::vector<PropagationMember> fam;
  for (int j = 1; j <= 6; ++j) fam.push_back(linear_member(0.9 * std::pow(10.0, -j) / kPi));
  const auto rep = cauchy_propagation_experiment(fam, kModelCube, {1, -1}, 64);
  EXPECT_NEAR(rep.alpha_emp, 1.0, 1e-9);
  EXPECT_NEAR(rep.fit_residual, 0.0, 1e-9);
  EXPECT_NEAR(rep.eps_decades, 5.0, 1e-9);
}

TEST(Propagation, ZeroFamilyIsDegenerate) {
  const auto rep = cauchy_propagation_experiment({linear_member(0.0), linear_member(0.0)}, kModelCube, {1, -1}, 32);
  EXPECT_TRUE(rep.degenerate);
}

TEST(Propagation, LargeMembersExcluded) {
  const auto rep = cauchy_propagation_experiment({linear_member(1.0)}, kModelCube, {1, -1}, 32);
  EXPECT_FALSE(rep.rows[0].included);
  EXPECT_FALSE(rep.rows[0].flag.empty());
}

TEST(Propagation, RejectsBadInput) {
  EXPECT_THROW(cauchy_propagation_experiment({}, Cube(3, {}, 1.0), {1, -1}), InvalidInput);
  EXPECT_THROW(cauchy_propagation_experiment({}, kModelCube, {1, 0}), InvalidInput);
  EXPECT_THROW(cauchy_propagation_experiment({}, kModelCube, {1, -1}, 8), InvalidInput);
}

TEST(Recursion, AlphaClosedForm) {
  EXPECT_NEAR(recursion_alpha(4.0, 1.0), 4.0, 1e-15);
  EXPECT_NEAR(recursion_alpha(9.0, 0.05), std::log(36.0) / std::log(1.05), 1e-12);
  EXPECT_THROW(recursion_alpha(0.0, 1.0), InvalidInput);
}

TEST(Recursion, ConstantFamilyHasZeroCurve) {
  const auto F = f_recursion({family::constant(1.0)}, {Cube(2, {}, 0.05)}, 9.0, 0.05, {0.5, 1.0, 2.0}, 64, 2);
  for (double v : F.F_emp) EXPECT_EQ(v, 0.0);
  for (bool b : F.is_bad) EXPECT_FALSE(b);
  EXPECT_TRUE(F.fit_holds);
}

TEST(Recursion, ReZ1MeasureIsChordOverDiameter) {
  const auto F = f_recursion({family::re_zk(1)}, {Cube(2, {}, 0.05)}, 9.0, 0.05, {0.5, 1.001}, 64, 2);
  ASSERT_EQ(F.samples.size(), 1u);
  EXPECT_NEAR(F.samples[0].E, 1.0, 1e-6);
  EXPECT_NEAR(F.samples[0].normalized_measure, 0.1 / (0.1 * std::sqrt(2.0)), 1e-12);
  EXPECT_EQ(F.F_emp[0], 0.0);
  EXPECT_NEAR(F.F_emp[1], 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_TRUE(F.is_bad[1]);
  std::ostringstream os;
  F.write_csv(os);
  EXPECT_EQ(os.str().substr(0, 15), "E,F_emp,is_bad\n");
}
