#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace nodal_lab;

namespace {

const auto kEuclid2 = PolarMetric::euclidean(2);

double re_z3(const Point& x) { return x[0] * x[0] * x[0] - 3.0 * x[0] * x[1] * x[1]; }

double max_nodal_error(const GridField& u, const std::function<double(const Point&)>& exact) {
  double e = 0.0;
  for (int k = 0; k < u.grid.size(); ++k) e = std::max(e, std::abs(u.values[k] - exact(u.grid.node(k))));
  return e;
}

}  // namespace

TEST(PolarGrid, IndexingAndValidation) {
  const auto g = PolarGrid::with_resolution({0.1, 0.2, 0.0}, 0.5, 64);
  EXPECT_EQ(g.nr, 32);
  EXPECT_EQ(g.nt, 64);
  EXPECT_EQ(g.size(), 1 + 32 * 64);
  EXPECT_EQ(g.index(3, 64), g.index(3, 0));
  EXPECT_EQ(g.index(3, -1), g.index(3, 63));
  EXPECT_EQ(g.ring_of(g.index(5, 7)), 5);
  EXPECT_EQ(g.angle_of(g.index(5, 7)), 7);
  EXPECT_TRUE(g.on_boundary(g.index(32, 0)));
  EXPECT_FALSE(g.on_boundary(g.index(31, 63)));
  EXPECT_NEAR(distance(g.node(g.index(32, 16)), {0.1, 0.7, 0.0}), 0.0, 1e-15);
  EXPECT_THROW(PolarGrid::with_resolution({}, 1.0, 32), InvalidInput);
  EXPECT_THROW(PolarGrid({}, 0.0, 4, 8), InvalidInput);
}

TEST(Laplace, ManufacturedConvergenceIsSecondOrder) {
  std::vector<double> err;
  for (int J : {64, 128, 256})
    err.push_back(max_nodal_error(solve_laplace(kEuclid2, PolarGrid::with_resolution({}, 1.0, J), re_z3), re_z3));
  for (std::size_t i = 1; i < err.size(); ++i) {
    EXPECT_GE(err[i - 1] / err[i], 3.5) << i;
    EXPECT_LE(err[i - 1] / err[i], 4.5) << i;
  }
}

TEST(Laplace, ConstantDataGivesConstant) {
  const auto u = solve_laplace(kEuclid2, PolarGrid::with_resolution({}, 0.7, 64), [](const Point&) { return 2.5; });
  for (double x : u.values) EXPECT_NEAR(x, 2.5, 1e-8);
}

TEST(Laplace, MaximumPrincipleForRoughData) {
  const auto g = [](const Point& x) { return std::sin(7 * x[0]) * std::cos(3 * x[1]) + (x[0] > 0 ? 0.5 : 0.0); };
  const auto grid = PolarGrid::with_resolution({}, 1.0, 128);
  const auto u = solve_laplace(kEuclid2, grid, g);
  double lo = 1e300, hi = -1e300;
  for (int k = grid.interior_size(); k < grid.size(); ++k) lo = std::min(lo, u.values[k]), hi = std::max(hi, u.values[k]);
  for (int k = 0; k < grid.interior_size(); ++k) {
    EXPECT_GE(u.values[k], lo - 1e-3 * (hi - lo));
    EXPECT_LE(u.values[k], hi + 1e-3 * (hi - lo));
  }
}

TEST(Laplace, MatchesSpectralExtension) {
  const auto g = [](const Point& x) { return x[0] * x[1] + std::exp(x[0]) * std::cos(x[1]); };
  const SpectralHarmonic s(g, {}, 1.0, 64);
  const auto u = solve_laplace(kEuclid2, PolarGrid::with_resolution({}, 1.0, 256), g);
  EXPECT_LT(max_nodal_error(u, [&](const Point& x) { return s(x); }), 1e-4);
}

TEST(Laplace, VariableOperatorStillConverges) {
  const auto op = EllipticOperator::diagonal_linear(0.3);
  const auto g = [](const Point& x) { return x[0] + x[1] * x[1]; };
  const auto coarse = solve_laplace(op, PolarGrid::with_resolution({}, 1.0, 64), g);
  const auto fine = solve_laplace(op, PolarGrid::with_resolution({}, 1.0, 128), g);
  double d = 0.0;
  for (int i = 0; i <= coarse.grid.nr; ++i)
    for (int j = 0; j < coarse.grid.nt; ++j) d = std::max(d, std::abs(coarse.at(i, j) - fine.at(2 * i, 2 * j)));
  EXPECT_LT(d, 1e-3);
}

TEST(SplitBiharmonic, RadiusSquared) {
  const auto grid = PolarGrid::with_resolution({}, 1.0, 128);
  const auto s = solve_split_biharmonic(PolarCoefficients::from_metric(kEuclid2), grid, [](const Point&) { return 1.0; },
                                        [](const Point&) { return 4.0; });
  for (double v : s.v.values) EXPECT_NEAR(v, 4.0, 1e-8);
  EXPECT_LT(max_nodal_error(s.u, [](const Point& x) { return norm2(x); }), 1e-3);
  EXPECT_LT(s.residual_u, 1e-8);
  EXPECT_LT(s.residual_v, 1e-8);
}

TEST(SplitBiharmonic, ConvergesForAlmansiFunction) {
  const auto f = almansi_compose(HarmonicPolynomial(2, {{family::planar_index(2, false), 1.0}}),
                                 HarmonicPolynomial(2, {{family::planar_index(1, true), 1.0}}));
  std::vector<double> err;
  for (int J : {64, 128}) {
    const auto s = solve_split_biharmonic(EllipticOperator::laplacian(), PolarGrid::with_resolution({}, 1.0, J),
                                          [&](const Point& x) { return f(x); }, [&](const Point& x) { return f.v(x); });
    err.push_back(max_nodal_error(s.u, [&](const Point& x) { return f(x); }));
  }
  EXPECT_GT(err[0] / err[1], 3.0);
}

TEST(GridField, BinaryRoundTripIsBitExact) {
  const auto g = GridField::sample(PolarGrid::with_resolution({0.25, -0.5, 0.0}, 0.3, 64), re_z3);
  std::stringstream ss;
  g.write_binary(ss);
  const auto bytes = ss.str();
  EXPECT_EQ(bytes.size(), 8u + 3 * 4 + 3 * 8 + 8 * g.values.size());
  EXPECT_EQ(bytes.substr(0, 8), "NLGRID01");
  const auto h = GridField::read_binary(ss);
  EXPECT_EQ(h.values, g.values);
  EXPECT_EQ(h.grid.nr, g.grid.nr);
  EXPECT_EQ(h.grid.nt, g.grid.nt);
  EXPECT_NEAR(h.grid.radius, 0.3, 1e-16);
  EXPECT_EQ(h.grid.center, g.grid.center);
}

TEST(GridField, BinaryRejectsBadFiles) {
  std::stringstream bad("NOTAGRID");
  EXPECT_THROW(GridField::read_binary(bad), InvalidInput);
  const auto g = GridField::sample(PolarGrid::with_resolution({}, 1.0, 64), re_z3);
  std::stringstream ss;
  g.write_binary(ss);
  std::stringstream cut(ss.str().substr(0, 200));
  EXPECT_THROW(GridField::read_binary(cut), InvalidInput);
}

TEST(GridField, CsvRoundTrip) {
  const auto grid = PolarGrid::with_resolution({}, 1.0, 64);
  const auto g = GridField::sample(grid, re_z3);
  std::stringstream ss;
  g.write_csv(ss);
  EXPECT_EQ(GridField::read_csv(ss, grid).values, g.values);
}

TEST(GridField, InterpolationHitsNodesAndRejectsOutside) {
  const auto grid = PolarGrid::with_resolution({}, 1.0, 64);
  const auto g = GridField::sample(grid, re_z3);
  for (int k : {0, 5, 700, grid.size() - 1}) EXPECT_NEAR(g(grid.node(k)), g.values[k], 1e-12);
  EXPECT_THROW(g({1.1, 0.0, 0.0}), InvalidInput);
}

TEST(GridField, NodeGradientConvergesSecondOrder) {
  const auto worst = [](int J) {
    const auto g = GridField::sample(PolarGrid::with_resolution({}, 1.0, J), re_z3);
    double e = 0.0;
    for (int i = 1; i < g.grid.nr; ++i)
      for (int j = 0; j < g.grid.nt; ++j) {
        const Point x = g.grid.node(g.grid.index(i, j));
        const Point d = g.node_gradient(i, j);
        e = std::max({e, std::abs(d[0] - (3 * x[0] * x[0] - 3 * x[1] * x[1])), std::abs(d[1] + 6 * x[0] * x[1])});
      }
    return e;
  };
  const double e128 = worst(128), e256 = worst(256);
  EXPECT_LT(e256, 5e-3);
  EXPECT_NEAR(e128 / e256, 4.0, 0.5);
  EXPECT_THROW(GridField::sample(PolarGrid::with_resolution({}, 1.0, 64), re_z3).node_gradient(0, 0), InvalidInput);
}

TEST(Operator, Omega) {
  EXPECT_EQ(EllipticOperator::laplacian().omega({}, 1.0), 0.0);
  EXPECT_NEAR(EllipticOperator::diagonal_linear(0.05).omega({}, 1.0), 0.1, 1e-8);
  EXPECT_NEAR(EllipticOperator::diagonal_linear(0.05, 1).omega({}, 0.5), 0.05, 1e-8);
}

TEST(Compare, LaplacianAgainstItselfIsZero) {
  const auto c = constant_coefficient_compare(EllipticOperator::laplacian(), 64, re_z3, [](const Point&) { return 1.0; });
  EXPECT_EQ(c.omega, 0.0);
  EXPECT_LT(c.distance_u, 1e-6);
  EXPECT_LT(c.distance_v, 1e-6);
  EXPECT_EQ(c.ratio_u, 0.0);
  EXPECT_THROW(constant_coefficient_compare(EllipticOperator::laplacian(), 68, re_z3, re_z3), InvalidInput);
}

TEST(Compare, DistanceGrowsWithSlope) {
  const auto bu = [](const Point& x) { return x[0] * x[0]; };
  const auto bv = [](const Point& x) { return 1.0 + x[1]; };
  const auto a = constant_coefficient_compare(EllipticOperator::diagonal_linear(0.05), 64, bu, bv);
  const auto b = constant_coefficient_compare(EllipticOperator::diagonal_linear(0.2), 64, bu, bv);
  EXPECT_GT(a.distance_u, 0.0);
  EXPECT_GT(b.distance_u, a.distance_u);
  EXPECT_NEAR(a.ratio_u, a.distance_u / a.omega, 1e-15);
}

TEST(Decomposition, RadiusSquaredSpectral) {
  for (double r : {0.3, 0.6}) {
    const auto p = proof_decomposition(family::radius_squared(), kEuclid2, {}, r);
    const double r4 = std::pow(r, 4);
    EXPECT_NEAR(p.D1, 0.0, 1e-14);
    EXPECT_NEAR(p.D2, 2 * kPi * r4, 1e-12);
    EXPECT_NEAR(p.D3, 0.0, 1e-14);
    EXPECT_NEAR(p.D4, 2 * kPi * r4, 1e-12);
    EXPECT_NEAR(p.D, 4 * kPi * r4, 1e-12);
    EXPECT_LT(p.residual, 1e-13);
    EXPECT_LT(p.boundary_mismatch, 1e-13);
    EXPECT_EQ(p.backend, "spectral");
  }
}

TEST(Decomposition, HarmonicFunctionHasOnlyD1) {
  const auto p = proof_decomposition(family::re_zk(3), kEuclid2, {}, 0.5);
  EXPECT_NEAR(p.D1, p.D, 1e-12);
  EXPECT_NEAR(p.D2, 0.0, 1e-12);
  EXPECT_NEAR(p.D4, 0.0, 1e-15);
}

TEST(Decomposition, GridAgreesWithSpectral) {
  const auto f = random_almansi_family(71, 4, 1).front();
  const auto s = proof_decomposition(f, kEuclid2, {}, 0.5);
  const auto g = proof_decomposition(f, kEuclid2, {}, 0.5, LaplaceSolver::grid(256));
  EXPECT_EQ(g.backend, "grid");
  EXPECT_LT(g.residual, 1e-10 * std::abs(g.D));
  EXPECT_NEAR(g.D, s.D, 1e-2 * std::abs(s.D));
  EXPECT_NEAR(g.D2, s.D2, 1e-2 * std::abs(s.D) + 1e-12);
  EXPECT_LT(g.harmonic_residual, 1e-8);
}

TEST(Decomposition, SpectralNeedsEuclideanMetric) {
  EXPECT_THROW(proof_decomposition(family::re_zk(2), PolarMetric(2, MetricFamily::conformal, 0.2), {}, 0.5),
               InvalidInput);
  EXPECT_NO_THROW(
      proof_decomposition(family::re_zk(2), PolarMetric(2, MetricFamily::conformal, 0.2), {}, 0.5, LaplaceSolver::grid(64)));
}
