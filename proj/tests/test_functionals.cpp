#include "fbscope/analytic/grammar.hpp"
#include "fbscope/functionals/emit.hpp"
#include "fbscope/functionals/functionals.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

using namespace fbscope;
using std::numbers::pi;

namespace {

const GridSpec<2> kGrid256 = GridSpec<2>::cube(-1, 1, 256);

ScalarField<2> grid(const std::string& name, const GridSpec<2>& g = kGrid256) {
  return parse_solution<2>(name).sample(g);
}

}  // namespace

TEST(AlphaN, Constants) {
  EXPECT_NEAR(alpha_n(2), 0.564190, 1e-6);
  EXPECT_NEAR(alpha_n(3), 0.488603, 1e-6);
  for (int d : {2, 3}) EXPECT_NEAR(alpha_n(d) * alpha_n(d) * unit_ball_volume(d), 1.0, 1e-14);
  EXPECT_THROW(alpha_n(4), ParameterError);
}

TEST(Sample, WedgeOnGrid) {
  const auto s = sample(grid("wedge:q=0.5"), Vec<2>::Zero(), 0.25);
  EXPECT_NEAR(s.N, 1.0, 1e-2);
  EXPECT_NEAR(s.V, 0.0, 1e-12);
  EXPECT_NEAR(s.M, pi, 1e-2 * pi);
  EXPECT_TRUE(s.n_defined);
  EXPECT_DOUBLE_EQ(s.M, s.D - s.H);
}

TEST(Sample, HalfPlaneOnGrid) {
  const auto f = grid("halfplane:a=1");
  const auto s = sample(f, Vec<2>::Zero(), 0.25);
  EXPECT_NEAR(s.M, pi / 2, 1e-2);
  EXPECT_NEAR(s.N, 0.0, 1e-2);
  EXPECT_NEAR(s.V, 1.0, 1e-2);
  EXPECT_FALSE(s.n_defined);
  EXPECT_NEAR(s.N + s.V, almgren_ratio(f, Vec<2>::Zero(), 0.25), 2 * s.quad_err + 1e-3);
  EXPECT_NEAR(s.N + s.V, 1.0, 1e-2);
}

TEST(Sample, ZeroFieldSentinel) {
  const auto s = sample(grid("zero", GridSpec<2>::cube(-1, 1, 32)), Vec<2>::Zero(), 0.5);
  EXPECT_EQ(s.D, 0.0);
  EXPECT_EQ(s.M, 0.0);
  EXPECT_EQ(s.H, 0.0);
  EXPECT_EQ(s.N, kNegInf);
  EXPECT_TRUE(std::isnan(s.V));
  EXPECT_FALSE(s.n_defined);
}

TEST(Sample, OutOfDomain) {
  EXPECT_THROW(sample(grid("wedge:q=1", GridSpec<2>::cube(-1, 1, 32)), Vec<2>::Zero(), 0.95), OutOfDomain);
}

TEST(Sample, MatchesExactOnAnalyticField) {
  const auto sol = parse_solution<2>("absharm:v=x2-y2");
  const AnalyticField<2> f(sol, kGrid256);
  const Vec<2> x = Vec<2>(1, 1).normalized() * 0.3;
  for (double r : {0.05, 0.2}) {
    const auto a = sample(f, x, r);
    const auto e = exact_functionals(sol, x, r);
    EXPECT_NEAR(a.N, e.N, 1e-3 * e.N);
    EXPECT_NEAR(a.H, e.H, 1e-4 * e.H);
  }
}

TEST(Sample, FreqPlusVolumeIdentity) {
  // N + V = r∫|∇u|²/∫u² on a field with a nontrivial zero set.
  const auto f = grid("halfplane:a=0.7,nu=0.6;0.8");
  for (const Vec<2>& x : {Vec<2>(0.1, 0.05), Vec<2>(-0.2, 0.15)}) {
    const auto s = sample(f, x, 0.3);
    EXPECT_NEAR(s.N + s.V, almgren_ratio(f, x, 0.3), 2 * s.quad_err + 1e-3);
  }
}

TEST(Profile, WedgeConstant) {
  const auto p = profile(grid("wedge:q=0.3"), Vec<2>::Zero(), 4.0 / 128, 0.5, 8);
  ASSERT_EQ(p.samples.size(), 8u);
  for (const auto& s : p.samples) {
    EXPECT_NEAR(s.M, pi, 1e-2 * pi);
    EXPECT_NEAR(s.N, 1.0, 1e-2);
  }
  EXPECT_TRUE(p.m_monotone);
  EXPECT_EQ(p.certified_from, 0);
  EXPECT_THROW(profile(grid("wedge:q=0.3"), Vec<2>::Zero(), 0.1, 0.5, 4), ParameterError);
}

TEST(Profile, HomogeneousDegreeTwo) {
  const AnalyticField<2> exact(parse_solution<2>("homabs:k=2"), kGrid256);
  const auto p = profile(exact, Vec<2>::Zero(), 4.0 / 128, 0.5, 8);
  for (const auto& s : p.samples) EXPECT_NEAR(s.N, 2.0, 1e-2);
  EXPECT_TRUE(p.m_monotone);
  EXPECT_TRUE(p.n_monotone);
  EXPECT_TRUE(p.h_monotone);
}

TEST(Profile, HomogeneousDegreeTwoGridConverges) {
  // The multilinear interpolant smears the diagonal creases: the deficit in N
  // scales like h/r and halves under refinement.
  std::vector<double> gap;
  for (int n : {128, 256, 512}) {
    const auto p = profile(grid("homabs:k=2", GridSpec<2>::cube(-1, 1, n)), Vec<2>::Zero(), 0.1, 0.5, 8);
    EXPECT_TRUE(p.m_monotone);
    EXPECT_TRUE(p.n_monotone);
    gap.push_back(2.0 - p.samples.front().N);
  }
  EXPECT_GT(gap[0], 0.0);
  EXPECT_LT(gap[1], 0.6 * gap[0]);
  EXPECT_LT(gap[2], 0.6 * gap[1]);
}

TEST(DerivativeChecks, WedgeBothSidesVanish) {
  const auto f = grid("wedge:q=0.5");
  const auto m = m_derivative_check(f, Vec<2>::Zero(), 0.3);
  EXPECT_NEAR(m.rhs, 0.0, 1e-5);
  EXPECT_LE(std::abs(m.lhs), std::max(m.tol, 1e-6));
  EXPECT_EQ(m.relative, 0.0);
  const auto n = n_derivative_check(f, Vec<2>::Zero(), 0.3);
  EXPECT_LE(n.residual, std::max(n.tol, 1e-6));
}

TEST(DerivativeChecks, LinearField) {
  const auto f = ScalarField<2>::sample(
      GridSpec<2>::cube(-1, 1, 64), [](const Vec<2>& p) { return p[0] + 2.0; }, [](const Vec<2>&) { return 1.0; });
  // x_1 + 2 is not 1-homogeneous about 0, so use the analytic linear field.
  const AnalyticField<2> lin(AnalyticSolution<2>::wedge(1.0, Vec<2>(1, 0)), GridSpec<2>::cube(-1, 1, 64));
  const auto m = m_derivative_check(lin, Vec<2>(0.0, 0.2), 0.3);
  EXPECT_NEAR(m.rhs, 0.0, 1e-12);
  EXPECT_EQ(m.relative, 0.0);
  EXPECT_GT(f.max_value(), 0.0);
}

TEST(DerivativeChecks, HomogeneousDegreeTwoExact) {
  const AnalyticField<2> f(parse_solution<2>("homabs:k=2"), kGrid256);
  const auto m = m_derivative_check(f, Vec<2>::Zero(), 0.4);
  EXPECT_NEAR(m.rhs, 2 * pi * 0.4, 1e-9);
  EXPECT_LE(m.relative, 1e-3);
  const auto c = n_derivative_check(f, Vec<2>::Zero(), 0.4);
  EXPECT_LE(c.residual, 1e-3);
}

TEST(DerivativeChecks, HomogeneousDegreeTwoGridLadder) {
  std::vector<double> mres, nres;
  for (int n : {128, 256, 512}) {
    const auto f = grid("homabs:k=2", GridSpec<2>::cube(-1, 1, n));
    const auto m = m_derivative_check(f, Vec<2>::Zero(), 0.4);
    EXPECT_NEAR(m.rhs, 2 * pi * 0.4, 0.05 * 2 * pi * 0.4);
    EXPECT_LE(m.relative, 0.05);
    mres.push_back(m.residual);
    nres.push_back(n_derivative_check(f, Vec<2>::Zero(), 0.4).residual);
  }
  EXPECT_LT(mres[2], mres[0]);
  EXPECT_LT(nres[1], nres[0]);
  EXPECT_LT(nres[2], nres[1]);
}

TEST(DerivativeChecks, NotCertifiedThrows) {
  EXPECT_THROW(n_derivative_check(grid("halfplane:a=1"), Vec<2>::Zero(), 0.3), PreconditionError);
}

TEST(DerivativeChecks, PerturbedCreaseDiagnostic) {
  // |x_2 + 0.1(x_1² − x_2²)|: frequency derivative formulas agree within 10%.
  const AnalyticField<2> f(parse_solution<2>("absharm:v=y+0.1*x2-0.1*y2"), kGrid256);
  const auto c = n_derivative_check(f, Vec<2>::Zero(), 0.4);
  EXPECT_GT(c.lhs, 0.0);
  EXPECT_LE(c.relative, 0.1);
}

TEST(LimitExtrapolate, Oracles) {
  for (double q : {0.3, 0.7}) {
    const auto p = profile(grid("wedge:q=" + std::to_string(q)), Vec<2>::Zero(), 4.0 / 128, 0.5, 8);
    const auto e = limit_extrapolate(p);
    EXPECT_NEAR(e.M0, pi, 1e-2 * pi);
    EXPECT_NEAR(e.N0, 1.0, 1e-2);
    EXPECT_NEAR(e.H0, q * q * pi, 1e-2 * q * q * pi);
    EXPECT_TRUE(e.stable());
  }
  const auto hp = limit_extrapolate(profile(grid("halfplane:a=1"), Vec<2>(0.1, 0.0), 4.0 / 128, 0.5, 8));
  EXPECT_NEAR(hp.M0, pi / 2, 1e-2);
  const auto inner = limit_extrapolate(profile(grid("wedge:q=0.5"), Vec<2>(0.0, 0.3), 4.0 / 128, 0.2, 8));
  EXPECT_EQ(inner.M0, kNegInf);
  EXPECT_TRUE(inner.interior_positive);
}

TEST(VariationalResidual, Discrimination) {
  const auto w = variational_residual(grid("wedge:q=0.5"));
  EXPECT_LE(w.residual, 1e-6);
  EXPECT_EQ(w.per_field.size(), 32u);
  const auto t = variational_residual(grid("twoslope:ap=1,am=0.5"));
  EXPECT_GE(t.residual, 1e-2);
  const auto h = ScalarField<2>::sample(
      kGrid256, [](const Vec<2>& p) { return 3.0 + p[0] * p[0] - p[1] * p[1]; }, [](const Vec<2>&) { return 1.0; });
  EXPECT_LE(variational_residual(h).residual, 1e-4);
  const auto again = variational_residual(grid("twoslope:ap=1,am=0.5"));
  EXPECT_EQ(again.per_field, t.per_field);
}

TEST(Emit, CsvAndJson) {
  const auto p = profile(grid("wedge:q=0.5", GridSpec<2>::cube(-1, 1, 64)), Vec<2>::Zero(), 0.1, 0.5, 8);
  std::ostringstream os;
  write_sample_csv_header<2>(os);
  for (const auto& s : p.samples) write_sample_csv_row(os, s);
  const std::string text = os.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 9);
  const auto j = to_json(p);
  EXPECT_EQ(j["samples"].size(), 8u);
  EXPECT_EQ(fmt17(kNegInf), "-inf");
  EXPECT_EQ(fmt17(0.1), "0.10000000000000001");
}
