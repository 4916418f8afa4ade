#include "fbscope/analytic/grammar.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace fbscope;
using std::numbers::pi;

TEST(Analytic, PointValues) {
  const auto w = AnalyticSolution<2>::wedge(0.5);
  EXPECT_NEAR(w.eval(Vec<2>(0, -0.2)), 0.1, 1e-15);
  EXPECT_EQ(w.grad(Vec<2>(0, -0.2)), Vec<2>(0, -0.5));
  EXPECT_EQ(w.grad(Vec<2>(0.3, 0.0)), Vec<2>(0, 0.5));  // one-sided along +ν
  const auto w3 = AnalyticSolution<3>::wedge(0.5);
  EXPECT_NEAR(w3.eval(Vec<3>(0, 0, -0.2)), 0.1, 1e-15);
  const auto hp = AnalyticSolution<2>::halfplane(1.0);
  EXPECT_EQ(hp.eval(Vec<2>(0.3, -0.1)), 0.0);
  EXPECT_EQ(hp.chi(Vec<2>(0.3, -0.1)), 0.0);
  EXPECT_EQ(hp.chi(Vec<2>(0.3, 0.1)), 1.0);
  const auto ah = parse_solution<2>("absharm:v=x2-y2");
  EXPECT_EQ(ah.eval(Vec<2>(1, 0)), 1.0);
  EXPECT_EQ(ah.grad(Vec<2>(1, 0)), Vec<2>(2, 0));
  EXPECT_EQ(ah.grad(Vec<2>(0, 1)), Vec<2>(0, 2));
  EXPECT_EQ(ah.chi(Vec<2>(0.5, 0.5)), 1.0);
}

TEST(Analytic, Validation) {
  EXPECT_THROW(AnalyticSolution<2>::wedge(0.0), ParameterError);
  EXPECT_THROW(AnalyticSolution<2>::halfplane(1.0, Vec<2>(1, 1)), ParameterError);
  EXPECT_THROW(AnalyticSolution<2>::abs_harmonic(Polynomial<2>::parse("x2+y2")), ParameterError);
  EXPECT_THROW(AnalyticSolution<2>::abs_harmonic(Polynomial<2>::parse("3")), ParameterError);
  EXPECT_THROW(AnalyticSolution<3>::homogeneous_abs(2), ParameterError);
  EXPECT_THROW(AnalyticSolution<2>::homogeneous_abs(1), ParameterError);
  EXPECT_THROW(parse_solution<2>("wedge:q=abc"), ParameterError);
  EXPECT_THROW(parse_solution<2>("wedge:p=1"), ParameterError);
  EXPECT_THROW(parse_solution<2>("spiral"), ParameterError);
  EXPECT_THROW(parse_solution<2>("absharm:v=x2-z2"), ParameterError);
}

TEST(Grammar, Catalogue) {
  EXPECT_EQ(parse_solution<2>("wedge:q=0.5,nu=en").kind(), SolutionKind::Wedge);
  EXPECT_EQ(parse_solution<2>("wedge:q=0.5,nu=en").slope(), 0.5);
  EXPECT_EQ(parse_solution<2>("halfplane:a=1").kind(), SolutionKind::HalfPlane);
  EXPECT_EQ(parse_solution<2>("homabs:k=3").degree(), 3);
  EXPECT_EQ(parse_solution<2>("cusp").kind(), SolutionKind::Cusp);
  EXPECT_EQ(parse_solution<3>("zero").kind(), SolutionKind::Zero);
  EXPECT_EQ(parse_solution<2>("twoslope:ap=1,am=0.5").slope_minus(), 0.5);
  const auto tilted = parse_solution<2>("wedge1:q=2,nu=0.6;0.8");
  EXPECT_NEAR(tilted.eval(Vec<2>(1, 1)), 2.0 * 1.4, 1e-14);
  EXPECT_EQ(tilted.kind(), SolutionKind::WedgeWithChiOne);
}

TEST(Polynomial, ParseAndCompose) {
  const auto p = Polynomial<2>::parse("y+0.5*x2-0.5*y2");
  EXPECT_NEAR(p(Vec<2>(2, 1)), 1 + 2 - 0.5, 1e-15);
  EXPECT_TRUE(p.laplacian().is_zero());
  const auto q = p.compose_affine(Vec<2>(0.3, -0.2), 0.7);
  const Vec<2> y(0.11, 0.42);
  EXPECT_NEAR(q(y), p(Vec<2>(0.3, -0.2) + 0.7 * y), 1e-14);
  const auto r4 = Polynomial<2>::real_power(4);  // x^4 − 6x²y² + y^4
  EXPECT_NEAR(r4(Vec<2>(1, 2)), 1 - 24 + 16, 1e-12);
  EXPECT_NEAR(Polynomial<3>::parse("z2").sphere_integral(), 4 * pi / 3, 1e-13);
  EXPECT_NEAR(Polynomial<2>::parse("1").ball_integral(), pi, 1e-14);
}

TEST(ExactFunctionals, Wedge) {
  for (double q : {0.3, 0.7}) {
    const auto w = AnalyticSolution<2>::wedge(q);
    for (double r : {0.1, 0.5, 2.0}) {
      const auto s = exact_functionals(w, Vec<2>::Zero(), r);
      EXPECT_NEAR(s.N, 1.0, 1e-13);
      EXPECT_NEAR(s.M, pi, 1e-13);
      EXPECT_NEAR(s.H, q * q * pi, 1e-13);
      EXPECT_EQ(s.V, 0.0);
    }
    const auto s3 = exact_functionals(AnalyticSolution<3>::wedge(q), Vec<3>::Zero(), 0.3);
    EXPECT_NEAR(s3.N, 1.0, 1e-13);
    EXPECT_NEAR(s3.M, 4 * pi / 3, 1e-13);
    EXPECT_NEAR(s3.H * alpha_n(3) * alpha_n(3), q * q, 1e-13);
  }
}

TEST(ExactFunctionals, HalfPlaneOnTheBoundary) {
  const auto s = exact_functionals(AnalyticSolution<2>::halfplane(1.0), Vec<2>(0.4, 0.0), 0.25);
  EXPECT_NEAR(s.D, pi, 1e-14);
  EXPECT_NEAR(s.H, pi / 2, 1e-14);
  EXPECT_NEAR(s.M, pi / 2, 1e-14);
  EXPECT_NEAR(s.N, 0.0, 1e-14);
  EXPECT_NEAR(s.V, 1.0, 1e-14);
  EXPECT_FALSE(s.n_defined);
  EXPECT_THROW(exact_functionals(AnalyticSolution<2>::halfplane(1.0), Vec<2>(0.0, 0.1), 0.25), NotAvailable);
  EXPECT_THROW(exact_functionals(AnalyticSolution<2>::cusp(), Vec<2>::Zero(), 0.25), NotAvailable);
}

TEST(ExactFunctionals, HomogeneousDegreeTwo) {
  const auto h = AnalyticSolution<2>::homogeneous_abs(2);
  for (double r : {0.1, 0.3, 0.9}) {
    const auto s = exact_functionals(h, Vec<2>::Zero(), r);
    EXPECT_NEAR(s.N, 2.0, 1e-12);
    EXPECT_EQ(s.V, 0.0);
    EXPECT_NEAR(s.H, pi * r * r, 1e-12);
    EXPECT_NEAR(s.M, pi + pi * r * r, 1e-12);
  }
}

TEST(ExactFunctionals, NodalDiagonalPoint) {
  // |x²−y²| at distance t along the diagonal: N(ρ) = (4t²+2ρ²)/(4t²+ρ²), H = π(ρ²+4t²).
  const auto a = parse_solution<2>("absharm:v=x2-y2");
  const double t = 0.3;
  const Vec<2> x = Vec<2>(1, 1).normalized() * t;
  for (double rho : {0.01, 0.1, 0.3}) {
    const auto s = exact_functionals(a, x, rho);
    EXPECT_NEAR(s.N, (4 * t * t + 2 * rho * rho) / (4 * t * t + rho * rho), 1e-11);
    EXPECT_NEAR(s.H, pi * (rho * rho + 4 * t * t), 1e-11);
  }
}

TEST(ExactFunctionals, MonotoneAndDensityBound) {
  const auto a = parse_solution<2>("absharm:v=y+0.5*x2-0.5*y2");
  const Vec<2> x(0.0, 0.0);
  double prev = -1e300;
  for (double r = 0.05; r < 1.0; r += 0.05) {
    const double M = exact_functionals(a, x, r).M;
    EXPECT_GE(M, prev - 1e-12);
    prev = M;
  }
  for (double q : {0.2, 0.5, 0.9}) {
    const auto s = exact_functionals(AnalyticSolution<2>::wedge(q), Vec<2>(0.7, 0.0), 1e-3);
    EXPECT_NEAR(2.0 * alpha_n(2) * std::sqrt(s.H), 2.0 * q, 1e-12);
    EXPECT_LE(alpha_n(2) * std::sqrt(s.H), 1.0);
  }
}

TEST(ExactLaplacianMass, Catalogue) {
  EXPECT_NEAR(exact_laplacian_mass(AnalyticSolution<2>::wedge(0.4), Vec<2>::Zero(), 0.5), 4 * 0.4 * 0.5, 1e-15);
  EXPECT_NEAR(exact_laplacian_mass(AnalyticSolution<2>::halfplane(1.0), Vec<2>::Zero(), 0.3), 0.6, 1e-15);
  EXPECT_EQ(exact_laplacian_mass(AnalyticSolution<2>::zero(), Vec<2>::Zero(), 0.3), 0.0);
  EXPECT_NEAR(exact_laplacian_mass(AnalyticSolution<2>::homogeneous_abs(2), Vec<2>::Zero(), 0.5), 8 * 0.25, 1e-14);
  EXPECT_NEAR(exact_laplacian_mass(AnalyticSolution<3>::wedge(0.5), Vec<3>(0, 0, 0.3), 0.5), 2 * 0.5 * pi * 0.16, 1e-14);
  EXPECT_THROW(exact_laplacian_mass(parse_solution<2>("absharm:v=x2-y2"), Vec<2>::Zero(), 0.5), NotAvailable);
}

TEST(NodalLineMass, MatchesClosedForms) {
  const auto k3 = Polynomial<2>::real_power(3);
  EXPECT_NEAR(nodal_line_mass(k3, Vec<2>::Zero(), 0.5, 1024), 4 * 3 * 0.125, 2e-3 * 1.5);
  const auto lin = Polynomial<2>::parse("2y");
  EXPECT_NEAR(nodal_line_mass(lin, Vec<2>(0.1, 0.3), 0.5, 256), 4 * 2 * std::sqrt(0.25 - 0.09), 1e-9);
}

TEST(AnalyticField, SampledGridMatchesEval) {
  const auto w = AnalyticSolution<2>::wedge(0.5);
  const auto f = w.sample(GridSpec<2>::cube(-1, 1, 16));
  EXPECT_NEAR(f.interpolate(Vec<2>(0.31, -0.2)), 0.1, 1e-15);
  const AnalyticField<2> af(w, GridSpec<2>::cube(-1, 1, 16));
  EXPECT_TRUE(af.ball_interior(Vec<2>::Zero(), 0.7));
  EXPECT_FALSE(af.ball_interior(Vec<2>::Zero(), 0.9));
}
