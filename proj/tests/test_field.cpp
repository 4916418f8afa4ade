#include "fbscope/analytic/solution.hpp"
#include "fbscope/field/io.hpp"
#include "fbscope/field/quadrature.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

using namespace fbscope;
using std::numbers::pi;

namespace {

ScalarField<2> sampled2(double lo, double hi, int n, auto&& fn) {
  return ScalarField<2>::sample(GridSpec<2>::cube(lo, hi, n), fn, [](const Vec<2>&) { return 1.0; });
}

}  // namespace

TEST(GridSpec, RejectsCoarseAndAnisotropic) {
  EXPECT_THROW(GridSpec<2>::cube(0, 1, 4), ParameterError);
  EXPECT_THROW(GridSpec<2>::make(Vec<2>::Zero(), Vec<2>(1.0, 2.0), {8, 8}), ParameterError);
  const auto g = GridSpec<3>::cube(-1, 1, 16);
  EXPECT_DOUBLE_EQ(g.h, 0.125);
  EXPECT_EQ(g.node_count(), 17u * 17u * 17u);
  for (std::size_t i : {0ul, 5ul, 4912ul}) EXPECT_EQ(g.index(g.multi_index(i)), i);
}

TEST(GridSpec, BallRegionInteriorFlag) {
  const auto g = GridSpec<2>::cube(-1, 1, 16);
  EXPECT_TRUE(BallRegion<2>::make(g, Vec<2>::Zero(), 0.7).interior);
  EXPECT_FALSE(BallRegion<2>::make(g, Vec<2>::Zero(), 0.76).interior);
  EXPECT_THROW(BallRegion<2>::make(g, Vec<2>::Zero(), 0.0), ParameterError);
}

TEST(ScalarField, Invariants) {
  const auto g = GridSpec<2>::cube(-1, 1, 8);
  std::vector<double> u(g.node_count(), 1.0), chi(g.node_count(), 1.0);
  EXPECT_NO_THROW(ScalarField<2>(g, u, chi));
  u[3] = -1e-3;
  EXPECT_THROW(ScalarField<2>(g, u, chi), ParameterError);
  u[3] = 1.0;
  chi[3] = 0.0;
  EXPECT_THROW(ScalarField<2>(g, u, chi), ParameterError);
  chi[3] = 1.0;
}

TEST(ScalarField, LipschitzBoundMeasured) {
  const auto f = AnalyticSolution<2>::wedge(0.3).sample(GridSpec<2>::cube(-1, 1, 32));
  EXPECT_NEAR(f.lipschitz_bound(), 0.3, 1e-12);
  EXPECT_THROW(ScalarField<2>(f.spec(), f.values(), f.chi(), 0.2), ParameterError);
}

TEST(Interpolate, MultilinearExactness) {
  const auto f1 = sampled2(0, 1, 8, [](const Vec<2>& p) { return p[0]; });
  EXPECT_NEAR(f1.interpolate(Vec<2>(0.3, 0.7)), 0.3, 1e-15);
  const auto f0 = sampled2(0, 1, 8, [](const Vec<2>&) { return 0.0; });
  EXPECT_EQ(f0.interpolate(Vec<2>(0.41, 0.13)), 0.0);
  const auto f2 = sampled2(0, 1, 8, [](const Vec<2>& p) { return p[0] * p[1]; });
  EXPECT_NEAR(f2.interpolate(Vec<2>(0.5, 0.5)), 0.25, 1e-15);
  EXPECT_NEAR(f2.interpolate(Vec<2>(0.33, 0.71)), 0.33 * 0.71, 1e-15);
  EXPECT_THROW(f2.interpolate(Vec<2>(1.1, 0.5)), OutOfDomain);
}

TEST(Gradient, LinearAndWedge) {
  const auto f = sampled2(-1, 1, 16, [](const Vec<2>& p) { return 2.0 * (p[0] + 1.0); });
  EXPECT_NEAR((f.gradient(Vec<2>(0.1, 0.2)) - Vec<2>(2, 0)).norm(), 0.0, 1e-13);
  EXPECT_THROW(f.gradient(Vec<2>(0.95, 0.0)), OutOfDomain);
  const auto w = AnalyticSolution<2>::wedge(0.3).sample(GridSpec<2>::cube(-1, 1, 64));
  EXPECT_NEAR((w.gradient(Vec<2>(0.1, 0.5)) - Vec<2>(0, 0.3)).norm(), 0.0, 1e-13);
}

TEST(Gradient, SecondOrderOnSmoothField) {
  const Vec<2> p(0.1234, -0.2345);
  std::vector<double> err;
  for (int n : {16, 32, 64}) {
    const auto f = sampled2(-1, 1, n, [](const Vec<2>& q) { return 2.0 + 0.5 * q.squaredNorm() + std::sin(q[0]); });
    const Vec<2> exact(p[0] + std::cos(p[0]), p[1]);
    err.push_back((f.gradient(p) - exact).norm());
  }
  const double order = std::log2(err[0] / err[2]) / 2.0;
  EXPECT_GE(order, 1.9);
}

TEST(BallIntegral, Volumes) {
  const auto g2 = GridSpec<2>::cube(-2, 2, 64);
  const auto one = [](const auto&) { return 1.0; };
  const auto a = ball_integral(g2, Vec<2>(0.013, -0.021), 1.0, one);
  EXPECT_NEAR(a.value, pi, 1e-12);
  const auto g3 = GridSpec<3>::cube(-2, 2, 48);
  const auto b = ball_integral(g3, Vec<3>::Zero(), 1.0, one);
  EXPECT_NEAR(b.value, 4.0 * pi / 3.0, 1e-3 * 4.0 * pi / 3.0);
  EXPECT_LE(std::abs(b.value - 4.0 * pi / 3.0), std::max(b.error * 4, 1e-3));
}

TEST(BallIntegral, HalfDisk) {
  const auto g = GridSpec<2>::cube(-2, 2, 64);
  const auto half = ball_integral(g, Vec<2>::Zero(), 1.0, [](const Vec<2>& p) { return p[1] > 0 ? 1.0 : 0.0; });
  EXPECT_NEAR(half.value, pi / 2, 1e-12);
}

TEST(SphereIntegral, CircleAndSphere) {
  const auto c = sphere_integral<2>(Vec<2>::Zero(), 1.0, [](const Vec<2>&) { return 1.0; });
  EXPECT_NEAR(c.value, 2 * pi, 1e-12);
  const auto s = sphere_integral<2>(Vec<2>::Zero(), 1.0, [](const Vec<2>& p) { return p[1] * p[1]; });
  EXPECT_NEAR(s.value, pi, 1e-12);
  const auto t = sphere_integral<3>(Vec<3>::Zero(), 1.0, [](const Vec<3>& p) { return p[2] * p[2]; });
  EXPECT_NEAR(t.value, 4 * pi / 3, 1e-12);
  const auto a3 = sphere_integral<3>(Vec<3>(0.1, 0, 0), 0.5, [](const Vec<3>&) { return 1.0; });
  EXPECT_NEAR(a3.value, pi, 1e-12);
  EXPECT_THROW(sphere_integral<2>(Vec<2>::Zero(), 1.0, [](const Vec<2>&) { return 1.0; }, 32), ParameterError);
}

TEST(DiskRectOverlap, AgreesWithBruteForce) {
  const Vec<2> c(0.1, -0.2);
  const double r = 0.7;
  const double x0 = -0.3, x1 = 0.75, y0 = -0.5, y1 = 0.2;
  int in = 0;
  const int m = 2000;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const Vec<2> p(x0 + (i + 0.5) * (x1 - x0) / m, y0 + (j + 0.5) * (y1 - y0) / m);
      in += (p - c).norm() < r;
    }
  const double brute = in * (x1 - x0) * (y1 - y0) / (double(m) * m);
  EXPECT_NEAR(detail::disk_rect_overlap(c, r, x0, x1, y0, y1), brute, 1e-4);
}

TEST(LaplacianMass, HarmonicAndWedge) {
  const auto lin = sampled2(-1, 1, 128, [](const Vec<2>& p) { return p[0] + 1.0; });
  EXPECT_NEAR(laplacian_mass(lin, Vec<2>::Zero(), 0.5, 0.1).value, 0.0, 1e-10);
  const auto w = AnalyticSolution<2>::wedge(0.4).sample(GridSpec<2>::cube(-1, 1, 256));
  EXPECT_NEAR(laplacian_mass(w, Vec<2>::Zero(), 0.5, 0.1).value, 0.8, 0.8 * 5e-3);
  EXPECT_THROW(laplacian_mass(w, Vec<2>::Zero(), 0.95, 0.1), OutOfDomain);
}

TEST(LaplacianMass, AbsHarmonicMatchesLineQuadrature) {
  const auto sol = AnalyticSolution<2>::abs_harmonic(Polynomial<2>::parse("x2-y2"));
  const AnalyticField<2> f(sol, GridSpec<2>::cube(-1, 1, 512));
  const double r = 0.4;
  const double oracle = nodal_line_mass(sol.polynomial(), Vec<2>::Zero(), r);
  EXPECT_NEAR(oracle, 8 * r * r, 1e-3 * 8 * r * r);
  EXPECT_NEAR(laplacian_mass(f, Vec<2>::Zero(), r, 0.1).value, oracle, 0.05 * oracle);
}

TEST(FieldIo, RoundTrip) {
  const auto f = AnalyticSolution<2>::halfplane(1.0).sample(GridSpec<2>::cube(-1, 1, 8));
  std::stringstream ss;
  write_fbsf(ss, f);
  EXPECT_EQ(peek_fbsf_dim(ss), 2);
  const auto g = read_fbsf<2>(ss);
  EXPECT_TRUE(g.spec() == f.spec());
  EXPECT_EQ(g.values(), f.values());
  EXPECT_EQ(g.chi(), f.chi());
  std::stringstream bad("FBSX");
  EXPECT_THROW(read_fbsf<2>(bad), ParameterError);
  std::ostringstream csv;
  write_field_csv(csv, f);
  EXPECT_EQ(csv.str().substr(0, 11), "x,y,u,chi\n-");
}
