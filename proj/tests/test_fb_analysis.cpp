#include "fbscope/analytic/solution.hpp"
#include "fbscope/fb_analysis/emit.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace fbscope;

namespace {

template <int Dim>
ScalarField<Dim> on_grid(const AnalyticSolution<Dim>& s, const GridSpec<Dim>& g) {
  return ScalarField<Dim>::sample(g, [&](const Vec<Dim>& p) { return s.eval(p); },
                                  [&](const Vec<Dim>& p) { return s.chi(p); });
}

const double kPi = std::numbers::pi;

}  // namespace

TEST(Extract, WedgeCrease) {
  const auto g = GridSpec<2>::cube(-1, 1, 64);
  const auto f = on_grid(AnalyticSolution<2>::wedge(0.4), g);
  const auto pts = extract_boundary(f);
  ASSERT_FALSE(pts.u_identically_zero);
  EXPECT_EQ(pts.points.size(), 65u);
  for (const auto& p : pts.points) {
    EXPECT_LE(std::abs(p.x[1]), g.h);
    EXPECT_LE(p.u, g.h * f.lipschitz_bound());
  }
  EXPECT_NEAR(pts.total_measure(), 2.0, 1e-12);
}

TEST(Extract, EmptyAndZero) {
  const auto g = GridSpec<2>::cube(-1, 1, 16);
  const auto pos = ScalarField<2>::sample(g, [](const Vec<2>& p) { return 1.0 + p.squaredNorm(); },
                                          [](const Vec<2>&) { return 1.0; });
  const auto a = extract_boundary(pos);
  EXPECT_TRUE(a.points.empty());
  EXPECT_FALSE(a.u_identically_zero);
  const auto zero = ScalarField<2>::sample(g, [](const Vec<2>&) { return 0.0; }, [](const Vec<2>&) { return 0.0; });
  const auto b = extract_boundary(zero);
  EXPECT_TRUE(b.points.empty());
  EXPECT_TRUE(b.u_identically_zero);
}

TEST(Extract, CurvedBoundaryMeasure) {
  // Polyline length and polygon area of a circle and a sphere of radius 1/2.
  const auto g2 = GridSpec<2>::cube(-1, 1, 256);
  const auto c = extract_boundary(ScalarField<2>::sample(
      g2, [](const Vec<2>& p) { return std::max(0.0, p.norm() - 0.5); }, [](const Vec<2>&) { return 1.0; }));
  EXPECT_NEAR(c.total_measure(), kPi, 1e-2 * kPi);
  const auto g3 = GridSpec<3>::cube(-1, 1, 48);
  const auto s = extract_boundary(ScalarField<3>::sample(
      g3, [](const Vec<3>& p) { return std::max(0.0, p.norm() - 0.5); }, [](const Vec<3>&) { return 1.0; }));
  EXPECT_NEAR(s.total_measure(), kPi, 0.05 * kPi);
  const auto plane = extract_boundary(on_grid(AnalyticSolution<3>::wedge(1.0), GridSpec<3>::cube(-1, 1, 16)));
  EXPECT_NEAR(plane.total_measure(), 4.0, 1e-12);
}

TEST(Classify, WedgeIsHighestDensity) {
  const double q = 0.4;
  const auto g = GridSpec<2>::cube(-1, 1, 256);
  const auto f = on_grid(AnalyticSolution<2>::wedge(q), g);
  const auto pts = classify(f, extract_boundary(f));
  int resolved = 0;
  for (const auto& p : pts.points) {
    if (p.out_of_domain) continue;
    ++resolved;
    ASSERT_EQ(p.label, PointClass::SigmaH) << p.x.transpose();
    EXPECT_NEAR(p.N0, 1.0, 1e-2);
    EXPECT_GE(p.M0, kPi * 0.95);
    EXPECT_GT(std::abs(p.nu[1]), 0.999);
    EXPECT_LE(alpha_n(2) * std::sqrt(p.H0), 1.0 + 1e-2);
    EXPECT_NEAR(alpha_n(2) * std::sqrt(p.H0), q, 1e-2 * q);
  }
  EXPECT_GT(resolved, 200);
  const auto& mid = pts.points[pts.points.size() / 2];
  EXPECT_GT(positive_density(f, mid.x, 8 * g.h), 0.999);
  EXPECT_EQ(high_frequency_share(pts, 1.1), 0.0);
}

TEST(Classify, HalfPlaneIsRegular) {
  const auto g = GridSpec<2>::cube(-1, 1, 256);
  const auto f = on_grid(AnalyticSolution<2>::halfplane(1.0), g);
  const auto pts = classify(f, extract_boundary(f));
  const auto counts = label_counts(pts);
  EXPECT_EQ(counts.at("sigmaH"), 0);
  EXPECT_GT(counts.at("regular"), 200);
  for (const auto& p : pts.points) {
    if (p.label != PointClass::Regular) continue;
    EXPECT_NEAR(p.M0, kPi / 2, 1e-2);
    EXPECT_NEAR(positive_density(f, p.x, 8 * g.h), 0.5, 1e-2);
  }
}

TEST(Classify, DensityGapOnResolvedPoints) {
  const auto g = GridSpec<2>::cube(-1, 1, 128);
  const double b1 = kPi, tol = 0.05 * b1;
  for (const auto& s : {AnalyticSolution<2>::wedge(0.7), AnalyticSolution<2>::halfplane(1.0),
                        AnalyticSolution<2>::abs_harmonic(Polynomial<2>::parse("xy"))}) {
    const auto f = on_grid(s, g);
    for (const auto& p : classify(f, extract_boundary(f)).points) {
      if (p.label == PointClass::Unresolved) continue;
      EXPECT_FALSE(p.M0 > tol && p.M0 < b1 / 2 - tol) << to_string(s.kind()) << ' ' << p.M0;
      if (highest_density(p.label)) {
        EXPECT_GE(p.N0, 1.0 - 1e-2);
      }
    }
  }
}

TEST(Classify, AbsHarmonicFrequencyTwoOnlyAtOrigin) {
  // Classified through the exact field: grid-sampled diagonal creases carry an
  // interpolation bias of fixed size at ladders measured in cells.
  const auto s = AnalyticSolution<2>::abs_harmonic(Polynomial<2>::parse("x2-y2"));
  std::vector<double> share;
  for (int n : {256, 512}) {
    const auto g = GridSpec<2>::cube(-1, 1, n);
    const auto pts = classify(AnalyticField<2>(s, g), extract_boundary(on_grid(s, g)));
    bool origin_seen = false;
    for (const auto& p : pts.points) {
      if (p.out_of_domain) continue;
      ASSERT_TRUE(highest_density(p.label)) << p.x.transpose();
      if (p.x.norm() > 0.1) {
        EXPECT_EQ(p.label, PointClass::SigmaH);
        EXPECT_NEAR(p.N0, 1.0, 2e-2);
      }
      if (p.x.norm() < 1e-3 * g.h + 1e-5) {
        origin_seen = true;
        EXPECT_EQ(p.label, PointClass::Degenerate);
        EXPECT_NEAR(p.N0, 2.0, 5e-2);
      }
    }
    EXPECT_TRUE(origin_seen);
    share.push_back(high_frequency_share(pts, 1.1));
  }
  EXPECT_LE(share[0], 0.05);
  EXPECT_LE(share[1], 0.6 * share[0]);
}

TEST(Classify, GridSampledAxisCreases) {
  // |xy| has its nodal lines on grid lines, so the sampled field is exact
  // along them and the labels match the exact-field ones.
  const auto s = AnalyticSolution<2>::abs_harmonic(Polynomial<2>::parse("xy"));
  const auto g = GridSpec<2>::cube(-1, 1, 128);
  const auto f = on_grid(s, g);
  const auto pts = classify(f, extract_boundary(f));
  int resolved = 0;
  for (const auto& p : pts.points) {
    if (p.out_of_domain) continue;
    ++resolved;
    EXPECT_TRUE(highest_density(p.label)) << p.x.transpose() << ' ' << p.M0;
    if (p.x.norm() > 0.2) {
      EXPECT_NEAR(p.N0, 1.0, 2e-2);
    }
  }
  EXPECT_GT(resolved, 150);
}

TEST(Classify, ThreeDimensionalWedge) {
  const auto g = GridSpec<3>::cube(-1, 1, 32);
  const auto f = on_grid(AnalyticSolution<3>::wedge(0.5), g);
  ClassifyConfig cfg;
  cfg.r_max_cells = 8.0;
  cfg.n_radii = 4;
  cfg.nu_radius_cells = 4.0;
  const auto pts = classify(f, extract_boundary(f), cfg);
  int resolved = 0;
  for (const auto& p : pts.points) {
    if (p.out_of_domain) continue;
    ++resolved;
    EXPECT_EQ(p.label, PointClass::SigmaH);
    EXPECT_NEAR(p.N0, 1.0, 2e-2);
    EXPECT_GT(std::abs(p.nu[2]), 0.999);
  }
  EXPECT_GT(resolved, 100);
  EXPECT_THROW(classify(f, extract_boundary(f), ClassifyConfig{.r_min_cells = 2.0}), ParameterError);
}

TEST(Rescale, BlowupAndRenormalize) {
  const double q = 0.4;
  const auto g = GridSpec<2>::cube(-1, 1, 256);
  const auto f = on_grid(AnalyticSolution<2>::wedge(q), g);
  const auto b = blowup(f, Vec<2>::Zero(), 0.25);
  for (double y : {-0.75, 0.3, 1.0}) EXPECT_NEAR(b.value(Vec<2>(0.1, y)), q * std::abs(y), 1e-12);
  const auto r = renormalize(f, Vec<2>::Zero(), 0.25);
  EXPECT_NEAR(r.value(Vec<2>(0.0, 0.5)), 0.5 * alpha_n(2), 1e-4);

  const auto hom = AnalyticField<2>(AnalyticSolution<2>::homogeneous_abs(2), g);
  const auto hb = blowup(hom, Vec<2>::Zero(), 0.1);
  const Vec<2> y(0.3, 0.7);
  EXPECT_NEAR(hb.value(y), 0.1 * hom.value(y), 1e-3 * 0.1);

  const auto zero = AnalyticField<2>(AnalyticSolution<2>::zero(), g);
  EXPECT_THROW(renormalize(zero, Vec<2>::Zero(), 0.25), PreconditionError);
  EXPECT_THROW(blowup(f, Vec<2>(0.9, 0.0), 0.25), OutOfDomain);
}

TEST(Deviation, WedgeExactAndHalfPlaneControl) {
  const auto g = GridSpec<2>::cube(-1, 1, 256);
  const Vec<2> e2 = Vec<2>::UnitY();
  for (double q : {0.3, 0.7}) {
    const AnalyticField<2> w(AnalyticSolution<2>::wedge(q), g);
    for (double r : {0.05, 0.2, 0.5}) {
      const auto d = deviation_functionals(w, Vec<2>::Zero(), r, e2);
      EXPECT_NEAR(d.energy_dev, 1.0, 1e-3) << q << ' ' << r;
      EXPECT_NEAR(d.profile_dev, 0.0, 1e-3);
    }
  }
  const AnalyticField<2> hp(AnalyticSolution<2>::halfplane(1.0), g);
  for (double r : {0.05, 0.2, 0.5}) {
    const auto d = deviation_functionals(hp, Vec<2>::Zero(), r, e2);
    EXPECT_LT(d.energy_dev, 0.1);
    EXPECT_GT(d.profile_dev, 0.1);
  }
  EXPECT_THROW(deviation_functionals(hp, Vec<2>::Zero(), 0.2, Vec<2>::Zero()), ParameterError);
}

TEST(MeasureIdentity, WedgeAndHalfPlane) {
  const auto g = GridSpec<2>::cube(-1, 1, 256);
  const std::vector<double> radii{0.1, 0.2, 0.3, 0.4};
  for (const auto& s : {AnalyticSolution<2>::wedge(0.4), AnalyticSolution<2>::halfplane(1.0)}) {
    const auto f = on_grid(s, g);
    const auto pts = classify(f, extract_boundary(f));
    const auto mp = measure_profile(f, Vec<2>::Zero(), pts, radii);
    EXPECT_TRUE(mp.measured_monotone);
    for (const auto& r : mp.rungs) {
      EXPECT_FALSE(r.contaminated);
      EXPECT_LE(r.mismatch, 0.03) << to_string(s.kind()) << ' ' << r.r;
      EXPECT_NEAR(r.measured, exact_laplacian_mass(s, Vec<2>::Zero(), r.r), 0.03 * r.measured);
    }
  }
}

TEST(MeasureIdentity, AbsHarmonicAgainstNodalLineOracle) {
  const auto s = AnalyticSolution<2>::abs_harmonic(Polynomial<2>::parse("x2-y2"));
  const auto g = GridSpec<2>::cube(-1, 1, 256);
  const AnalyticField<2> af(s, g);
  const auto pts = classify(af, extract_boundary(on_grid(s, g)));
  const auto mp = measure_profile(af, Vec<2>::Zero(), pts, {0.1, 0.2, 0.3, 0.4});
  for (const auto& r : mp.rungs) {
    const double oracle = nodal_line_mass(s.polynomial(), Vec<2>::Zero(), r.r);
    EXPECT_NEAR(r.measured, oracle, 0.05 * oracle);
    EXPECT_NEAR(r.predicted, oracle, 0.05 * oracle);
  }
}

TEST(MeasureIdentity, UnresolvedPointsContaminate) {
  const auto g = GridSpec<2>::cube(-1, 1, 128);
  const auto f = on_grid(AnalyticSolution<2>::wedge(0.4), g);
  auto pts = classify(f, extract_boundary(f));
  pts.points[pts.points.size() / 2].label = PointClass::Unresolved;
  const auto mp = measure_profile(f, Vec<2>::Zero(), pts, {0.2});
  EXPECT_TRUE(mp.rungs[0].contaminated);
  EXPECT_THROW(measure_profile(f, Vec<2>::Zero(), extract_boundary(f), {0.2}), PreconditionError);
}

TEST(MeasureIdentity, ThreeDimensionalWedge) {
  const double q = 0.5;
  const auto g = GridSpec<3>::cube(-1, 1, 32);
  const auto f = on_grid(AnalyticSolution<3>::wedge(q), g);
  ClassifyConfig cfg;
  cfg.r_max_cells = 8.0;
  cfg.n_radii = 4;
  auto pts = classify(f, extract_boundary(f), cfg);
  // Out-of-domain points sit outside the measured ball; give them their exact label.
  for (auto& p : pts.points) {
    if (!p.out_of_domain) continue;
    p.label = PointClass::SigmaH;
    p.H0 = q * q * unit_ball_volume(3);
  }
  const auto mp = measure_profile(f, Vec<3>::Zero(), pts, {0.3, 0.5});
  for (const auto& r : mp.rungs) EXPECT_LE(r.mismatch, 0.03) << r.r;
}

TEST(Emit, CsvAndJson) {
  const auto g = GridSpec<2>::cube(-1, 1, 64);
  const auto f = on_grid(AnalyticSolution<2>::wedge(0.4), g);
  const auto pts = classify(f, extract_boundary(f));
  std::ostringstream os;
  write_boundary_csv(os, pts);
  const std::string text = os.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "x,y,u,measure,M0,N0,H0,H_limit,label,nu_x,nu_y");
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), pts.points.size() + 1);
  EXPECT_NE(text.find("sigmaH"), std::string::npos);
  const auto j = to_json(measure_profile(f, Vec<2>::Zero(), pts, {0.2, 0.3}));
  EXPECT_EQ(j["rungs"].size(), 2u);
  const auto sum = boundary_summary(pts);
  EXPECT_EQ(sum["counts"]["regular"], 0);
  EXPECT_EQ(sum["points"], pts.points.size());
}
