#pragma once

// The acceptance suite: twelve property and oracle checks, each returning one
// pass/fail verdict with the measured numbers behind it.

#include "fbscope/cli/commands.hpp"
#include "fbscope/geometry/probes.hpp"
#include "fbscope/singular_perturb/shoot.hpp"

#include <functional>
#include <numbers>
#include <random>

#include <unistd.h>

namespace fbscope::acceptance {

using nlohmann::json;

struct Options {
  std::uint64_t seed = 0;
  double tol_scale = 1.0;  // multiplies every tolerance; 1e-3 provokes failures
};

struct Result {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string summary;
  json metrics = json::object();
};

namespace detail {

inline constexpr double kPi = std::numbers::pi;

template <int Dim>
ScalarField<Dim> grid_of(const std::string& grammar, const GridSpec<Dim>& g) {
  return parse_solution<Dim>(grammar).sample(g);
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline double rel(double a, double e) { return std::abs(a - e) / std::max(std::abs(e), 1e-300); }

// Converged solver outputs shared by the monotonicity battery and the
// singular-perturbation checks.
struct SolverCase {
  std::string name;
  BetaSpec beta;
  Dirichlet<2> data;
  SolveResult<2> result;
};

class SolverCorpus {
 public:
  const std::vector<SolverCase>& cases() {
    if (cases_.empty()) build();
    return cases_;
  }

 private:
  void build() {
    const auto g = GridSpec<2>::cube(-1, 1, 128);
    const std::vector<double> ladder{0.2, 0.1, 0.05};
    const Dirichlet<2> wedge = [](const Vec<2>& p) { return std::abs(p[1]); };
    const auto w = continuation<2>(g, default_beta(0.2), wedge, ladder);
    for (const auto& r : w.rungs) cases_.push_back({"wedge_eps" + fmt(r.epsilon), default_beta(r.epsilon), wedge, r});

    const double q = 0.8;
    const Dirichlet<2> pinched = [q](const Vec<2>& p) { return q * std::abs(p[1]); };
    const auto pinch = symmetric_pinch_1d(default_beta(0.2), 1.0, q);
    const auto init = ScalarField<2>::sample(
        g, [&](const Vec<2>& p) { return std::max(0.0, pinch.value(std::abs(p[1]))); },
        [](const Vec<2>&) { return 1.0; });
    const auto pc = continuation<2>(g, default_beta(0.2), pinched, ladder, {}, &init);
    for (const auto& r : pc.rungs)
      cases_.push_back({"pinched_eps" + fmt(r.epsilon), default_beta(r.epsilon), pinched, r});

    const Dirichlet<2> bent = [](const Vec<2>& p) { return std::abs(p[1]) + 0.1 * p[0] * p[0]; };
    cases_.push_back({"bent_eps0.2", default_beta(0.2), bent, solve<2>(g, default_beta(0.2), bent)});
  }

  std::vector<SolverCase> cases_;
};

// Boundary measure of the nodal set of v for an |v| solution: the boundary of
// {v > 0} is extracted, so curved nodal lines that miss the lattice nodes are
// still found.
template <int Dim>
DiscreteMeasure<Dim> nodal_measure(const AnalyticSolution<Dim>& sol, const GridSpec<Dim>& g) {
  const auto& v = sol.polynomial();
  const auto pts = extract_boundary(ScalarField<Dim>::sample(
      g, [&](const Vec<Dim>& p) { return std::max(0.0, v(p)); }, [](const Vec<Dim>&) { return 1.0; }));
  std::vector<Vec<Dim>> p;
  std::vector<double> w;
  for (const auto& b : pts.points)
    if (b.measure > 0.0) {
      p.push_back(b.x);
      w.push_back(b.measure);
    }
  if (p.empty()) throw PreconditionError("nodal_measure: empty nodal set");
  return {std::move(p), std::move(w)};
}

template <int Dim>
Vec<Dim> nearest(const DiscreteMeasure<Dim>& mu, const Vec<Dim>& target) {
  Vec<Dim> x = mu.points().front();
  for (const auto& y : mu.points())
    if ((y - target).norm() < (x - target).norm()) x = y;
  return x;
}

}  // namespace detail

class Suite {
 public:
  explicit Suite(Options opt = {}) : opt_(opt) {}

  static const std::vector<std::pair<int, std::string>>& catalogue() {
    static const std::vector<std::pair<int, std::string>> c{
        {1, "constant_identity"},     {2, "wedge_suite"},          {3, "half_plane_suite"},
        {4, "measure_identity"},      {5, "monotonicity_battery"}, {6, "frequency_one_prevalence"},
        {7, "beta_oracle"},           {8, "subspace_inequality"},  {9, "covering_behavior"},
        {10, "singular_perturbation"}, {11, "variational_gate"},    {12, "determinism"}};
    return c;
  }

  Result run(int id) {
    Result r;
    r.id = id;
    for (const auto& [k, name] : catalogue())
      if (k == id) r.name = name;
    if (r.name.empty()) throw cli::ConfigError("unknown criterion id " + std::to_string(id));
    try {
      switch (id) {
        case 1: c1(r); break;
        case 2: c2(r); break;
        case 3: c3(r); break;
        case 4: c4(r); break;
        case 5: c5(r); break;
        case 6: c6(r); break;
        case 7: c7(r); break;
        case 8: c8(r); break;
        case 9: c9(r); break;
        case 10: c10(r); break;
        case 11: c11(r); break;
        case 12: c12(r); break;
      }
    } catch (const cli::ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      r.pass = false;
      r.summary = std::string("exception: ") + e.what();
    }
    return r;
  }

 private:
  double tol(double t) const { return t * opt_.tol_scale; }

  // alpha_n² |B_1| = 1.
  void c1(Result& r) {
    double worst = 0.0;
    for (int d : {2, 3}) {
      const double v = alpha_n(d) * alpha_n(d) * unit_ball_volume(d);
      r.metrics["dim" + std::to_string(d)] = v;
      worst = std::max(worst, std::abs(v - 1.0));
    }
    r.pass = worst <= tol(1e-10);
    r.summary = "max |alpha^2 |B1| - 1| = " + detail::fmt(worst);
  }

  // Grid sample() against closed forms for two wedges.
  void c2(Result& r) {
    const auto g = GridSpec<2>::cube(-1, 1, 256);
    const auto radii = geometric_radii(4 * g.h, 0.5, 8);
    double worst_rel = 0.0, worst_n = 0.0, worst_m = 0.0;
    for (double q : {0.3, 0.7}) {
      const auto sol = AnalyticSolution<2>::wedge(q);
      const auto f = sol.sample(g);
      for (double rr : radii) {
        const auto a = sample(f, Vec<2>::Zero(), rr);
        const auto e = exact_functionals(sol, Vec<2>::Zero(), rr);
        for (auto [x, y] : {std::pair{a.D, e.D}, {a.H, e.H}, {a.M, e.M}, {a.N, e.N}})
          worst_rel = std::max(worst_rel, detail::rel(x, y));
        worst_n = std::max(worst_n, std::abs(a.N - 1.0));
        worst_m = std::max(worst_m, detail::rel(a.M, detail::kPi));
      }
    }
    r.metrics = {{"max_rel_vs_exact", worst_rel}, {"max_abs_N_minus_1", worst_n}, {"max_rel_M_vs_B1", worst_m}};
    r.pass = worst_rel <= tol(1e-2) && worst_n <= tol(1e-2) && worst_m <= tol(1e-2);
    r.summary = "rel vs exact " + detail::fmt(worst_rel) + ", |N-1| " + detail::fmt(worst_n) + ", M rel " +
                detail::fmt(worst_m);
  }

  // Half-plane: M = |B_1|/2 and every resolved point regular.
  void c3(Result& r) {
    const auto g = GridSpec<2>::cube(-1, 1, 256);
    const auto f = detail::grid_of<2>("halfplane:a=1", g);
    double worst = 0.0;
    for (const Vec<2>& x : {Vec<2>(0.0, 0.0), Vec<2>(0.25, 0.0), Vec<2>(-0.3, 0.0)})
      for (const auto& s : profile(f, x, 4 * g.h, 0.5, 8).samples) worst = std::max(worst, std::abs(s.M - detail::kPi / 2));
    const auto pts = classify(f, extract_boundary(f));
    const auto counts = label_counts(pts);
    int bad = 0, in_band = 0;
    const double b1 = detail::kPi, band = 0.05 * b1;
    for (const auto& p : pts.points) {
      if (p.label == PointClass::Unresolved) continue;
      if (p.label != PointClass::Regular) ++bad;
      if (p.M0 > band && p.M0 < b1 / 2 - band) ++in_band;
    }
    r.metrics = {{"max_abs_M_minus_half_B1", worst}, {"labels", counts}, {"non_regular_resolved", bad},
                 {"forbidden_band", in_band}};
    r.pass = worst <= tol(1e-2) && bad == 0 && in_band == 0 && counts.at("regular") > 0;
    r.summary = "|M - pi/2| " + detail::fmt(worst) + ", " + std::to_string(counts.at("regular")) + " regular, " +
                std::to_string(bad) + " other resolved";
  }

  // Δu(B_r) against 2α√H0 × boundary measure, and against the nodal-line oracle.
  void c4(Result& r) {
    const auto g = GridSpec<2>::cube(-1, 1, 512);
    const std::vector<double> radii{0.1, 0.2, 0.3, 0.4};
    const auto wedge = AnalyticSolution<2>::wedge(0.4);
    const auto wf = wedge.sample(g);
    const auto wp = measure_profile(wf, Vec<2>::Zero(), classify(wf, extract_boundary(wf)), radii);
    double w_worst = 0.0;
    bool contaminated = false;
    for (const auto& rung : wp.rungs) {
      contaminated = contaminated || rung.contaminated;
      w_worst = std::max(w_worst, std::isfinite(rung.mismatch) ? rung.mismatch : -kNegInf);
    }
    const auto cross = AnalyticSolution<2>::abs_harmonic(Polynomial<2>::parse("x2-y2"));
    const AnalyticField<2> af(cross, g);
    const auto cp = measure_profile(af, Vec<2>::Zero(), classify(af, extract_boundary(cross.sample(g))), radii);
    double c_worst = 0.0;
    json rungs = json::array();
    for (const auto& rung : cp.rungs) {
      const double oracle = nodal_line_mass(cross.polynomial(), Vec<2>::Zero(), rung.r);
      const double em = detail::rel(rung.measured, oracle), ep = detail::rel(rung.predicted, oracle);
      c_worst = std::max({c_worst, em, ep});
      rungs.push_back({{"r", rung.r}, {"oracle", oracle}, {"measured", rung.measured}, {"predicted", rung.predicted}});
    }
    r.metrics = {{"wedge_max_mismatch", w_worst}, {"wedge_contaminated", contaminated},
                 {"cross_max_rel_vs_oracle", c_worst}, {"cross_rungs", rungs}};
    r.pass = !contaminated && w_worst <= tol(0.03) && c_worst <= tol(0.05);
    r.summary = "wedge mismatch " + detail::fmt(w_worst) + ", |x2-y2| vs nodal oracle " + detail::fmt(c_worst);
  }

  // M and certified N nondecreasing on every corpus field; derivative identities on a refinement ladder.
  void c5(Result& r) {
    const auto g = GridSpec<2>::cube(-1, 1, 256);
    struct Item {
      std::string name;
      std::function<RadialProfile<2>(const Vec<2>&, double, double)> prof;
      double h;
    };
    std::vector<Item> corpus;
    const auto add_grid = [&](const std::string& grammar) {
      auto f = std::make_shared<ScalarField<2>>(detail::grid_of<2>(grammar, g));
      corpus.push_back({grammar, [f](const Vec<2>& x, double a, double b) { return profile(*f, x, a, b, 8); }, g.h});
    };
    const auto add_exact = [&](const std::string& grammar) {
      auto f = std::make_shared<AnalyticField<2>>(parse_solution<2>(grammar), g);
      corpus.push_back(
          {grammar + " (exact)", [f](const Vec<2>& x, double a, double b) { return profile(*f, x, a, b, 8); }, g.h});
    };
    for (const char* s : {"wedge:q=0.3", "wedge:q=0.5", "wedge:q=0.7", "wedge1:q=0.5", "halfplane:a=1",
                          "absharm:v=x2-y2", "absharm:v=xy", "homabs:k=2",
                          "absharm:v=y+0.2*x*y"})
      add_grid(s);
    // Curved or slanted creases miss the lattice nodes; these go through the closed form.
    add_exact("absharm:v=y+0.1*x2-0.1*y2");
    add_exact("halfplane:a=1,nu=0.6;0.8");
    add_exact("homabs:k=3");
    add_exact("absharm:v=x2-y2");
    for (const auto& c : solver_.cases()) {
      if (!c.result.converged) continue;
      auto f = std::make_shared<ScalarField<2>>(c.result.field);
      corpus.push_back(
          {"solver " + c.name, [f](const Vec<2>& x, double a, double b) { return profile(*f, x, a, b, 8); },
           c.result.field.spec().h});
    }
    const std::vector<Vec<2>> centers{Vec<2>::Zero(), Vec<2>(0.3, 0.0), Vec<2>(-0.2, 0.2)};
    int profiles = 0, m_fail = 0, n_fail = 0, n_certified = 0;
    json failures = json::array();
    for (const auto& item : corpus) {
      for (const auto& x : centers) {
        const auto p = item.prof(x, 4 * item.h, 0.4);
        ++profiles;
        if (p.certified_from >= 0) ++n_certified;
        if (!p.m_monotone) ++m_fail;
        if (!p.n_monotone) ++n_fail;
        if (!p.m_monotone || !p.n_monotone)
          failures.push_back({{"field", item.name}, {"x", json_point<2>(x)}, {"m", p.m_monotone}, {"n", p.n_monotone}});
      }
    }
    // Derivative identities on 128² → 256² → 512².
    json ladder = json::array();
    bool deriv_ok = true;
    for (const char* grammar : {"homabs:k=2", "absharm:v=y+0.2*x*y"}) {
      std::vector<double> mres, nres;
      double worst_rel = 0.0;
      for (int n : {128, 256, 512}) {
        const auto f = detail::grid_of<2>(grammar, GridSpec<2>::cube(-1, 1, n));
        const auto m = m_derivative_check(f, Vec<2>::Zero(), 0.4);
        const auto c = n_derivative_check(f, Vec<2>::Zero(), 0.4);
        mres.push_back(m.residual);
        nres.push_back(c.residual);
        worst_rel = std::max({worst_rel, m.relative, c.relative});
        ladder.push_back({{"field", grammar}, {"cells", n}, {"m_residual", m.residual}, {"m_relative", m.relative},
                          {"n_residual", c.residual}, {"n_relative", c.relative}});
      }
      const bool decreasing = mres[1] < mres[0] && mres[2] < mres[1] && nres[1] < nres[0] && nres[2] < nres[1];
      deriv_ok = deriv_ok && decreasing && worst_rel <= tol(0.1);
    }
    // Not gated: sampling a slanted kink biases M upward by O(h/r), which the
    // quadrature slack does not cover.
    const auto slanted = profile(detail::grid_of<2>("halfplane:a=1,nu=0.6;0.8", g), Vec<2>::Zero(), 4 * g.h, 0.4, 8);
    r.metrics["slanted_half_plane_sampled"] = {{"m_monotone", slanted.m_monotone},
                                               {"M_minus_half_B1_at_r_min", slanted.samples.front().M - detail::kPi / 2}};
    r.metrics.update({{"fields", corpus.size()}, {"profiles", profiles}, {"certified_profiles", n_certified},
                 {"m_failures", m_fail}, {"n_failures", n_fail}, {"failures", failures}, {"derivative_ladder", ladder}});
    r.pass = corpus.size() >= 12 && m_fail == 0 && n_fail == 0 && deriv_ok;
    r.summary = std::to_string(corpus.size()) + " fields, " + std::to_string(profiles) + " profiles, " +
                std::to_string(m_fail) + " M / " + std::to_string(n_fail) + " N monotonicity failures, derivative ladder " +
                (deriv_ok ? "ok" : "failed");
  }

  // Share of high-frequency Σ^H boundary measure on |x²−y²|, 512² then 1024².
  void c6(Result& r) {
    const auto sol = AnalyticSolution<2>::abs_harmonic(Polynomial<2>::parse("x2-y2"));
    std::vector<double> share;
    for (int n : {512, 1024}) {
      const auto g = GridSpec<2>::cube(-1, 1, n);
      const auto pts = classify(AnalyticField<2>(sol, g), extract_boundary(sol.sample(g)));
      share.push_back(high_frequency_share(pts, 1.1));
    }
    r.metrics = {{"share_512", share[0]}, {"share_1024", share[1]}};
    r.pass = share[0] <= tol(0.02) && share[1] <= 0.5 * share[0] * opt_.tol_scale;
    r.summary = "share 512^2 " + detail::fmt(share[0]) + ", 1024^2 " + detail::fmt(share[1]);
  }

  // Eigen β² against brute force; hyperplane measures exactly zero.
  void c7(Result& r) {
    std::mt19937_64 rng(opt_.seed);
    std::uniform_real_distribution<double> U(-0.5, 0.5), W(0.2, 2.0);
    // At least n + 2 points, so random clouds are not degenerate.
    std::uniform_int_distribution<int> count(5, 40);
    double worst = 0.0;
    const auto cloud = [&]<int Dim>(bool flat) {
      const int n = count(rng);
      std::vector<Vec<Dim>> p(n);
      std::vector<double> w(n);
      for (int i = 0; i < n; ++i) {
        for (int d = 0; d < Dim; ++d) p[i][d] = U(rng);
        if (flat) p[i][Dim - 1] = 0.125;
        w[i] = W(rng);
      }
      return DiscreteMeasure<Dim>(std::move(p), std::move(w));
    };
    for (int k = 0; k < 100; ++k) {
      const auto m2 = cloud.template operator()<2>(false);
      const double e2 = beta_number(m2, Vec<2>::Zero(), 1.0).beta2;
      worst = std::max(worst, detail::rel(e2, beta_number_bruteforce(m2, Vec<2>::Zero(), 1.0, 10000)));
      const auto m3 = cloud.template operator()<3>(false);
      const double e3 = beta_number(m3, Vec<3>::Zero(), 1.0).beta2;
      worst = std::max(worst, detail::rel(e3, beta_number_bruteforce(m3, Vec<3>::Zero(), 1.0, 10000)));
    }
    int nonzero = 0;
    for (int k = 0; k < 20; ++k) {
      if (beta_number(cloud.template operator()<2>(true), Vec<2>::Zero(), 1.0).beta2 != 0.0) ++nonzero;
      if (beta_number(cloud.template operator()<3>(true), Vec<3>::Zero(), 1.0).beta2 != 0.0) ++nonzero;
    }
    r.metrics = {{"max_rel", worst}, {"flat_nonzero", nonzero}, {"measures_per_dim", 100}};
    r.pass = worst <= tol(1e-4) && nonzero == 0;
    r.summary = "max rel " + detail::fmt(worst) + ", flat measures with nonzero beta: " + std::to_string(nonzero);
  }

  // β²(x, r) ≤ C·r^{1−n}∫[N(20r) − N(r)]dμ + 1e-8 with C fitted on half the instances.
  void c8(Result& r) {
    struct Instance {
      std::string field;
      SubspaceProbe probe;
    };
    std::vector<Instance> inst;
    for (const char* s : {"wedge:q=0.5", "absharm:v=x2-y2", "absharm:v=xy", "homabs:k=3", "absharm:v=y+0.1*x2-0.1*y2"}) {
      const auto sol = parse_solution<2>(s);
      const auto mu = detail::nodal_measure<2>(sol, GridSpec<2>::cube(-1, 1, 256));
      const auto orc = analytic_oracle<2>(sol);
      for (const Vec<2>& target : {Vec<2>(0.0, 0.0), Vec<2>(0.3, 0.3), Vec<2>(-0.25, 0.1), Vec<2>(0.05, -0.05)}) {
        const Vec<2> x = detail::nearest(mu, target);
        for (double rr : {0.04, 0.08, 0.16}) inst.push_back({s, subspace_inequality_probe(mu, orc, x, rr)});
      }
    }
    {
      const auto sol = parse_solution<3>("absharm:v=x2-z2");
      const auto mu = detail::nodal_measure<3>(sol, GridSpec<3>::cube(-1, 1, 48));
      const auto orc = analytic_oracle<3>(sol);
      for (const Vec<3>& target : {Vec<3>(0.0, 0.0, 0.0), Vec<3>(0.3, 0.1, 0.3)})
        for (double rr : {0.1, 0.2})
          inst.push_back({"absharm:v=x2-z2", subspace_inequality_probe(mu, orc, detail::nearest(mu, target), rr)});
    }
    double C = 0.0;
    int calibration = 0, holdout = 0, holdout_fail = 0, zero_rhs = 0, zero_fail = 0, contaminated = 0, k = 0;
    for (const auto& i : inst)
      if (i.probe.rhs > 0.0 && (k++ % 2 == 0)) {
        C = std::max(C, i.probe.ratio());
        ++calibration;
      }
    k = 0;
    double worst_excess = 0.0;
    for (const auto& i : inst) {
      if (i.probe.contaminated) ++contaminated;
      if (i.probe.rhs == 0.0) {
        ++zero_rhs;
        if (i.probe.lhs > tol(1e-6)) ++zero_fail;
        continue;
      }
      if (k++ % 2 == 0) continue;
      ++holdout;
      const double excess = i.probe.lhs - (C * i.probe.rhs + tol(1e-8));
      worst_excess = std::max(worst_excess, excess);
      if (excess > 0.0) ++holdout_fail;
    }
    // Negative control outside the realizable class: a triangle under N ≡ 2.
    const auto simplex = DiscreteMeasure<2>::uniform({Vec<2>(0.1, 0.0), Vec<2>(-0.1, 0.05), Vec<2>(0.0, -0.1)});
    const auto ctrl = subspace_inequality_probe(simplex, synthetic_constant<2>(2.0), Vec<2>::Zero(), 0.5);
    r.metrics = {{"instances", inst.size()},       {"C", C},
                 {"calibration", calibration},     {"holdout", holdout},
                 {"holdout_failures", holdout_fail}, {"worst_excess", worst_excess},
                 {"rhs_zero", zero_rhs},           {"rhs_zero_failures", zero_fail},
                 {"contaminated", contaminated},   {"synthetic_control_violated", ctrl.violated}};
    r.pass = calibration > 0 && holdout > 0 && holdout_fail == 0 && zero_fail == 0 && zero_rhs > 0 && ctrl.violated;
    r.summary = std::to_string(inst.size()) + " instances, C = " + detail::fmt(C) + ", hold-out failures " +
                std::to_string(holdout_fail) + ", rhs = 0 failures " + std::to_string(zero_fail);
  }

  // Covering: wedge root terminal; |x²−y²| non-terminal counts; packing; budget.
  void c9(Result& r) {
    std::vector<Vec<2>> seg;
    for (int i = -50; i <= 50; ++i) seg.emplace_back(0.01 * i, 0.0);
    const auto wedge = covering_tree<2>(seg, analytic_oracle<2>(AnalyticSolution<2>::wedge(0.4)), Vec<2>::Zero(), 0.5,
                                        CoveringConfig{});
    const bool wedge_ok = wedge.nodes.size() == 1 && wedge.nodes[0].status == NodeStatus::Terminal;

    std::vector<Vec<2>> cross{Vec<2>::Zero()};
    for (double t = 1e-9; t <= 1.0; t *= 1.01)
      for (int s = 0; s < 4; ++s) {
        const double a = detail::kPi / 4 + s * detail::kPi / 2;
        cross.push_back(t * Vec<2>(std::cos(a), std::sin(a)));
      }
    const auto orc = analytic_oracle<2>(AnalyticSolution<2>::abs_harmonic(Polynomial<2>::parse("x2-y2")));
    CoveringConfig cfg;
    cfg.r_stop = 1e-6;
    const auto a = covering_tree<2>(cross, orc, Vec<2>::Zero(), 1.0, cfg);
    cfg.r_stop *= 0.5;
    const auto b = covering_tree<2>(cross, orc, Vec<2>::Zero(), 1.0, cfg);
    json per_gen = json::array();
    for (const auto& gs : a.generations) per_gen.push_back(gs.nonterminal);
    const int max_nt = a.max_nonterminal_per_generation();
    const double packing_change = detail::rel(b.packing_n1, a.packing_n1);

    CoveringConfig sc;
    sc.delta1 = 0.125;
    sc.eps = 0.125;
    sc.r_stop = 1e-9;
    std::vector<Vec<2>> line;
    for (int i = -20000; i <= 20000; ++i) line.emplace_back(5e-5 * i, 0.0);
    const auto stair = covering_tree<2>(
        line, synthetic_staircase<2>(Vec<2>::UnitY(), 0.0, 1.0 + 2 * sc.delta1, sc.eps, 1.0, sc.delta2), Vec<2>::Zero(),
        1.0, sc);
    const auto flat = covering_tree<2>(line, synthetic_plane<2>(Vec<2>::UnitY(), 0.0, 1.5, 1.0), Vec<2>::Zero(), 1.0, sc);
    bool budget_ok = true;
    json budgets = json::array();
    for (const auto* rep : {&wedge, &a, &b, &stair, &flat}) {
      budget_ok = budget_ok && rep->budget_ok && rep->drop_violations == 0;
      budgets.push_back({{"bound", rep->budget}, {"max_large_drops", rep->max_large_drops}, {"ok", rep->budget_ok}});
    }
    r.metrics = {{"wedge_single_terminal_root", wedge_ok}, {"cross_nonterminal_per_generation", per_gen},
                 {"cross_max_nonterminal", max_nt},       {"packing_r_stop", a.packing_n1},
                 {"packing_half_r_stop", b.packing_n1},   {"packing_rel_change", packing_change},
                 {"budgets", budgets},                    {"sound", covering_sound(a, cross) && covering_sound(stair, line)}};
    const bool count_ok = max_nt <= 3;
    r.pass = wedge_ok && count_ok && packing_change <= tol(0.2) && budget_ok;
    r.summary = std::string("wedge root ") + (wedge_ok ? "terminal" : "NOT terminal") +
                ", |x2-y2| max non-terminal per generation " + std::to_string(max_nt) + " (bound 3), packing change " +
                detail::fmt(packing_change) + ", budget " + (budget_ok ? "holds" : "violated");
  }

  // Solver vs shooting oracle; domain-variation residual; uniform gradient bound.
  void c10(Result& r) {
    const double eps = 0.25;
    const auto b = default_beta(eps);
    const auto oracle = shoot_1d_bvp(b, -1.0, 1.0, 1.0, 0.0);
    const Dirichlet<2> data = [&](const Vec<2>& p) { return std::max(0.0, oracle.value(p[1])); };
    json shoot = json::array();
    bool shoot_ok = true;
    std::vector<std::pair<SolveResult<2>, std::pair<BetaSpec, Dirichlet<2>>>> converged;
    for (int n : {64, 128, 256}) {
      const auto g = GridSpec<2>::cube(-1, 1, n);
      auto res = solve<2>(g, b, data);
      double e = 0.0;
      for (std::size_t i = 0; i < g.node_count(); ++i)
        e = std::max(e, std::abs(res.field.values()[i] - oracle.value(g.node(g.multi_index(i))[1])));
      const double bound = 5 * g.h * g.h + 1e-8;
      shoot_ok = shoot_ok && res.converged && e <= bound * opt_.tol_scale;
      shoot.push_back({{"cells", n}, {"sup_error", e}, {"bound", bound}, {"converged", res.converged}});
      if (res.converged && n <= 128) converged.push_back({std::move(res), {b, data}});
    }
    double grad_sup = 0.0;
    int unconverged = 0;
    for (const auto& c : solver_.cases()) {
      if (!c.result.converged) {
        ++unconverged;
        continue;
      }
      if (c.name.rfind("bent", 0) != 0) grad_sup = std::max(grad_sup, interior_gradient_sup(c.result.field));
      converged.push_back({c.result, {c.beta, c.data}});
    }
    json dv = json::array();
    bool dv_ok = true;
    TestFieldSpec spec;
    spec.seed = opt_.seed;
    for (const auto& [res, bd] : converged) {
      const auto v = domain_variation_residual(res, bd.first, bd.second, spec);
      const bool ok = v.residual <= tol(1e-6) + v.quad_tol;
      dv_ok = dv_ok && ok;
      dv.push_back({{"epsilon", res.epsilon}, {"cells", res.field.spec().cells[0]}, {"residual", v.residual},
                    {"quad_tol", v.quad_tol}, {"ok", ok}});
    }
    r.metrics = {{"shooting", shoot}, {"domain_variation", dv}, {"gradient_sup", grad_sup},
                 {"ladder_unconverged", unconverged}};
    r.pass = shoot_ok && dv_ok && unconverged == 0 && grad_sup <= 1.15 + tol(0.0);
    r.summary = std::string("shooting ") + (shoot_ok ? "ok" : "failed") + ", domain variation on " +
                std::to_string(dv.size()) + " solves " + (dv_ok ? "ok" : "failed") + ", sup|grad u| " +
                detail::fmt(grad_sup);
  }

  // Variational residual gate at 512².
  void c11(Result& r) {
    const auto g = GridSpec<2>::cube(-1, 1, 512);
    TestFieldSpec spec;
    spec.seed = opt_.seed;
    const double gate = tol(1e-3);
    const double w = variational_residual(detail::grid_of<2>("wedge:q=0.5", g), spec).residual;
    const double c = variational_residual(detail::grid_of<2>("absharm:v=x2-y2", g), spec).residual;
    const double t = variational_residual(detail::grid_of<2>("twoslope:ap=1,am=0.5", g), spec).residual;
    // Diagnostics for the diagonal crease: the same function on the 256²
    // lattice, through the closed form on the 512² lattice, and rotated onto
    // the axes as |xy|.
    const auto cross = parse_solution<2>("absharm:v=x2-y2");
    const double c256 = variational_residual(cross.sample(GridSpec<2>::cube(-1, 1, 256)), spec).residual;
    const double c_exact = variational_residual(AnalyticField<2>(cross, g), spec).residual;
    const double rotated = variational_residual(detail::grid_of<2>("absharm:v=xy", g), spec).residual;
    r.metrics = {{"gate", gate},
                 {"wedge", w},
                 {"abs_x2_minus_y2", c},
                 {"two_slope", t},
                 {"abs_x2_minus_y2_256", c256},
                 {"abs_x2_minus_y2_closed_form_512", c_exact},
                 {"abs_xy_512", rotated}};
    r.pass = w <= gate && c <= gate && t >= 10.0 * gate;
    r.summary = "wedge " + detail::fmt(w) + ", |x2-y2| " + detail::fmt(c) + ", two-slope " + detail::fmt(t) +
                " (gate " + detail::fmt(gate) + ")";
  }

  void c12(Result& r);

  Options opt_;
  detail::SolverCorpus solver_;
};

// ---------------------------------------------------------------------------
// verify

inline std::vector<int> criteria_from(const cli::RunConfig& cfg) {
  std::vector<int> ids;
  if (!cfg.has("verify.criteria")) {
    for (const auto& [id, name] : Suite::catalogue()) ids.push_back(id);
    return ids;
  }
  for (double v : cfg.list("verify.criteria")) {
    if (v != std::floor(v) || v < 1 || v > static_cast<double>(Suite::catalogue().size()))
      throw cli::ConfigError("verify.criteria: unknown criterion " + detail::fmt(v));
    ids.push_back(static_cast<int>(v));
  }
  if (ids.empty()) throw cli::ConfigError("verify.criteria is empty");
  return ids;
}

inline json to_json(const Result& r) {
  return {{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"summary", r.summary}, {"metrics", r.metrics}};
}

/// Runs the selected criteria and writes verify.json.  Returns exit code 1
/// when any criterion fails.
inline int cmd_verify(const cli::Context& ctx,
                      const std::function<void(const Result&)>& on_result = {}) {
  const auto ids = criteria_from(ctx.cfg);
  Options opt;
  opt.seed = ctx.seed;
  opt.tol_scale = ctx.cfg.num("verify.tol_scale", 1.0);
  if (!(opt.tol_scale > 0.0)) throw cli::ConfigError("verify.tol_scale must be positive");
  Suite suite(opt);
  json j;
  j["meta"] = cli::meta(ctx);
  j["tol_scale"] = opt.tol_scale;
  j["criteria"] = json::array();
  json failed = json::array();
  for (int id : ids) {
    const auto r = suite.run(id);
    if (on_result) on_result(r);
    j["criteria"].push_back(to_json(r));
    if (!r.pass) failed.push_back(id);
  }
  j["all_pass"] = failed.empty();
  j["failed"] = failed;
  cli::write_json(ctx.out / "verify.json", j);
  if (!failed.empty()) {
    *ctx.log << "verify: failing criteria:";
    for (const auto& id : failed) *ctx.log << ' ' << id.get<int>();
    *ctx.log << '\n';
    return cli::kExitAcceptance;
  }
  return cli::kExitOk;
}

namespace detail {

inline std::map<std::string, std::string> read_tree(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream is(e.path(), std::ios::binary);
    out[std::filesystem::relative(e.path(), root).string()] =
        std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
  }
  return out;
}

}  // namespace detail

// Every command twice into sibling directories, then a byte comparison.
inline void Suite::c12(Result& r) {
  const auto base = std::filesystem::temp_directory_path() /
                    ("fbscope_determinism_" + std::to_string(opt_.seed) + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(base);
  std::ostringstream sink;
  const auto run_all = [&](const std::filesystem::path& out) {
    const auto make = [&](const std::string& command, std::initializer_list<std::pair<const char*, const char*>> kv) {
      cli::Context c;
      c.command = command;
      c.seed = opt_.seed;
      c.out = out / command;
      c.log = &sink;
      for (const auto& [k, v] : kv) c.cfg.set(k, v);
      return c;
    };
    int code = 0;
    code |= cli::cmd_solve(make("solve", {{"solver.data", "absharm:v=y"}, {"field.cells", "32"},
                                          {"solver.ladder", "0.2,0.1"}}));
    code |= cli::cmd_functionals(make("functionals", {{"field.analytic", "absharm:v=x2-y2"}, {"field.cells", "128"},
                                                      {"functionals.centers", "0,0; 0.3,0.3"}}));
    code |= cli::cmd_classify(make("classify", {{"field.analytic", "wedge:q=0.4"}, {"field.cells", "128"},
                                                {"classify.measure_centers", "0,0"}}));
    code |= cli::cmd_cover(make("cover", {{"cover.oracle", "synthetic"}, {"cover.synthetic", "staircase"}}));
    auto v = make("verify", {{"verify.criteria", "1,2,3,7,8"}});
    code |= cmd_verify(v);
    return code;
  };
  const int ca = run_all(base / "a");
  const int cb = run_all(base / "b");
  const auto ta = detail::read_tree(base / "a");
  const auto tb = detail::read_tree(base / "b");
  int differing = 0;
  json files = json::array();
  for (const auto& [name, bytes] : ta) {
    const auto it = tb.find(name);
    const bool same = it != tb.end() && it->second == bytes;
    if (!same) ++differing;
    files.push_back({{"file", name}, {"bytes", bytes.size()}, {"identical", same}});
  }
  if (ta.size() != tb.size()) ++differing;
  std::filesystem::remove_all(base);
  r.metrics = {{"files", files}, {"differing", differing}, {"exit_codes", {ca, cb}}};
  r.pass = differing == 0 && !ta.empty() && ca == cb;
  r.summary = std::to_string(ta.size()) + " artifacts compared, " + std::to_string(differing) + " differ";
}

}  // namespace fbscope::acceptance
