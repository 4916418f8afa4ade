#pragma once

#include "fbscope/analytic/grammar.hpp"
#include "fbscope/cli/config.hpp"
#include "fbscope/fb_analysis/emit.hpp"
#include "fbscope/field/io.hpp"
#include "fbscope/functionals/emit.hpp"
#include "fbscope/geometry/covering.hpp"
#include "fbscope/singular_perturb/solver.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fbscope::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitAcceptance = 1;
inline constexpr int kExitSolver = 2;
inline constexpr int kExitConfig = 3;

/// A solve in the ladder did not converge; maps to exit code 2.
struct SolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Context {
  RunConfig cfg;
  std::string command;
  std::uint64_t seed = 0;
  std::filesystem::path out = "fbscope_out";
  bool labels_only = false;
  std::ostream* log = &std::cerr;

  std::string hash() const { return cfg.hash(command, seed); }
};

inline nlohmann::json meta(const Context& ctx) {
  return {{"toolkit", "fbscope"}, {"version", kVersion}, {"config_hash", ctx.hash()}, {"command", ctx.command},
          {"seed", ctx.seed}};
}

inline std::string csv_banner(const Context& ctx) {
  return "# fbscope " + std::string(kVersion) + " config " + ctx.hash() + "\n";
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << text;
}

inline void write_json(const std::filesystem::path& p, const nlohmann::json& j) { write_text(p, j.dump(1) + "\n"); }

// ---------------------------------------------------------------------------
// Field sources

template <int Dim>
struct FieldSource {
  ScalarField<Dim> grid;
  std::optional<AnalyticSolution<Dim>> solution;
  bool exact = false;  // functionals through the closed form on grid's lattice
  nlohmann::json provenance;
};

template <int Dim>
GridSpec<Dim> config_grid(const RunConfig& cfg) {
  const int cells = cfg.integer("field.cells", 256);
  const double lo = cfg.num("field.lo", -1.0), hi = cfg.num("field.hi", 1.0);
  if (!(hi > lo)) throw ConfigError("field.hi must exceed field.lo");
  try {
    return GridSpec<Dim>::cube(lo, hi, cells);
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
}

template <int Dim>
AnalyticSolution<Dim> config_solution(const std::string& key, const std::string& text) {
  try {
    return parse_solution<Dim>(text);
  } catch (const ParameterError& e) {
    throw ConfigError("'" + key + "': " + e.what());
  }
}

inline void check_single_source(const RunConfig& cfg);

inline int field_dim(const RunConfig& cfg) {
  check_single_source(cfg);
  if (cfg.has("field.file")) {
    std::ifstream is(cfg.str("field.file"), std::ios::binary);
    if (!is) throw ConfigError("field.file not readable: " + cfg.str("field.file"));
    try {
      return peek_fbsf_dim(is);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("field.file: ") + e.what());
    }
  }
  const int d = cfg.integer("field.dim", 2);
  if (d != 2 && d != 3) throw ConfigError("field.dim must be 2 or 3");
  return d;
}

/// Exactly one of field.analytic, field.file and solver.data.
inline void check_single_source(const RunConfig& cfg) {
  const int n = cfg.has("field.analytic") + cfg.has("field.file") + cfg.has("solver.data");
  if (n != 1) throw ConfigError("exactly one field source is required (field.analytic, field.file or solver.data)");
  if (cfg.has("field.file") && !std::filesystem::exists(cfg.str("field.file")))
    throw ConfigError("field.file not found: " + cfg.str("field.file"));
}

template <int Dim>
Dirichlet<Dim> solver_data(const RunConfig& cfg) {
  const std::string text = cfg.str("solver.data");
  if (text.rfind("constant", 0) == 0) {
    const auto eq = text.find("c=");
    if (eq == std::string::npos) throw ConfigError("solver.data: constant needs c=<value>");
    RunConfig tmp;
    tmp.set("cover.level", text.substr(eq + 2));
    const double c = tmp.num("cover.level", 0.0);
    return [c](const Vec<Dim>&) { return c; };
  }
  const auto sol = config_solution<Dim>("solver.data", text);
  return [sol](const Vec<Dim>& p) { return sol.eval(p); };
}

template <int Dim>
ContinuationResult<Dim> run_solver(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto g = config_grid<Dim>(cfg);
  const auto ladder = cfg.list("solver.ladder", {0.2});
  if (ladder.empty()) throw ConfigError("solver.ladder is empty");
  BetaSpec beta = [&] {
    try {
      return beta_by_id(cfg.str("solver.beta", "cubic"), ladder.front());
    } catch (const ParameterError& e) {
      throw ConfigError(std::string("solver.beta: ") + e.what());
    }
  }();
  SolveConfig sc;
  sc.tol = cfg.num("solver.tol", sc.tol);
  sc.max_iter = cfg.integer("solver.max_iter", sc.max_iter);
  try {
    return continuation<Dim>(g, beta, solver_data<Dim>(cfg), ladder, sc);
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }
}

template <int Dim>
FieldSource<Dim> load_field(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  check_single_source(cfg);
  const std::string evaluate = cfg.str("field.evaluate", "sampled");
  if (evaluate != "sampled" && evaluate != "exact") throw ConfigError("field.evaluate must be sampled or exact");
  if (cfg.has("field.analytic")) {
    const auto sol = config_solution<Dim>("field.analytic", cfg.str("field.analytic"));
    return {sol.sample(config_grid<Dim>(cfg)), sol, evaluate == "exact",
            {{"source", "analytic"}, {"grammar", cfg.str("field.analytic")}, {"evaluate", evaluate}}};
  }
  if (evaluate == "exact") throw ConfigError("field.evaluate=exact needs field.analytic");
  if (cfg.has("field.file")) {
    try {
      return {read_fbsf<Dim>(cfg.str("field.file")), std::nullopt, false,
              {{"source", "file"}, {"path", std::filesystem::path(cfg.str("field.file")).filename().string()}}};
    } catch (const std::exception& e) {
      throw ConfigError(std::string("field.file: ") + e.what());
    }
  }
  auto c = run_solver<Dim>(ctx);
  if (!c.all_converged()) throw SolverFailure("solver did not converge: " + c.rungs.back().diagnostics);
  const double eps = c.rungs.back().epsilon;
  return {std::move(c.rungs.back().field), std::nullopt, false,
          {{"source", "solver"}, {"data", cfg.str("solver.data")}, {"epsilon", eps}}};
}

/// Calls fn with the field that functionals are evaluated on.
template <int Dim, class Fn>
void with_eval(const FieldSource<Dim>& s, Fn&& fn) {
  if (s.exact) {
    fn(AnalyticField<Dim>(*s.solution, s.grid.spec()));
  } else {
    fn(s.grid);
  }
}

template <class Fn>
int dispatch_dim(const RunConfig& cfg, Fn&& fn) {
  return field_dim(cfg) == 3 ? fn.template operator()<3>() : fn.template operator()<2>();
}

// ---------------------------------------------------------------------------
// solve

template <int Dim>
int cmd_solve_dim(const Context& ctx) {
  if (!ctx.cfg.has("solver.data")) throw ConfigError("solve needs solver.data");
  check_single_source(ctx.cfg);
  const auto c = run_solver<Dim>(ctx);
  nlohmann::json summary;
  summary["meta"] = meta(ctx);
  summary["rungs"] = nlohmann::json::array();
  std::string diagnostics;
  for (std::size_t k = 0; k < c.rungs.size(); ++k) {
    const auto& r = c.rungs[k];
    const std::string stem = "rung_" + std::to_string(k);
    std::filesystem::create_directories(ctx.out);
    write_fbsf<Dim>((ctx.out / (stem + ".fbsf")).string(), r.field);
    nlohmann::json j;
    j["meta"] = meta(ctx);
    j["container"] = stem + ".fbsf";
    j["epsilon"] = r.epsilon;
    j["converged"] = r.converged;
    j["residual_norm"] = r.residual_norm;
    j["newton_steps"] = r.newton_steps;
    j["picard_steps"] = r.picard_steps;
    j["min_raw"] = r.min_raw;
    j["under_resolved"] = r.under_resolved;
    if (r.under_resolved) j["warning"] = "epsilon below 2h: the transition layer is under-resolved";
    j["interior_gradient_sup"] = interior_gradient_sup(r.field);
    if (k > 0) {
      j["cauchy_sup"] = c.cauchy_sup[k - 1];
      j["chi_l1"] = c.chi_l1[k - 1];
    }
    write_json(ctx.out / (stem + ".json"), j);
    summary["rungs"].push_back(j);
    if (!r.converged) diagnostics += stem + " (epsilon " + fmt17(r.epsilon) + "): " + r.diagnostics + "\n";
  }
  summary["all_converged"] = c.all_converged();
  write_json(ctx.out / "solve.json", summary);
  if (!c.all_converged()) {
    write_text(ctx.out / "diagnostics.txt", diagnostics);
    *ctx.log << "solve: not all rungs converged, see diagnostics.txt\n";
    return kExitSolver;
  }
  return kExitOk;
}

inline int cmd_solve(const Context& ctx) {
  return dispatch_dim(ctx.cfg, [&]<int Dim>() { return cmd_solve_dim<Dim>(ctx); });
}

// ---------------------------------------------------------------------------
// functionals

template <int Dim>
int cmd_functionals_dim(const Context& ctx) {
  const auto src = load_field<Dim>(ctx);
  const auto& cfg = ctx.cfg;
  const double h = src.grid.spec().h;
  const auto centers = cfg.points<Dim>("functionals.centers", {Vec<Dim>::Zero()});
  const double r_min = cfg.num("functionals.r_min", 4.0 * h);
  const double r_max = cfg.num("functionals.r_max", 0.25 * src.grid.spec().cells[0] * h);
  const int n_radii = cfg.integer("functionals.n_radii", 8);
  const bool checks = cfg.flag("functionals.derivative_checks", true);
  std::vector<double> radii;
  try {
    radii = geometric_radii(r_min, r_max, n_radii);
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("functionals ladder: ") + e.what());
  }
  std::ostringstream csv;
  csv << csv_banner(ctx) << "center,";
  static const char* names[] = {"x", "y", "z"};
  for (int k = 0; k < Dim; ++k) csv << names[k] << ',';
  csv << "r,D,H,M,N,V,quad_err,n_defined,status\n";
  nlohmann::json j;
  j["meta"] = meta(ctx);
  j["field"] = src.provenance;
  j["centers"] = nlohmann::json::array();
  with_eval(src, [&](const auto& f) {
    for (std::size_t c = 0; c < centers.size(); ++c) {
      const auto& x = centers[c];
      nlohmann::json cj;
      cj["x"] = json_point<Dim>(x);
      if (!f.ball_interior(x, r_max)) {
        for (double r : radii) {
          csv << c << ',';
          for (int k = 0; k < Dim; ++k) csv << fmt17(x[k]) << ',';
          csv << fmt17(r) << ",nan,nan,nan,nan,nan,nan,0,out_of_domain\n";
        }
        cj["status"] = "out_of_domain";
        j["centers"].push_back(cj);
        continue;
      }
      const auto p = profile_at(f, x, radii);
      for (const auto& s : p.samples) {
        csv << c << ',';
        for (int k = 0; k < Dim; ++k) csv << fmt17(x[k]) << ',';
        csv << fmt17(s.r) << ',' << fmt17(s.D) << ',' << fmt17(s.H) << ',' << fmt17(s.M) << ',' << fmt17(s.N) << ','
            << fmt17(s.V) << ',' << fmt17(s.quad_err) << ',' << (s.n_defined ? 1 : 0) << ",ok\n";
      }
      cj["status"] = "ok";
      cj["m_monotone"] = p.m_monotone;
      cj["n_monotone"] = p.n_monotone;
      cj["h_monotone"] = p.h_monotone;
      cj["certified_from"] = p.certified_from;
      const auto e = limit_extrapolate(p);
      cj["limit"] = {{"M0", json_number(e.M0)},
                     {"N0", json_number(e.N0)},
                     {"H0", json_number(e.H0)},
                     {"stable", e.stable()},
                     {"interior_positive", e.interior_positive}};
      if (checks) {
        const double rc = radii[radii.size() / 2];
        cj["derivative_checks"]["r"] = rc;
        try {
          cj["derivative_checks"]["M"] = to_json(m_derivative_check(f, x, rc));
        } catch (const std::exception& ex) {
          cj["derivative_checks"]["M"] = {{"error", ex.what()}};
        }
        try {
          cj["derivative_checks"]["N"] = to_json(n_derivative_check(f, x, rc));
        } catch (const std::exception& ex) {
          cj["derivative_checks"]["N"] = {{"error", ex.what()}};
        }
      }
      j["centers"].push_back(cj);
    }
  });
  write_text(ctx.out / "functionals.csv", csv.str());
  write_json(ctx.out / "functionals.json", j);
  return kExitOk;
}

inline int cmd_functionals(const Context& ctx) {
  return dispatch_dim(ctx.cfg, [&]<int Dim>() { return cmd_functionals_dim<Dim>(ctx); });
}

// ---------------------------------------------------------------------------
// classify

inline ClassifyConfig classify_config(const RunConfig& cfg) {
  ClassifyConfig c;
  c.r_min_cells = cfg.num("classify.r_min_cells", c.r_min_cells);
  c.r_max_cells = cfg.num("classify.r_max_cells", c.r_max_cells);
  c.n_radii = cfg.integer("classify.n_radii", c.n_radii);
  c.tol_class = cfg.num("classify.tol_class", c.tol_class);
  c.gap = cfg.num("classify.gap", c.gap);
  if (c.r_min_cells < 4.0 || c.r_max_cells <= c.r_min_cells || c.n_radii < 2)
    throw ConfigError("classify ladder: need 4 <= r_min_cells < r_max_cells and n_radii >= 2");
  return c;
}

template <int Dim>
BoundaryPointSet<Dim> classified_boundary(const FieldSource<Dim>& src, const ClassifyConfig& cc) {
  BoundaryPointSet<Dim> pts;
  with_eval(src, [&](const auto& f) { pts = classify(f, extract_boundary(src.grid), cc); });
  return pts;
}

template <int Dim>
int cmd_classify_dim(const Context& ctx) {
  const auto src = load_field<Dim>(ctx);
  const auto& cfg = ctx.cfg;
  const auto cc = classify_config(cfg);
  const auto pts = classified_boundary(src, cc);
  std::ostringstream csv;
  csv << csv_banner(ctx);
  if (ctx.labels_only) {
    static const char* names[] = {"x", "y", "z"};
    for (int k = 0; k < Dim; ++k) csv << names[k] << ',';
    csv << "label\n";
    for (const auto& p : pts.points) {
      for (int k = 0; k < Dim; ++k) csv << fmt17(p.x[k]) << ',';
      csv << to_string(p.label) << '\n';
    }
  } else {
    write_boundary_csv(csv, pts);
  }
  write_text(ctx.out / "boundary.csv", csv.str());
  nlohmann::json j;
  j["meta"] = meta(ctx);
  j["field"] = src.provenance;
  j["summary"] = boundary_summary(pts);
  if (!ctx.labels_only && cfg.has("classify.measure_centers") && !pts.u_identically_zero) {
    const auto centers = cfg.points<Dim>("classify.measure_centers");
    const auto radii = cfg.list("classify.measure_radii", {0.1, 0.2, 0.3, 0.4});
    const double sigma = cfg.num("classify.sigma_cells", 4.0) * src.grid.spec().h;
    j["measure_profiles"] = nlohmann::json::array();
    double worst = 0.0;
    with_eval(src, [&](const auto& f) {
      for (const auto& x : centers) {
        try {
          const auto mp = measure_profile(f, x, pts, radii, sigma);
          worst = std::max(worst, mp.max_mismatch());
          j["measure_profiles"].push_back(to_json(mp));
        } catch (const OutOfDomain& e) {
          j["measure_profiles"].push_back({{"x", json_point<Dim>(x)}, {"error", e.what()}});
        }
      }
    });
    j["max_mismatch"] = worst;
  }
  write_json(ctx.out / "classify.json", j);
  return kExitOk;
}

inline int cmd_classify(const Context& ctx) {
  return dispatch_dim(ctx.cfg, [&]<int Dim>() { return cmd_classify_dim<Dim>(ctx); });
}

// ---------------------------------------------------------------------------
// cover

inline CoveringConfig covering_config(const RunConfig& cfg) {
  CoveringConfig c;
  c.delta1 = cfg.num("cover.delta1", c.delta1);
  c.delta2 = cfg.num("cover.delta2", c.delta2);
  c.eps = cfg.num("cover.eps", c.eps);
  c.r_stop = cfg.num("cover.r_stop", c.r_stop);
  c.tau = cfg.num("cover.tau", c.tau);
  const int cap = cfg.integer("cover.max_nodes", static_cast<int>(c.max_nodes));
  if (cap < 1) throw ConfigError("cover.max_nodes must be positive");
  c.max_nodes = static_cast<std::size_t>(cap);
  return c;
}

/// Candidates spaced along the hyperplane {y·ν = offset} inside the root
/// ball (a segment in 2D, a square lattice patch in 3D).
template <int Dim>
std::vector<Vec<Dim>> plane_candidates(const Vec<Dim>& nu, double offset, const Vec<Dim>& c, double R,
                                       double spacing) {
  const Vec<Dim> n = nu.normalized();
  const Vec<Dim> base = c - (c.dot(n) - offset) * n;
  Mat<Dim> frame = Mat<Dim>::Identity() - n * n.transpose();
  std::vector<Vec<Dim>> tangents;
  Eigen::SelfAdjointEigenSolver<Mat<Dim>> es(frame);
  for (int k = 1; k < Dim; ++k) tangents.push_back(es.eigenvectors().col(k));
  const int m = static_cast<int>(std::floor(R / spacing));
  std::vector<Vec<Dim>> out;
  if constexpr (Dim == 2) {
    for (int i = -m; i <= m; ++i) {
      const Vec<2> p = base + i * spacing * tangents[0];
      if ((p - c).norm() <= R) out.push_back(p);
    }
  } else {
    for (int i = -m; i <= m; ++i)
      for (int j = -m; j <= m; ++j) {
        const Vec<3> p = base + i * spacing * tangents[0] + j * spacing * tangents[1];
        if ((p - c).norm() <= R) out.push_back(p);
      }
  }
  return out;
}

template <int Dim>
int cmd_cover_dim(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto cc = covering_config(cfg);
  const std::string kind = cfg.str("cover.oracle", "grid");
  const auto root = cfg.points<Dim>("cover.root_center", {Vec<Dim>::Zero()});
  if (root.size() != 1) throw ConfigError("cover.root_center must be one point");
  const double R = cfg.num("cover.root_radius", kind == "grid" ? 0.04 : 0.5);
  const auto mink = cfg.list("cover.minkowski_s", {R / 10, R / 20, R / 40});
  std::vector<Vec<Dim>> candidates;
  std::optional<FrequencyOracle<Dim>> oracle;
  std::optional<FieldSource<Dim>> src;
  nlohmann::json provenance;
  if (kind == "synthetic") {
    const std::string id = cfg.str("cover.synthetic", "staircase");
    Vec<Dim> nu = Vec<Dim>::Unit(Dim - 1);
    if (cfg.has("cover.line_normal")) nu = cfg.points<Dim>("cover.line_normal").at(0);
    const double off = cfg.num("cover.line_offset", 0.0);
    if (id == "constant") {
      oracle = synthetic_constant<Dim>(cfg.num("cover.level", 2.0));
    } else if (id == "line") {
      oracle = synthetic_plane<Dim>(nu, off, cfg.num("cover.level", 1.0 + 2.0 * cc.delta1),
                                    cfg.num("cover.off_level", 1.0));
    } else if (id == "staircase") {
      try {
        oracle = synthetic_staircase<Dim>(nu, off, cfg.num("cover.n_top", 1.0 + 2.0 * cc.delta1),
                                          cfg.num("cover.step", cc.eps), R, cfg.num("cover.ratio", cc.delta2));
      } catch (const ParameterError& e) {
        throw ConfigError(std::string("cover: ") + e.what());
      }
    } else {
      throw ConfigError("cover.synthetic must be constant, line or staircase");
    }
    candidates = plane_candidates<Dim>(nu, off, root[0], R, cfg.num("cover.line_spacing", R / 2000));
    provenance = {{"source", "synthetic"}, {"id", id}};
  } else if (kind == "grid" || kind == "analytic") {
    src = load_field<Dim>(ctx);
    if (kind == "analytic") {
      if (!src->solution || !src->solution->abs_family())
        throw ConfigError("cover.oracle=analytic needs an |harmonic polynomial| field.analytic");
      oracle = analytic_oracle<Dim>(*src->solution);
    } else {
      oracle = grid_oracle(src->grid);
    }
    const std::string which = cfg.str("cover.candidates", "sigmaH");
    if (which == "boundary") {
      for (const auto& p : extract_boundary(src->grid).points) candidates.push_back(p.x);
    } else if (which == "sigmaH") {
      for (const auto& p : classified_boundary(*src, classify_config(cfg)).points)
        if (highest_density(p.label)) candidates.push_back(p.x);
    } else {
      throw ConfigError("cover.candidates must be sigmaH or boundary");
    }
    provenance = src->provenance;
    provenance["candidates"] = which;
  } else {
    throw ConfigError("cover.oracle must be grid, analytic or synthetic");
  }
  const auto rep = [&] {
    try {
      return covering_tree<Dim>(candidates, *oracle, root[0], R, cc, mink);
    } catch (const ParameterError& e) {
      throw ConfigError(std::string("cover: ") + e.what());
    }
  }();
  auto j = to_json(rep);
  j["meta"] = meta(ctx);
  j["field"] = provenance;
  j["n_candidates_total"] = candidates.size();
  j["sound"] = covering_sound(rep, candidates);
  write_json(ctx.out / "covering.json", j);
  std::ostringstream dot;
  dot << "// fbscope " << kVersion << " config " << ctx.hash() << "\n";
  write_dot(dot, rep);
  write_text(ctx.out / "covering.dot", dot.str());
  return kExitOk;
}

inline int cmd_cover(const Context& ctx) {
  if (ctx.cfg.str("cover.oracle", "grid") == "synthetic") {
    const int d = ctx.cfg.integer("field.dim", 2);
    if (d != 2 && d != 3) throw ConfigError("field.dim must be 2 or 3");
    return d == 3 ? cmd_cover_dim<3>(ctx) : cmd_cover_dim<2>(ctx);
  }
  return dispatch_dim(ctx.cfg, [&]<int Dim>() { return cmd_cover_dim<Dim>(ctx); });
}

}  // namespace fbscope::cli
