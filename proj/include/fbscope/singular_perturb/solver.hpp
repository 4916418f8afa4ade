#pragma once

#include "fbscope/field/scalar_field.hpp"
#include "fbscope/functionals/functionals.hpp"
#include "fbscope/singular_perturb/beta.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <unsupported/Eigen/IterativeSolvers>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fbscope {

struct SolveConfig {
  double tol = 1e-10;          // on h²‖−Δ_h u + β_ε(u)‖_∞
  int max_iter = 200;          // Newton steps
  int max_picard = 50000;      // monotone sweeps
  double damping_floor = 1.0 / 1024.0;
  double picard_switch = 1e-6;  // sup change below which Newton is retried
  bool picard_fallback = true;  // off: a failed Newton step ends the solve
  std::size_t direct_limit = 300000;
  double linear_tol = 1e-10;
};

template <int Dim>
struct SolveResult {
  ScalarField<Dim> field;
  double epsilon = 0.0;
  double residual_norm = 0.0;
  int iterations = 0;  // Newton + Picard
  int newton_steps = 0;
  int picard_steps = 0;
  bool converged = false;
  bool under_resolved = false;
  double min_raw = 0.0;  // smallest nodal value before clipping roundoff negatives
  std::string diagnostics;
};

template <int Dim>
using Dirichlet = std::function<double(const Vec<Dim>&)>;

namespace detail {

template <int Dim>
class DiscreteProblem {
 public:
  DiscreteProblem(const GridSpec<Dim>& g, const BetaSpec& b) : g_(g), b_(b) {
    const std::size_t n = g.node_count();
    unknown_.assign(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
      const auto m = g.multi_index(i);
      bool interior = true;
      for (int k = 0; k < Dim; ++k) interior = interior && m[k] > 0 && m[k] < g.cells[k];
      if (interior) {
        unknown_[i] = static_cast<long>(nodes_.size());
        nodes_.push_back(i);
      }
    }
    const std::size_t m = nodes_.size();
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(m * (2 * Dim + 1));
    for (std::size_t a = 0; a < m; ++a) {
      const auto mi = g.multi_index(nodes_[a]);
      t.emplace_back(a, a, 2.0 * Dim);
      for (int k = 0; k < Dim; ++k) {
        for (int s : {-1, 1}) {
          auto nb = mi;
          nb[k] += s;
          const long j = unknown_[g.index(nb)];
          if (j >= 0) t.emplace_back(a, j, -1.0);
        }
      }
    }
    lap_.resize(m, m);
    lap_.setFromTriplets(t.begin(), t.end());
  }

  std::size_t size() const { return nodes_.size(); }
  const std::vector<std::size_t>& nodes() const { return nodes_; }
  const Eigen::SparseMatrix<double>& laplacian() const { return lap_; }

  /// h²(−Δ_h u + β_ε(u)) at interior nodes, u a full nodal array.
  Eigen::VectorXd residual(const std::vector<double>& u) const {
    Eigen::VectorXd r(size());
    const double h2 = g_.h * g_.h;
    for (std::size_t a = 0; a < size(); ++a) {
      const auto mi = g_.multi_index(nodes_[a]);
      double acc = 2.0 * Dim * u[nodes_[a]];
      for (int k = 0; k < Dim; ++k) {
        for (int s : {-1, 1}) {
          auto nb = mi;
          nb[k] += s;
          acc -= u[g_.index(nb)];
        }
      }
      r[a] = acc + h2 * b_.beta_eps(u[nodes_[a]]);
    }
    return r;
  }

  Eigen::SparseMatrix<double> jacobian(const std::vector<double>& u) const {
    Eigen::SparseMatrix<double> J = lap_;
    const double h2 = g_.h * g_.h;
    for (std::size_t a = 0; a < size(); ++a) J.coeffRef(a, a) += h2 * b_.dbeta_eps(u[nodes_[a]]);
    return J;
  }

  void add(std::vector<double>& u, const Eigen::VectorXd& d, double scale) const {
    for (std::size_t a = 0; a < size(); ++a) u[nodes_[a]] += scale * d[a];
  }

 private:
  GridSpec<Dim> g_;
  const BetaSpec& b_;
  std::vector<long> unknown_;
  std::vector<std::size_t> nodes_;
  Eigen::SparseMatrix<double> lap_;
};

/// Sparse symmetric solve: LDLᵀ up to `direct_limit` unknowns, MINRES with a
/// diagonal preconditioner above.
class SymmetricSolver {
 public:
  SymmetricSolver(std::size_t direct_limit, double tol) : direct_limit_(direct_limit), tol_(tol) {}

  bool factor(const Eigen::SparseMatrix<double>& A) {
    direct_ = static_cast<std::size_t>(A.rows()) <= direct_limit_;
    if (direct_) {
      if (!analyzed_) {
        ldlt_.analyzePattern(A);
        analyzed_ = true;
      }
      ldlt_.factorize(A);
      return ldlt_.info() == Eigen::Success;
    }
    minres_.setTolerance(tol_);
    minres_.setMaxIterations(10 * static_cast<int>(A.rows()));
    minres_.compute(A);
    return minres_.info() == Eigen::Success;
  }

  std::optional<Eigen::VectorXd> solve(const Eigen::VectorXd& b) {
    if (direct_) {
      Eigen::VectorXd x = ldlt_.solve(b);
      if (ldlt_.info() != Eigen::Success || !x.allFinite()) return std::nullopt;
      return x;
    }
    Eigen::VectorXd x = minres_.solve(b);
    if (!x.allFinite()) return std::nullopt;
    return x;
  }

 private:
  std::size_t direct_limit_;
  double tol_;
  bool direct_ = true;
  bool analyzed_ = false;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  Eigen::MINRES<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>>
      minres_;
};

}  // namespace detail

/// Solves Δu = β_ε(u) on the box with Dirichlet data. Without a warm start the
/// iteration begins at the discrete harmonic extension, which lies above every
/// solution, and the shifted Picard map v = u − (−Δ_h + K)⁻¹F(u), K ≥ sup β_ε',
/// descends monotonically from there until its updates fall below
/// `picard_switch`. Damped Newton then finishes; a warm start begins with
/// Newton directly. Newton hands back to Picard when damping reaches its floor,
/// or on a cold start when it stays heavy for three steps. Picard drifts toward
/// the maximal solution, so a warm start on another branch keeps it only while
/// Newton makes progress.
template <int Dim>
SolveResult<Dim> solve(const GridSpec<Dim>& g, const BetaSpec& beta, const Dirichlet<Dim>& dirichlet,
                       const SolveConfig& cfg = {}, const ScalarField<Dim>* warm = nullptr) {
  if (warm && !(warm->spec() == g)) throw ParameterError("solve: warm start lives on a different grid");
  const std::size_t n = g.node_count();
  std::vector<double> u(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto m = g.multi_index(i);
    bool bdy = false;
    for (int k = 0; k < Dim; ++k) bdy = bdy || m[k] == 0 || m[k] == g.cells[k];
    if (bdy) {
      const double v = dirichlet(g.node(m));
      if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("solve: Dirichlet data must be nonnegative");
      u[i] = v;
    }
  }
  detail::DiscreteProblem<Dim> P(g, beta);
  const double h2 = g.h * g.h;

  SolveResult<Dim> out{ScalarField<Dim>(GridSpec<Dim>(g), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)),
                       0.0, 0.0, 0, 0, 0, false, false, 0.0, {}};
  out.epsilon = beta.epsilon();
  out.under_resolved = beta.epsilon() < 2.0 * g.h;
  if (out.under_resolved) out.diagnostics += "under-resolved: epsilon < 2h; ";

  detail::SymmetricSolver newton_solver(cfg.direct_limit, cfg.linear_tol);
  detail::SymmetricSolver picard_solver(cfg.direct_limit, cfg.linear_tol);
  const double K = beta.dbeta_eps_max();
  Eigen::SparseMatrix<double> A = P.laplacian();
  for (std::size_t a = 0; a < P.size(); ++a) A.coeffRef(a, a) += h2 * K;
  bool picard_ready = false;
  const auto picard_step = [&](std::vector<double>& v) -> std::optional<double> {
    if (!picard_ready) {
      if (!picard_solver.factor(A)) return std::nullopt;
      picard_ready = true;
    }
    const auto d = picard_solver.solve(P.residual(v));
    if (!d) return std::nullopt;
    P.add(v, *d, -1.0);
    return d->template lpNorm<Eigen::Infinity>();
  };

  if (warm) {
    for (std::size_t a : P.nodes()) u[a] = warm->values()[a];
  } else if (P.size() > 0) {
    // Harmonic extension: one solve of −Δ_h u = boundary terms.
    detail::SymmetricSolver lap(cfg.direct_limit, cfg.linear_tol);
    std::vector<double> zero_inside = u;
    Eigen::VectorXd rhs = -P.residual(zero_inside);  // β_ε(0) = 0 so only boundary terms remain
    if (!lap.factor(P.laplacian())) throw std::runtime_error("solve: Laplacian factorization failed");
    const auto x = lap.solve(rhs);
    if (!x) throw std::runtime_error("solve: Laplacian solve failed");
    P.add(u, *x, 1.0);
  }

  double switch_tol = cfg.picard_switch;
  bool use_newton = warm != nullptr;
  int stalls = 0;
  while (true) {
    const Eigen::VectorXd F = P.residual(u);
    out.residual_norm = F.size() ? F.lpNorm<Eigen::Infinity>() : 0.0;
    if (out.residual_norm <= cfg.tol) {
      out.converged = true;
      break;
    }
    if (use_newton) {
      if (out.newton_steps >= cfg.max_iter) break;
      ++out.newton_steps;
      bool accepted = false;
      if (newton_solver.factor(P.jacobian(u))) {
        if (const auto d = newton_solver.solve(-F)) {
          const double f0 = F.norm();
          for (double lam = 1.0; lam >= cfg.damping_floor; lam *= 0.5) {
            std::vector<double> trial = u;
            P.add(trial, *d, lam);
            if (P.residual(trial).norm() < f0) {
              u = std::move(trial);
              accepted = true;
              stalls = lam < 1.0 / 16 ? stalls + 1 : 0;
              break;
            }
          }
        }
      }
      // From a cold start, repeated heavy damping means the iterate is far from
      // the Newton basin. A warm start is trusted to select its own branch.
      if (!accepted || (!warm && stalls >= 3)) {
        if (!cfg.picard_fallback) {
          out.diagnostics += "Newton stalled; ";
          break;
        }
        use_newton = false;
        stalls = 0;
      }
      continue;
    }
    if (out.picard_steps >= cfg.max_picard) break;
    ++out.picard_steps;
    const auto change = picard_step(u);
    if (!change) {
      out.diagnostics += "Picard linear solve failed; ";
      break;
    }
    if (*change < switch_tol) {
      use_newton = true;
      switch_tol *= 0.1;
    }
  }
  out.iterations = out.newton_steps + out.picard_steps;
  if (!out.converged) out.diagnostics += "not converged: residual " + std::to_string(out.residual_norm) + "; ";

  out.min_raw = *std::min_element(u.begin(), u.end());
  std::vector<double> chi(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = std::max(u[i], 0.0);
    chi[i] = std::clamp(2.0 * beta.B_eps(u[i]), 0.0, 1.0);
  }
  out.field = ScalarField<Dim>(GridSpec<Dim>(g), std::move(u), std::move(chi));
  return out;
}

template <int Dim>
struct ContinuationResult {
  std::vector<SolveResult<Dim>> rungs;
  std::vector<double> cauchy_sup;  // ‖u_{k+1} − u_k‖_∞
  std::vector<double> chi_l1;      // ∫|χ_{k+1} − χ_k|
  bool all_converged() const {
    return std::all_of(rungs.begin(), rungs.end(), [](const auto& r) { return r.converged; });
  }
};

namespace detail {

// Newton from `warm` at ε; on a stall, halve the step in log ε and retry
// through the midpoint.
template <int Dim>
SolveResult<Dim> warm_step(const GridSpec<Dim>& g, const BetaSpec& base, const Dirichlet<Dim>& dirichlet,
                           const SolveConfig& cfg, const ScalarField<Dim>& warm, double from, double to, int depth) {
  SolveConfig strict = cfg;
  strict.picard_fallback = false;
  auto r = solve(g, base.with_epsilon(to), dirichlet, strict, &warm);
  if (r.converged) return r;
  if (depth == 0) return solve(g, base.with_epsilon(to), dirichlet, cfg, &warm);
  const double mid = std::sqrt(from * to);
  const auto m = warm_step(g, base, dirichlet, cfg, warm, from, mid, depth - 1);
  if (!m.converged) return m;
  return warm_step(g, base, dirichlet, cfg, m.field, mid, to, depth - 1);
}

}  // namespace detail

/// Warm-started solves along a decreasing ε ladder. The first rung starts from
/// `initial` when given. Later rungs use Newton only, inserting geometric
/// sub-rungs (up to four levels) when a step stalls, so the continuation stays
/// on the branch it started on.
template <int Dim>
ContinuationResult<Dim> continuation(const GridSpec<Dim>& g, const BetaSpec& base, const Dirichlet<Dim>& dirichlet,
                                     const std::vector<double>& ladder, const SolveConfig& cfg = {},
                                     const ScalarField<Dim>* initial = nullptr) {
  if (ladder.empty()) throw ParameterError("continuation: empty epsilon ladder");
  for (std::size_t k = 1; k < ladder.size(); ++k)
    if (!(ladder[k] < ladder[k - 1])) throw ParameterError("continuation: ladder must decrease");
  ContinuationResult<Dim> out;
  out.rungs.push_back(solve(g, base.with_epsilon(ladder[0]), dirichlet, cfg, initial));
  for (std::size_t k = 1; k < ladder.size(); ++k) {
    const auto& prev = out.rungs.back();
    out.rungs.push_back(detail::warm_step(g, base, dirichlet, cfg, prev.field, ladder[k - 1], ladder[k], 4));
  }
  const double cell = g.cell_volume();
  for (std::size_t k = 1; k < out.rungs.size(); ++k) {
    const auto& a = out.rungs[k - 1].field;
    const auto& b = out.rungs[k].field;
    double sup = 0.0, l1 = 0.0;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      sup = std::max(sup, std::abs(a.values()[i] - b.values()[i]));
      l1 += std::abs(a.chi()[i] - b.chi()[i]) * cell;
    }
    out.cauchy_sup.push_back(sup);
    out.chi_l1.push_back(l1);
  }
  return out;
}

/// Solver output viewed as a variational pair with χ = 2B_ε(u) evaluated at
/// every quadrature point.
template <int Dim>
class EpsField {
 public:
  static constexpr int dim = Dim;

  EpsField(ScalarField<Dim> f, BetaSpec beta) : f_(std::move(f)), beta_(std::move(beta)) {}

  PointValue<Dim> probe(const Vec<Dim>& p) const {
    auto pv = f_.probe(p);
    pv.chi = std::clamp(2.0 * beta_.B_eps(pv.u), 0.0, 1.0);
    return pv;
  }
  double value(const Vec<Dim>& p) const { return f_.value(p); }
  Vec<Dim> grad(const Vec<Dim>& p) const { return f_.grad(p); }
  const GridSpec<Dim>& spec() const { return f_.spec(); }
  const GridSpec<Dim>& lattice_for(const Vec<Dim>& x, double r) const { return f_.lattice_for(x, r); }
  bool ball_interior(const Vec<Dim>& x, double r) const { return f_.ball_interior(x, r); }
  double resolution() const { return f_.resolution(); }
  const ScalarField<Dim>& field() const { return f_; }
  const BetaSpec& beta() const { return beta_; }

 private:
  ScalarField<Dim> f_;
  BetaSpec beta_;
};

/// Every other node of a field whose cell counts are even.
template <int Dim>
ScalarField<Dim> coarsen(const ScalarField<Dim>& f) {
  const auto& g = f.spec();
  std::array<int, Dim> cells;
  for (int k = 0; k < Dim; ++k) {
    if (g.cells[k] % 2 != 0) throw ParameterError("coarsen: cell counts must be even");
    cells[k] = g.cells[k] / 2;
  }
  const auto c = GridSpec<Dim>::make(g.origin, g.extent(), cells);
  std::vector<double> u(c.node_count()), chi(c.node_count());
  for (std::size_t i = 0; i < c.node_count(); ++i) {
    auto m = c.multi_index(i);
    for (auto& v : m) v *= 2;
    u[i] = f.at(m);
    chi[i] = f.chi_at(m);
  }
  return ScalarField<Dim>(c, std::move(u), std::move(chi));
}

struct DomainVariationResidual : VariationalResidual {
  bool coarse_solved = false;  // false: the 2h estimate fell back to restriction
};

/// Domain-variation residual of a solver output with χ = 2B_ε(u). The
/// discretization part of the tolerance is the per-field change against a
/// re-solve on the 2h grid, started from the restricted solution so that it
/// stays on the same branch; if that Newton solve stalls the plain
/// restriction is used instead.
template <int Dim>
DomainVariationResidual domain_variation_residual(const SolveResult<Dim>& s, const BetaSpec& beta,
                                                  const Dirichlet<Dim>& dirichlet, const TestFieldSpec& spec = {},
                                                  const SolveConfig& cfg = {}) {
  DomainVariationResidual out;
  static_cast<VariationalResidual&>(out) = variational_residual(EpsField<Dim>(s.field, beta), spec);
  const auto restricted = coarsen(s.field);
  SolveConfig strict = cfg;
  strict.picard_fallback = false;
  const auto coarse = solve(restricted.spec(), beta, dirichlet, strict, &restricted);
  out.coarse_solved = coarse.converged;
  const auto c = variational_residual(EpsField<Dim>(coarse.converged ? coarse.field : restricted, beta), spec);
  double gap = 0.0;
  for (std::size_t j = 0; j < out.per_field.size(); ++j) gap = std::max(gap, std::abs(out.per_field[j] - c.per_field[j]));
  out.quad_tol += gap;
  return out;
}

/// sup of the centred-difference gradient over nodes of the box shrunk by
/// `fraction` about its centre.
template <int Dim>
double interior_gradient_sup(const ScalarField<Dim>& f, double fraction = 0.5) {
  const auto& g = f.spec();
  const Vec<Dim> c = g.origin + 0.5 * g.extent();
  const Vec<Dim> half = 0.5 * fraction * g.extent();
  double sup = 0.0;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const auto m = g.multi_index(i);
    bool inside = true;
    for (int k = 0; k < Dim; ++k) inside = inside && m[k] > 0 && m[k] < g.cells[k];
    if (!inside) continue;
    const Vec<Dim> p = g.node(m);
    if (((p - c).cwiseAbs() - half).maxCoeff() > 1e-12) continue;
    Vec<Dim> d;
    for (int k = 0; k < Dim; ++k) {
      auto a = m, b = m;
      ++a[k];
      --b[k];
      d[k] = (f.at(a) - f.at(b)) / (2.0 * g.h);
    }
    sup = std::max(sup, d.norm());
  }
  return sup;
}

}  // namespace fbscope
