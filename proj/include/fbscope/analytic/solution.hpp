#pragma once

#include "fbscope/analytic/polynomial.hpp"
#include "fbscope/field/grid.hpp"
#include "fbscope/field/scalar_field.hpp"
#include "fbscope/functionals/sample_types.hpp"

#include <optional>
#include <type_traits>
#include <string>

namespace fbscope {

enum class SolutionKind { Zero, HalfPlane, Wedge, AbsHarmonic, HomogeneousAbs, WedgeWithChiOne, Cusp, TwoSlope };

inline const char* to_string(SolutionKind k) {
  switch (k) {
    case SolutionKind::Zero: return "zero";
    case SolutionKind::HalfPlane: return "halfplane";
    case SolutionKind::Wedge: return "wedge";
    case SolutionKind::AbsHarmonic: return "absharm";
    case SolutionKind::HomogeneousAbs: return "homabs";
    case SolutionKind::WedgeWithChiOne: return "wedge1";
    case SolutionKind::Cusp: return "cusp";
    case SolutionKind::TwoSlope: return "twoslope";
  }
  return "?";
}

/// Closed-form pair (u, χ).
///
/// The |harmonic polynomial| family (Wedge, WedgeWithChiOne, AbsHarmonic,
/// HomogeneousAbs) is stored as |v| with χ ≡ 1.  At points where u is not
/// differentiable grad returns the one-sided limit along +ν (for |v|: along
/// +∇v, i.e. ∇v itself).
template <int Dim>
class AnalyticSolution {
 public:
  static constexpr int dim = Dim;

  static AnalyticSolution zero() { return AnalyticSolution(SolutionKind::Zero); }

  static AnalyticSolution halfplane(double a, const Vec<Dim>& nu = unit_last()) {
    AnalyticSolution s(SolutionKind::HalfPlane);
    s.a_ = positive(a, "halfplane slope");
    s.nu_ = unit(nu);
    return s;
  }

  static AnalyticSolution wedge(double q, const Vec<Dim>& nu = unit_last()) {
    return wedge_like(SolutionKind::Wedge, q, nu);
  }

  static AnalyticSolution wedge_chi_one(double q, const Vec<Dim>& nu = unit_last()) {
    return wedge_like(SolutionKind::WedgeWithChiOne, q, nu);
  }

  static AnalyticSolution abs_harmonic(const Polynomial<Dim>& v) {
    if (v.degree() < 1) throw ParameterError("absharm: polynomial must be non-constant");
    const auto lap = v.laplacian();
    double scale = 0.0, resid = 0.0;
    for (const auto& [e, c] : v.terms()) scale = std::max(scale, std::abs(c));
    for (const auto& [e, c] : lap.terms()) resid = std::max(resid, std::abs(c));
    if (resid > 1e-12 * scale) throw ParameterError("absharm: polynomial is not harmonic");
    AnalyticSolution s(SolutionKind::AbsHarmonic);
    s.poly_ = v;
    return s;
  }

  /// |Re z^k| in the plane.
  static AnalyticSolution homogeneous_abs(int k) {
    if constexpr (Dim != 2) {
      throw ParameterError("homabs: only available in dimension 2");
    } else {
      if (k < 2) throw ParameterError("homabs: degree must be >= 2");
      AnalyticSolution s(SolutionKind::HomogeneousAbs);
      s.poly_ = Polynomial<Dim>::real_power(k);
      s.k_ = k;
      return s;
    }
  }

  /// max(−log|x−e_1|, 0) + max(−log|x+e_1|, 0) with χ = χ_{u>0}.
  static AnalyticSolution cusp() {
    if constexpr (Dim != 2) {
      throw ParameterError("cusp: only available in dimension 2");
    } else {
      return AnalyticSolution(SolutionKind::Cusp);
    }
  }

  /// a₊(x·ν)⁺ + a₋(x·ν)⁻ with χ ≡ 1: a viscosity-style crease that is not
  /// stationary under domain variations unless a₊ = a₋.
  static AnalyticSolution two_slope(double ap, double am, const Vec<Dim>& nu = unit_last()) {
    AnalyticSolution s(SolutionKind::TwoSlope);
    s.a_ = positive(ap, "twoslope a+");
    s.q_ = positive(am, "twoslope a-");
    s.nu_ = unit(nu);
    return s;
  }

  SolutionKind kind() const { return kind_; }
  const Vec<Dim>& normal() const { return nu_; }
  double slope() const { return kind_ == SolutionKind::HalfPlane || kind_ == SolutionKind::TwoSlope ? a_ : q_; }
  double slope_minus() const { return q_; }
  int degree() const { return k_; }
  bool abs_family() const {
    return kind_ == SolutionKind::Wedge || kind_ == SolutionKind::WedgeWithChiOne ||
           kind_ == SolutionKind::AbsHarmonic || kind_ == SolutionKind::HomogeneousAbs;
  }
  /// The signed harmonic polynomial v with u = |v| (abs family only).
  const Polynomial<Dim>& polynomial() const {
    if (!abs_family()) throw NotAvailable("polynomial: not an |harmonic| solution");
    return poly_;
  }

  double eval(const Vec<Dim>& p) const {
    switch (kind_) {
      case SolutionKind::Zero: return 0.0;
      case SolutionKind::HalfPlane: return a_ * std::max(0.0, p.dot(nu_));
      case SolutionKind::TwoSlope: {
        const double t = p.dot(nu_);
        return t >= 0.0 ? a_ * t : -q_ * t;
      }
      case SolutionKind::Cusp: {
        const Vec<Dim> e = Vec<Dim>::Unit(0);
        return std::max(-std::log((p - e).norm()), 0.0) + std::max(-std::log((p + e).norm()), 0.0);
      }
      default: return std::abs(poly_(p));
    }
  }

  Vec<Dim> grad(const Vec<Dim>& p) const {
    switch (kind_) {
      case SolutionKind::Zero: return Vec<Dim>::Zero();
      case SolutionKind::HalfPlane: return p.dot(nu_) >= 0.0 ? Vec<Dim>(a_ * nu_) : Vec<Dim>::Zero();
      case SolutionKind::TwoSlope: return p.dot(nu_) >= 0.0 ? Vec<Dim>(a_ * nu_) : Vec<Dim>(-q_ * nu_);
      case SolutionKind::Cusp: {
        Vec<Dim> g = Vec<Dim>::Zero();
        for (double sgn : {1.0, -1.0}) {
          const Vec<Dim> d = p - sgn * Vec<Dim>::Unit(0);
          const double n2 = d.squaredNorm();
          if (n2 < 1.0) g -= d / n2;
        }
        return g;
      }
      default: {
        const Vec<Dim> g = poly_.gradient(p);
        return poly_(p) >= 0.0 ? g : Vec<Dim>(-g);
      }
    }
  }

  double chi(const Vec<Dim>& p) const {
    switch (kind_) {
      case SolutionKind::Zero: return 0.0;
      case SolutionKind::HalfPlane:
      case SolutionKind::Cusp: return eval(p) > 0.0 ? 1.0 : 0.0;
      default: return 1.0;
    }
  }

  /// Nodal samples on a grid.
  ScalarField<Dim> sample(const GridSpec<Dim>& spec) const {
    return ScalarField<Dim>::sample(spec, [this](const Vec<Dim>& p) { return eval(p); },
                                    [this](const Vec<Dim>& p) { return chi(p); });
  }

 private:
  explicit AnalyticSolution(SolutionKind k) : kind_(k) { check_dim<Dim>(); }

  static AnalyticSolution wedge_like(SolutionKind kind, double q, const Vec<Dim>& nu) {
    AnalyticSolution s(kind);
    s.q_ = positive(q, "wedge slope");
    s.nu_ = unit(nu);
    s.poly_ = Polynomial<Dim>::linear(s.q_ * s.nu_);
    return s;
  }

  static Vec<Dim> unit_last() { return Vec<Dim>::Unit(Dim - 1); }

  static Vec<Dim> unit(const Vec<Dim>& nu) {
    if (std::abs(nu.norm() - 1.0) > 1e-9) throw ParameterError("normal must be a unit vector");
    return nu.normalized();
  }

  static double positive(double v, const char* what) {
    if (!(v > 0.0)) throw ParameterError(std::string(what) + " must be positive");
    return v;
  }

  SolutionKind kind_;
  double a_ = 0.0;
  double q_ = 0.0;
  int k_ = 1;
  Vec<Dim> nu_ = unit_last();
  Polynomial<Dim> poly_;
};

/// Exact (D, H, M, N, V) at (x, r).  Available for Zero, HalfPlane centred on
/// its hyperplane, and every |harmonic polynomial| at any center.
template <int Dim>
FunctionalSample<Dim> exact_functionals(const AnalyticSolution<Dim>& sol, const std::type_identity_t<Vec<Dim>>& x, double r) {
  if (!(r > 0.0)) throw ParameterError("exact_functionals: radius must be positive");
  const double b1 = unit_ball_volume(Dim);
  FunctionalSample<Dim> s;
  s.x = x;
  s.r = r;
  s.n_defined = false;
  double deficit = 0.0;
  if (sol.kind() == SolutionKind::Zero) {
    deficit = b1;
  } else if (sol.kind() == SolutionKind::HalfPlane) {
    if (std::abs(x.dot(sol.normal())) > 1e-14 * std::max(1.0, x.norm()))
      throw NotAvailable("exact_functionals: halfplane only at centers on the hyperplane");
    const double a2 = sol.slope() * sol.slope();
    s.D = 0.5 * (a2 + 1.0) * b1;
    s.H = 0.5 * a2 * b1;  // half of ∫_{∂B_1}(ω·ν)² = |B_1|
    deficit = 0.5 * b1;
  } else if (sol.abs_family()) {
    // w(y) = v(x + r y): D = |B_1| + r^{-2}∫_{B_1}|∇w|², H = r^{-2}∫_{∂B_1} w².
    const Polynomial<Dim> w = sol.polynomial().compose_affine(x, r);
    Polynomial<Dim> g2;
    for (int k = 0; k < Dim; ++k) {
      const auto dk = w.derivative(k);
      g2 += dk * dk;
    }
    s.D = b1 + g2.ball_integral() / (r * r);
    s.H = (w * w).sphere_integral() / (r * r);
  } else {
    throw NotAvailable(std::string("exact_functionals: no closed form for ") + to_string(sol.kind()));
  }
  finish_sample(s, deficit);
  s.n_defined = s.H > 0.0 && s.M >= b1 * (1.0 - 1e-12);
  return s;
}

/// Exact Δu(B_r(x)).
template <int Dim>
double exact_laplacian_mass(const AnalyticSolution<Dim>& sol, const std::type_identity_t<Vec<Dim>>& x, double r) {
  if (!(r > 0.0)) throw ParameterError("exact_laplacian_mass: radius must be positive");
  switch (sol.kind()) {
    case SolutionKind::Zero: return 0.0;
    case SolutionKind::HalfPlane:
      return sol.slope() * plane_section_measure(Dim, r, x.dot(sol.normal()));
    case SolutionKind::TwoSlope:
      return (sol.slope() + sol.slope_minus()) * plane_section_measure(Dim, r, x.dot(sol.normal()));
    case SolutionKind::Wedge:
    case SolutionKind::WedgeWithChiOne:
      return 2.0 * sol.slope() * plane_section_measure(Dim, r, x.dot(sol.normal()));
    case SolutionKind::HomogeneousAbs:
      // 2k rays through 0, each carrying 2|∇v| = 2kρ^{k−1}.
      if (x.norm() > 0.0) throw NotAvailable("exact_laplacian_mass: homabs only at the origin");
      return 4.0 * sol.degree() * std::pow(r, sol.degree());
    case SolutionKind::AbsHarmonic: {
      const auto& v = sol.polynomial();
      if (v.degree() == 1) {
        const Vec<Dim> g = v.gradient(Vec<Dim>::Zero());
        const double c = v(Vec<Dim>::Zero());
        return 2.0 * g.norm() * plane_section_measure(Dim, r, (x.dot(g) + c) / g.norm());
      }
      throw NotAvailable("exact_laplacian_mass: use nodal_line_mass for curved nodal sets");
    }
    default: throw NotAvailable("exact_laplacian_mass: no closed form");
  }
}

/// Brute-force 2∫_{{v=0} ∩ B_r(x)} |∇v| dH¹ for a planar polynomial: marching
/// squares on an n×n lattice, each segment clipped exactly to the disk and
/// integrated with two-point Gauss.
inline double nodal_line_mass(const Polynomial<2>& v, const Vec<2>& x, double r, int n = 2048) {
  if (n < 8) throw ParameterError("nodal_line_mass: need n >= 8");
  const double h = 2.0 * r / n;
  // Irrational shift keeps nodes off lines of symmetry of typical nodal sets.
  const Vec<2> o = x - Vec<2>::Constant(r) + Vec<2>(0.3819660113 * h, 0.2360679775 * h);
  const int m = n + 1;
  std::vector<double> val(static_cast<std::size_t>(m + 1) * (m + 1));
  const auto at = [&](int i, int j) -> double& { return val[static_cast<std::size_t>(i) * (m + 1) + j]; };
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j <= m; ++j) at(i, j) = v(o + Vec<2>(i * h, j * h));
  const double g1 = 0.5 - 0.5 / std::sqrt(3.0), g2 = 0.5 + 0.5 / std::sqrt(3.0);
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const std::array<Vec<2>, 4> pc = {o + Vec<2>(i * h, j * h), o + Vec<2>((i + 1) * h, j * h),
                                        o + Vec<2>((i + 1) * h, (j + 1) * h), o + Vec<2>(i * h, (j + 1) * h)};
      const std::array<double, 4> vc = {at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)};
      std::vector<Vec<2>> cross;
      for (int e = 0; e < 4; ++e) {
        const double va = vc[e], vb = vc[(e + 1) % 4];
        if ((va > 0.0) != (vb > 0.0)) {
          const double t = va / (va - vb);
          cross.push_back(pc[e] + t * (pc[(e + 1) % 4] - pc[e]));
        }
      }
      if (cross.size() == 4) {
        // Saddle: pair by the sign of the cell-centre value.
        const double vm = 0.25 * (vc[0] + vc[1] + vc[2] + vc[3]);
        if ((vm > 0.0) != (vc[0] > 0.0)) std::swap(cross[1], cross[3]);
      }
      for (std::size_t s = 0; s + 1 < cross.size(); s += 2) {
        const Vec<2> a = cross[s], b = cross[s + 1];
        const auto [t0, t1] = segment_ball_clip(a, b, x, r);
        if (t1 <= t0) continue;
        const Vec<2> pa = a + t0 * (b - a), pb = a + t1 * (b - a);
        const double len = (pb - pa).norm();
        const double f = v.gradient(pa + g1 * (pb - pa)).norm() + v.gradient(pa + g2 * (pb - pa)).norm();
        total += len * f;  // 2 · len · (f/2)
      }
    }
  }
  return total;
}

/// An AnalyticSolution exposed through the field interface.  Quadrature runs
/// on the supplied lattice, whose box is also the admissible domain.
template <int Dim>
class AnalyticField {
 public:
  static constexpr int dim = Dim;

  AnalyticField(AnalyticSolution<Dim> sol, GridSpec<Dim> lattice) : sol_(std::move(sol)), lattice_(std::move(lattice)) {}

  const AnalyticSolution<Dim>& solution() const { return sol_; }
  const GridSpec<Dim>& spec() const { return lattice_; }

  PointValue<Dim> probe(const Vec<Dim>& p) const { return {sol_.eval(p), sol_.grad(p), sol_.chi(p)}; }
  double value(const Vec<Dim>& p) const { return sol_.eval(p); }
  Vec<Dim> grad(const Vec<Dim>& p) const { return sol_.grad(p); }
  const GridSpec<Dim>& lattice_for(const Vec<Dim>&, double) const { return lattice_; }
  bool ball_interior(const Vec<Dim>& x, double r) const { return BallRegion<Dim>::make(lattice_, x, r).interior; }
  double resolution() const { return lattice_.h; }

 private:
  AnalyticSolution<Dim> sol_;
  GridSpec<Dim> lattice_;
};

}  // namespace fbscope
