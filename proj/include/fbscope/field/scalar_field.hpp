#pragma once

#include "fbscope/field/grid.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace fbscope {

/// Everything a quadrature rule needs at one point: the value, the gradient
/// used inside volume integrals and the local coverage of {χ = 1}.
template <int Dim>
struct PointValue {
  double u = 0.0;
  Vec<Dim> grad = Vec<Dim>::Zero();
  double chi = 0.0;
};

/// Nodal samples of a nonnegative u and its companion χ on a uniform grid.
///
/// χ is either binary (a sampled indicator, required to be 1 wherever u > 0)
/// or fractional in [0, 1] (e.g. χ_ε = 2B_ε(u_ε) from the perturbed problem).
/// Immutable after construction.
template <int Dim>
class ScalarField {
 public:
  static constexpr int dim = Dim;

  ScalarField(GridSpec<Dim> spec, std::vector<double> u, std::vector<double> chi,
              std::optional<double> lipschitz = std::nullopt, double tol_grad = 1e-6)
      : spec_(std::move(spec)), u_(std::move(u)), chi_(std::move(chi)) {
    const std::size_t n = spec_.node_count();
    if (u_.size() != n || chi_.size() != n) throw ParameterError("ScalarField: array size mismatch");
    chi_binary_ = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(u_[i] >= 0.0)) throw ParameterError("ScalarField: u must be nonnegative");
      if (!(chi_[i] >= 0.0 && chi_[i] <= 1.0)) throw ParameterError("ScalarField: chi must lie in [0,1]");
      if (chi_[i] != 0.0 && chi_[i] != 1.0) chi_binary_ = false;
      max_u_ = std::max(max_u_, u_[i]);
    }
    if (chi_binary_) {
      for (std::size_t i = 0; i < n; ++i)
        if (u_[i] > 0.0 && chi_[i] != 1.0) throw ParameterError("ScalarField: chi must be 1 where u > 0");
    }
    const double measured = max_discrete_slope();
    if (lipschitz) {
      if (*lipschitz < 0.0) throw ParameterError("ScalarField: Lipschitz bound must be nonnegative");
      if (measured > *lipschitz * (1.0 + tol_grad))
        throw ParameterError("ScalarField: discrete gradient exceeds the declared Lipschitz bound");
      lipschitz_ = *lipschitz;
    } else {
      lipschitz_ = measured;
    }
  }

  /// Samples u and χ at every node.
  template <class UFn, class ChiFn>
  static ScalarField sample(const GridSpec<Dim>& spec, UFn&& ufn, ChiFn&& chifn) {
    const std::size_t n = spec.node_count();
    std::vector<double> u(n), chi(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec<Dim> p = spec.node(spec.multi_index(i));
      u[i] = ufn(p);
      chi[i] = chifn(p);
    }
    return ScalarField(spec, std::move(u), std::move(chi));
  }

  const GridSpec<Dim>& spec() const { return spec_; }
  const std::vector<double>& values() const { return u_; }
  const std::vector<double>& chi() const { return chi_; }
  double lipschitz_bound() const { return lipschitz_; }
  bool chi_binary() const { return chi_binary_; }
  double max_value() const { return max_u_; }

  double at(const std::array<int, Dim>& i) const { return u_[spec_.index(i)]; }
  double chi_at(const std::array<int, Dim>& i) const { return chi_[spec_.index(i)]; }

  /// Multilinear interpolation; exact on multilinear functions.
  double interpolate(const Vec<Dim>& p) const {
    const Cell c = locate(p);
    double v = 0.0;
    for (int corner = 0; corner < (1 << Dim); ++corner) v += corner_weight(c, corner) * u_[corner_index(c, corner)];
    return v;
  }

  /// Central difference of the interpolant with stencil width h.
  Vec<Dim> gradient(const Vec<Dim>& p) const {
    if (spec_.boundary_distance(p) <= spec_.h * (1.0 - 1e-12))
      throw OutOfDomain("gradient: point within h of the grid boundary");
    Vec<Dim> g;
    for (int k = 0; k < Dim; ++k) {
      Vec<Dim> a = p, b = p;
      a[k] += spec_.h;
      b[k] -= spec_.h;
      g[k] = (interpolate(a) - interpolate(b)) / (2.0 * spec_.h);
    }
    return g;
  }

  /// Value, exact gradient of the interpolant and χ coverage in one cell lookup.
  ///
  /// For binary χ the coverage is 1 on any cell with a positive corner: a
  /// nonnegative multilinear interpolant with one positive corner is positive
  /// on the open cell, and χ ≥ χ_{u>0}.
  PointValue<Dim> probe(const Vec<Dim>& p) const {
    const Cell c = locate(p);
    PointValue<Dim> out;
    double chi_interp = 0.0;
    bool positive_corner = false;
    for (int corner = 0; corner < (1 << Dim); ++corner) {
      const std::size_t idx = corner_index(c, corner);
      const double w = corner_weight(c, corner);
      out.u += w * u_[idx];
      chi_interp += w * chi_[idx];
      positive_corner = positive_corner || u_[idx] > 0.0;
      for (int k = 0; k < Dim; ++k) {
        double dw = ((corner >> (Dim - 1 - k)) & 1) ? 1.0 : -1.0;
        for (int j = 0; j < Dim; ++j) {
          if (j == k) continue;
          const bool hi = (corner >> (Dim - 1 - j)) & 1;
          dw *= hi ? c.frac[j] : 1.0 - c.frac[j];
        }
        out.grad[k] += dw * u_[idx] / spec_.h;
      }
    }
    out.chi = (chi_binary_ && positive_corner) ? 1.0 : std::clamp(chi_interp, 0.0, 1.0);
    return out;
  }

  double value(const Vec<Dim>& p) const { return interpolate(p); }
  Vec<Dim> grad(const Vec<Dim>& p) const { return gradient(p); }

  /// Quadrature lattice: the field's own grid.
  const GridSpec<Dim>& lattice_for(const Vec<Dim>&, double) const { return spec_; }
  bool ball_interior(const Vec<Dim>& x, double r) const { return BallRegion<Dim>::make(spec_, x, r).interior; }
  double resolution() const { return spec_.h; }

 private:
  struct Cell {
    std::array<int, Dim> base;
    std::array<double, Dim> frac;
  };

  Cell locate(const Vec<Dim>& p) const {
    if (!spec_.contains(p)) throw OutOfDomain("interpolate: point outside the grid box");
    Cell c;
    for (int k = 0; k < Dim; ++k) {
      const double t = (p[k] - spec_.origin[k]) / spec_.h;
      int i = static_cast<int>(std::floor(t));
      i = std::clamp(i, 0, spec_.cells[k] - 1);
      c.base[k] = i;
      c.frac[k] = std::clamp(t - i, 0.0, 1.0);
    }
    return c;
  }

  // Corner bit (Dim-1-k) selects the upper node along axis k.
  std::size_t corner_index(const Cell& c, int corner) const {
    std::array<int, Dim> i = c.base;
    for (int k = 0; k < Dim; ++k) i[k] += (corner >> (Dim - 1 - k)) & 1;
    return spec_.index(i);
  }

  static double corner_weight(const Cell& c, int corner) {
    double w = 1.0;
    for (int k = 0; k < Dim; ++k) w *= ((corner >> (Dim - 1 - k)) & 1) ? c.frac[k] : 1.0 - c.frac[k];
    return w;
  }

  double max_discrete_slope() const {
    double best = 0.0;
    const auto n = spec_.nodes();
    for (std::size_t idx = 0; idx < u_.size(); ++idx) {
      const auto i = spec_.multi_index(idx);
      bool interior = true;
      for (int k = 0; k < Dim; ++k) interior = interior && i[k] > 0 && i[k] < n[k] - 1;
      if (!interior) continue;
      double g2 = 0.0;
      for (int k = 0; k < Dim; ++k) {
        auto a = i, b = i;
        ++a[k];
        --b[k];
        const double d = (u_[spec_.index(a)] - u_[spec_.index(b)]) / (2.0 * spec_.h);
        g2 += d * d;
      }
      best = std::max(best, std::sqrt(g2));
    }
    return best;
  }

  GridSpec<Dim> spec_;
  std::vector<double> u_;
  std::vector<double> chi_;
  double lipschitz_ = 0.0;
  double max_u_ = 0.0;
  bool chi_binary_ = true;
};

}  // namespace fbscope
