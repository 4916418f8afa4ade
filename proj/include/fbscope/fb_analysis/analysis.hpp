#pragma once

#include "fbscope/fb_analysis/boundary.hpp"
#include "fbscope/functionals/functionals.hpp"

#include <Eigen/Eigenvalues>

#include <map>

namespace fbscope {

/// Radii and thresholds for point classification, in units of the grid
/// spacing h of the extracted point set.
struct ClassifyConfig {
  double r_min_cells = 4.0;
  double r_max_cells = 16.0;
  int n_radii = 8;
  double tol_class = 0.05;  // × |B_1|
  double gap = 0.15;        // × |B_1|
  double nu_radius_cells = 8.0;
  // H is treated as vanishing at 0+ when it decays at least like r^γ with
  // γ above this exponent between the two smallest rungs.
  double h_decay_exponent = 0.25;
};

/// Normal estimate at x: top eigenvector of ∫_{B_ρ(x) ∩ {u>t}} ∇u ∇uᵀ.
/// Returns zero when the ball leaves the data region or carries no gradient.
template <class Field>
Vec<Field::dim> crease_normal(const Field& f, const Vec<Field::dim>& x, double rho, double threshold = 0.0) {
  constexpr int n = Field::dim;
  if (!f.ball_interior(x, rho)) return Vec<n>::Zero();
  const auto m = field_ball_integral(f, x, rho, [&](const Vec<n>&, const PointValue<n>& pv) -> Mat<n> {
    if (pv.u <= threshold) return Mat<n>::Zero();
    return pv.grad * pv.grad.transpose();
  });
  if (!(m.value.trace() > 0.0)) return Vec<n>::Zero();
  Eigen::SelfAdjointEigenSolver<Mat<n>> es(m.value);
  Vec<n> nu = es.eigenvectors().col(n - 1);
  // Fix the sign so that the largest component is positive.
  Eigen::Index k = 0;
  nu.cwiseAbs().maxCoeff(&k);
  if (nu[k] < 0.0) nu = -nu;
  return nu;
}

/// |B_r(x) ∩ {u > t}| / |B_r|.
template <class Field>
double positive_density(const Field& f, const Vec<Field::dim>& x, double r, double threshold = 0.0) {
  constexpr int n = Field::dim;
  const auto v = field_ball_integral(f, x, r, [&](const Vec<n>&, const PointValue<n>& pv) {
    return pv.u > threshold ? 1.0 : 0.0;
  });
  return v.value / (unit_ball_volume(n) * std::pow(r, n));
}

/// Fills M0, N0, H0, labels and normals.  Points whose ladder does not fit
/// inside the data region, whose ladder is unstable, or whose M0 lies between
/// the bands stay unresolved.
template <class Field>
BoundaryPointSet<Field::dim> classify(const Field& f, BoundaryPointSet<Field::dim> pts, const ClassifyConfig& cfg = {}) {
  constexpr int n = Field::dim;
  const double h = pts.h;
  if (!(h > 0.0)) throw ParameterError("classify: point set carries no grid spacing");
  if (cfg.r_min_cells < 4.0 - 1e-12) throw ParameterError("classify: ladder must reach down to 4h");
  if (!(cfg.r_max_cells > cfg.r_min_cells) || cfg.n_radii < 2) throw ParameterError("classify: bad ladder");
  const double b1 = unit_ball_volume(n);
  const double tol_H0 = std::pow(cfg.r_min_cells * h, 2);
  const auto radii = geometric_radii(cfg.r_min_cells * h, cfg.r_max_cells * h, cfg.n_radii);
  for (auto& p : pts.points) {
    p.classified = true;
    p.label = PointClass::Unresolved;
    if (!f.ball_interior(p.x, radii.back())) {
      p.out_of_domain = true;
      continue;
    }
    const auto prof = profile_at(f, p.x, radii);
    const auto lim = limit_extrapolate(prof);
    p.M0 = lim.M0;
    p.N0 = lim.N0;
    p.H0 = lim.H0;
    const auto& s1 = prof.samples[0];
    const auto& s2 = prof.samples[1];
    if (s1.H > 0.0 && s2.H > 0.0) {
      p.H_growth = std::log(s2.H / s1.H) / std::log(s2.r / s1.r);
      p.H_limit = p.H_growth > cfg.h_decay_exponent ? 0.0 : p.H0;
    } else {
      p.H_limit = 0.0;
    }
    if (lim.interior_positive || !lim.m_stable) continue;
    if (p.M0 >= b1 * (1.0 - cfg.tol_class)) {
      p.label = p.H_limit <= tol_H0 ? PointClass::Degenerate : PointClass::SigmaH;
      p.nu = crease_normal(f, p.x, cfg.nu_radius_cells * h, pts.threshold);
    } else if (p.M0 <= b1 * (1.0 - cfg.gap) && p.M0 >= b1 * (0.5 - cfg.tol_class)) {
      // Densities below |B_1|/2 cannot occur on the boundary; such ladders
      // are left unresolved rather than called regular.
      p.label = PointClass::Regular;
    }
  }
  return pts;
}

/// True for labels that belong to the highest-density set.
inline bool highest_density(PointClass c) { return c == PointClass::SigmaH || c == PointClass::Degenerate; }

template <int Dim>
std::map<std::string, int> label_counts(const BoundaryPointSet<Dim>& pts) {
  std::map<std::string, int> c{{"regular", 0}, {"sigmaH", 0}, {"degenerate", 0}, {"unresolved", 0}};
  for (const auto& p : pts.points) ++c[to_string(p.label)];
  return c;
}

/// Boundary-measure share of highest-density points whose N0 exceeds the
/// threshold, among all highest-density points.
template <int Dim>
double high_frequency_share(const BoundaryPointSet<Dim>& pts, double n_threshold) {
  double all = 0.0, high = 0.0;
  for (const auto& p : pts.points) {
    if (!highest_density(p.label)) continue;
    all += p.measure;
    if (p.N0 > n_threshold) high += p.measure;
  }
  return all > 0.0 ? high / all : 0.0;
}

namespace detail {

template <class Field>
ScalarField<Field::dim> rescale(const Field& f, const Vec<Field::dim>& x, double r, double divisor, int cells) {
  constexpr int n = Field::dim;
  if (!(r > 0.0)) throw ParameterError("blowup: radius must be positive");
  const auto& box = f.spec();
  if (!box.contains(x - Vec<n>::Constant(r)) || !box.contains(x + Vec<n>::Constant(r)))
    throw OutOfDomain("blowup: rescaled cube leaves the data region");
  const auto g = GridSpec<n>::cube(-1.0, 1.0, cells);
  std::vector<double> u(g.node_count()), chi(g.node_count());
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const Vec<n> p = x + r * g.node(g.multi_index(i));
    const auto pv = f.probe(p);
    u[i] = std::max(0.0, pv.u) / divisor;
    chi[i] = pv.chi;
  }
  // A binary χ must cover every node where u > 0; interpolated data can
  // carry χ < 1 next to a positive node.
  bool binary = true;
  for (double c : chi) binary = binary && (c == 0.0 || c == 1.0);
  if (binary)
    for (std::size_t i = 0; i < u.size(); ++i)
      if (u[i] > 0.0) chi[i] = 1.0;
  return ScalarField<n>(g, std::move(u), std::move(chi));
}

}  // namespace detail

/// u(x + r y)/r and χ(x + r y) on [−1, 1]^n with `cells` cells per axis.
template <class Field>
ScalarField<Field::dim> blowup(const Field& f, const Vec<Field::dim>& x, double r, int cells = 64) {
  return detail::rescale(f, x, r, r, cells);
}

/// u(x + r y)/(r √H_x(r)): unit H at radius 1.
template <class Field>
ScalarField<Field::dim> renormalize(const Field& f, const Vec<Field::dim>& x, double r, int cells = 64) {
  constexpr int n = Field::dim;
  if (!f.ball_interior(x, r)) throw OutOfDomain("renormalize: ball not interior to the data region");
  const auto s = field_sphere_integral(f, x, r, [](const Vec<n>&, double u) { return u * u; });
  const double H = s.value / std::pow(r, n + 1);
  if (!(H > 0.0)) throw PreconditionError("renormalize: H vanishes at this radius");
  return detail::rescale(f, x, r, r * std::sqrt(H), cells);
}


struct DeviationFunctionals {
  double energy_dev = kNaN;
  double profile_dev = kNaN;
  double H = kNaN;  // H_x(r) used for the target slope
};

/// energy_dev = r∫_{B_r}(|∇u|² + χ − 1) / ∫_{∂B_r}u², and
/// profile_dev = r∫_{B_r}|∇u − α√H_x(r) sgn((y−x)·ν) ν|² / ∫_{∂B_r}u².
template <class Field>
DeviationFunctionals deviation_functionals(const Field& f, const Vec<Field::dim>& x, double r, const Vec<Field::dim>& nu) {
  constexpr int n = Field::dim;
  if (!(nu.norm() > 0.0)) throw ParameterError("deviation_functionals: normal must be nonzero");
  const Vec<n> e = nu.normalized();
  const auto s = field_sphere_integral(f, x, r, [](const Vec<n>&, double u) { return u * u; });
  if (!(s.value > 0.0)) throw PreconditionError("deviation_functionals: H vanishes at this radius");
  DeviationFunctionals d;
  d.H = s.value / std::pow(r, n + 1);
  const double slope = alpha_n(n) * std::sqrt(d.H);
  const auto v = field_ball_integral(f, x, r, [&](const Vec<n>& p, const PointValue<n>& pv) {
    const double side = (p - x).dot(e);
    const Vec<n> target = (side > 0.0 ? slope : side < 0.0 ? -slope : 0.0) * e;
    return Eigen::Vector2d(pv.grad.squaredNorm() + pv.chi - 1.0, (pv.grad - target).squaredNorm());
  });
  d.energy_dev = r * v.value[0] / s.value;
  d.profile_dev = r * v.value[1] / s.value;
  return d;
}

struct MeasureRung {
  double r = 0.0;
  double measured = 0.0;
  double measured_err = 0.0;
  double predicted = 0.0;
  double mismatch = kNaN;  // |measured − predicted| / measured
  bool contaminated = false;
};

template <int Dim>
struct MeasureProfile {
  Vec<Dim> x = Vec<Dim>::Zero();
  double sigma = 0.0;
  std::vector<MeasureRung> rungs;
  bool measured_monotone = true;
  double max_mismatch() const {
    double m = 0.0;
    for (const auto& r : rungs)
      if (std::isfinite(r.mismatch)) m = std::max(m, r.mismatch);
    return m;
  }
};

/// Per-point weight of the predicted measure: 1 on regular points,
/// 2α√H0 on highest-density points, 0 on unresolved ones.
template <int Dim>
double measure_weight(const BoundaryPoint<Dim>& p) {
  switch (p.label) {
    case PointClass::Regular: return 1.0;
    case PointClass::SigmaH:
    case PointClass::Degenerate: return 2.0 * alpha_n(Dim) * std::sqrt(std::max(0.0, p.H0));
    case PointClass::Unresolved: return 0.0;
  }
  return 0.0;
}

namespace detail {

// The radial cutoff used by laplacian_mass.
inline double cutoff(double rho, double r, double sigma) {
  const double inner = r - 0.5 * sigma;
  if (rho <= inner) return 1.0;
  if (rho >= r + 0.5 * sigma) return 0.0;
  const double c = std::cos(0.5 * std::numbers::pi * (rho - inner) / sigma);
  return c * c;
}

// ∫ w η over the extracted boundary, w interpolated linearly from the
// facet vertices.
template <int Dim>
double weighted_boundary_mass(const BoundaryPointSet<Dim>& pts, const std::vector<double>& w, const Vec<Dim>& x,
                              double r, double sigma) {
  const double reach = r + 0.5 * sigma + 2.0 * pts.h;
  double total = 0.0;
  for (const auto& fac : pts.facets) {
    if ((pts.points[fac[0]].x - x).norm() > reach) continue;
    if constexpr (Dim == 2) {
      const auto& a = pts.points[fac[0]].x;
      const auto& b = pts.points[fac[1]].x;
      const double len = (b - a).norm();
      static constexpr std::array<double, 3> gx{0.1127016653792583, 0.5, 0.8872983346207417};
      static constexpr std::array<double, 3> gw{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
      for (int k = 0; k < 3; ++k) {
        const Vec<2> p = a + gx[k] * (b - a);
        const double wt = (1.0 - gx[k]) * w[fac[0]] + gx[k] * w[fac[1]];
        total += len * gw[k] * wt * cutoff((p - x).norm(), r, sigma);
      }
    } else {
      Vec<3> c = Vec<3>::Zero();
      double wc = 0.0;
      for (int id : fac) {
        c += pts.points[id].x;
        wc += w[id];
      }
      c /= static_cast<double>(fac.size());
      wc /= static_cast<double>(fac.size());
      for (std::size_t i = 0; i < fac.size(); ++i) {
        const int ia = fac[i], ib = fac[(i + 1) % fac.size()];
        const Vec<3>& a = pts.points[ia].x;
        const Vec<3>& b = pts.points[ib].x;
        const double area = 0.5 * (a - c).cross(b - c).norm();
        // Edge-midpoint rule, exact for quadratics on a triangle.
        const std::array<std::pair<Vec<3>, double>, 3> mids{{{0.5 * (a + b), 0.5 * (w[ia] + w[ib])},
                                                              {0.5 * (a + c), 0.5 * (w[ia] + wc)},
                                                              {0.5 * (b + c), 0.5 * (w[ib] + wc)}}};
        for (const auto& [p, wt] : mids) total += area / 3.0 * wt * cutoff((p - x).norm(), r, sigma);
      }
    }
  }
  return total;
}

}  // namespace detail

/// Measured Δu(B_r(x)) against the measure predicted from the labels, both
/// smoothed by the same cutoff of width sigma (default 4h).
template <class Field>
MeasureProfile<Field::dim> measure_profile(const Field& f, const Vec<Field::dim>& x,
                                           const BoundaryPointSet<Field::dim>& pts, const std::vector<double>& radii,
                                           double sigma = 0.0) {
  constexpr int n = Field::dim;
  if (radii.empty()) throw ParameterError("measure_profile: empty ladder");
  if (sigma <= 0.0) sigma = 4.0 * pts.h;
  std::vector<double> w(pts.points.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!pts.points[i].classified) throw PreconditionError("measure_profile: points must be classified first");
    w[i] = measure_weight(pts.points[i]);
  }
  MeasureProfile<n> mp;
  mp.x = x;
  mp.sigma = sigma;
  for (double r : radii) {
    MeasureRung rung;
    rung.r = r;
    const auto m = laplacian_mass(f, x, r, sigma);
    rung.measured = m.value;
    rung.measured_err = m.error;
    rung.predicted = detail::weighted_boundary_mass(pts, w, x, r, sigma);
    for (const auto& p : pts.points)
      if (p.label == PointClass::Unresolved && (p.x - x).norm() < r + 0.5 * sigma) rung.contaminated = true;
    rung.mismatch = rung.measured > 0.0 ? std::abs(rung.measured - rung.predicted) / rung.measured
                                        : (rung.predicted == 0.0 ? 0.0 : kNaN);
    if (!mp.rungs.empty()) {
      const auto& prev = mp.rungs.back();
      if (rung.measured < prev.measured - 2.0 * (rung.measured_err + prev.measured_err)) mp.measured_monotone = false;
    }
    mp.rungs.push_back(rung);
  }
  return mp;
}

}  // namespace fbscope
