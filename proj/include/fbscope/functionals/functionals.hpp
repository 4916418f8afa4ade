#pragma once

#include "fbscope/field/quadrature.hpp"
#include "fbscope/field/scalar_field.hpp"
#include "fbscope/functionals/sample_types.hpp"

#include <random>
#include <vector>

namespace fbscope {

/// Tolerance used to certify M ≥ |B_1| on a single sample.
template <int Dim>
double certification_tolerance(const FunctionalSample<Dim>& s) {
  return std::max(2.0 * s.quad_err, 5e-3 * unit_ball_volume(Dim));
}

/// D, H, M, N, V at (x, r) by quadrature on the field's lattice.
template <class Field>
FunctionalSample<Field::dim> sample(const Field& f, const Vec<Field::dim>& x, double r) {
  constexpr int n = Field::dim;
  if (!(r > 0.0)) throw ParameterError("sample: radius must be positive");
  if (!f.ball_interior(x, r)) throw OutOfDomain("sample: ball not interior to the data region");
  const auto vol = field_ball_integral(f, x, r, [](const Vec<n>&, const PointValue<n>& pv) {
    return Eigen::Vector2d(pv.grad.squaredNorm() + pv.chi, 1.0 - pv.chi);
  });
  const auto surf = field_sphere_integral(f, x, r, [](const Vec<n>&, double u) { return u * u; });
  FunctionalSample<n> s;
  s.x = x;
  s.r = r;
  const double rn = std::pow(r, n);
  s.D = vol.value[0] / rn;
  s.H = surf.value / (rn * r);
  s.quad_err = vol.error[0] / rn + surf.error / (rn * r);
  finish_sample(s, vol.value[1] / rn);
  s.n_defined = s.H > 0.0 && s.M >= unit_ball_volume(n) - certification_tolerance(s);
  return s;
}

/// Quadrature uncertainty of N derived from that of D and H.
template <int Dim>
double n_error(const FunctionalSample<Dim>& s) {
  if (!(s.H > 0.0)) return kNaN;
  return s.quad_err * (1.0 + std::abs(s.N)) / s.H;
}

/// r∫_{B_r}|∇u|² / ∫_{∂B_r}u², the quantity N + V must reproduce.
template <class Field>
double almgren_ratio(const Field& f, const Vec<Field::dim>& x, double r) {
  constexpr int n = Field::dim;
  const auto g = field_ball_integral(f, x, r, [](const Vec<n>&, const PointValue<n>& pv) { return pv.grad.squaredNorm(); });
  const auto s = field_sphere_integral(f, x, r, [](const Vec<n>&, double u) { return u * u; });
  return s.value > 0.0 ? r * g.value / s.value : kNaN;
}

struct ProfileInterval {
  double r_lo = 0.0;
  double r_hi = 0.0;
  double dM = 0.0;
  double dN = kNaN;
  double dH = 0.0;
  bool m_ok = true;
  bool n_checked = false;
  bool n_ok = true;
  bool h_ok = true;
};

template <int Dim>
struct RadialProfile {
  Vec<Dim> x = Vec<Dim>::Zero();
  std::vector<double> radii;
  std::vector<FunctionalSample<Dim>> samples;
  std::vector<ProfileInterval> intervals;
  double u_center = 0.0;
  int certified_from = -1;  // first rung with M ≥ |B_1| − tol, or −1
  bool m_monotone = true;
  bool n_monotone = true;
  bool h_monotone = true;
};

/// Samples along an explicit increasing radius ladder and records the
/// monotonicity of M everywhere, of N on certified rungs and of H where N
/// is certified.
template <class Field>
RadialProfile<Field::dim> profile_at(const Field& f, const Vec<Field::dim>& x, const std::vector<double>& radii) {
  constexpr int n = Field::dim;
  if (radii.size() < 2) throw ParameterError("profile: need at least two radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw ParameterError("profile: radii must be positive");
    if (i > 0 && !(radii[i] > radii[i - 1])) throw ParameterError("profile: radii must be strictly increasing");
  }
  RadialProfile<n> p;
  p.x = x;
  p.radii = radii;
  p.u_center = f.value(x);
  for (double r : radii) p.samples.push_back(sample(f, x, r));
  for (std::size_t i = 0; i < p.samples.size(); ++i) {
    auto& s = p.samples[i];
    if (p.certified_from < 0 && s.n_defined) p.certified_from = static_cast<int>(i);
    s.n_defined = p.certified_from >= 0 && s.H > 0.0;
  }
  for (std::size_t i = 0; i + 1 < p.samples.size(); ++i) {
    const auto& a = p.samples[i];
    const auto& b = p.samples[i + 1];
    ProfileInterval iv;
    iv.r_lo = a.r;
    iv.r_hi = b.r;
    iv.dM = b.M - a.M;
    iv.m_ok = iv.dM >= -2.0 * (a.quad_err + b.quad_err);
    iv.dH = b.H - a.H;
    if (a.n_defined && b.n_defined) {
      iv.n_checked = true;
      iv.dN = b.N - a.N;
      iv.n_ok = iv.dN >= -2.0 * (n_error(a) + n_error(b));
      iv.h_ok = iv.dH >= -2.0 * (a.quad_err + b.quad_err);
    }
    p.m_monotone = p.m_monotone && iv.m_ok;
    p.n_monotone = p.n_monotone && iv.n_ok;
    p.h_monotone = p.h_monotone && iv.h_ok;
    p.intervals.push_back(iv);
  }
  return p;
}

/// Geometric ladder from r_min to r_max.
inline std::vector<double> geometric_radii(double r_min, double r_max, int n_radii) {
  if (n_radii < 2 || !(r_min > 0.0) || !(r_max > r_min)) throw ParameterError("radius ladder: need 0 < r_min < r_max");
  std::vector<double> radii(n_radii);
  const double q = std::pow(r_max / r_min, 1.0 / (n_radii - 1));
  for (int i = 0; i < n_radii; ++i) radii[i] = r_min * std::pow(q, i);
  radii.back() = r_max;
  return radii;
}

template <class Field>
RadialProfile<Field::dim> profile(const Field& f, const Vec<Field::dim>& x, double r_min, double r_max, int n_radii) {
  if (n_radii < 8) throw ParameterError("profile: n_radii must be >= 8");
  if (!f.ball_interior(x, r_max)) throw OutOfDomain("profile: r_max ball not interior");
  return profile_at(f, x, geometric_radii(r_min, r_max, n_radii));
}

struct DerivativeCheck {
  double lhs = 0.0;       // centred finite difference of the functional
  double rhs = 0.0;       // boundary-integral formula
  double rhs_alt = kNaN;  // second form, where there is one
  double residual = 0.0;  // worst |lhs − rhs|
  double tol = 0.0;       // quadrature-propagated uncertainty of the comparison
  double relative = 0.0;  // residual / max(|lhs|, |rhs|), 0 when both sides are within tol of 0
};

namespace detail {

inline void finish_check(DerivativeCheck& c) {
  c.residual = std::abs(c.lhs - c.rhs);
  double scale = std::max(std::abs(c.lhs), std::abs(c.rhs));
  if (!std::isnan(c.rhs_alt)) {
    c.residual = std::max(c.residual, std::abs(c.lhs - c.rhs_alt));
    scale = std::max(scale, std::abs(c.rhs_alt));
  }
  c.relative = scale > c.tol ? std::max(0.0, c.residual - c.tol) / scale : 0.0;
}

template <class Field>
double fd_step(const Field& f, double r) {
  return std::max(2.0 * f.resolution(), 0.05 * r);
}

}  // namespace detail

/// M'(r) by centred differences against 2 r^{−(n+2)} ∫_{∂B_r}(u − (y−x)·∇u)².
template <class Field>
DerivativeCheck m_derivative_check(const Field& f, const Vec<Field::dim>& x, double r) {
  constexpr int n = Field::dim;
  const double d = detail::fd_step(f, r);
  if (!(r - d > 0.0)) throw ParameterError("m_derivative_check: radius too small for the difference step");
  const auto lo = sample(f, x, r - d);
  const auto hi = sample(f, x, r + d);
  // The second component swaps the stencil gradient for the cell gradient;
  // their gap measures how well ∇u is resolved on the sphere.
  const auto rhs = field_sphere_integral(f, x, r, [&](const Vec<n>& y, double u) {
    const double t = u - (y - x).dot(f.grad(y));
    const double s = u - (y - x).dot(f.probe(y).grad);
    return Eigen::Vector2d(t * t, s * s);
  });
  const double scale = 2.0 / std::pow(r, n + 2);
  DerivativeCheck c;
  c.lhs = (hi.M - lo.M) / (2.0 * d);
  c.rhs = scale * rhs.value[0];
  c.tol = (hi.quad_err + lo.quad_err) / (2.0 * d) + scale * (rhs.error[0] + std::abs(rhs.value[0] - rhs.value[1]));
  detail::finish_check(c);
  return c;
}

/// N'(r) by centred differences against both boundary-integral forms.
template <class Field>
DerivativeCheck n_derivative_check(const Field& f, const Vec<Field::dim>& x, double r) {
  constexpr int n = Field::dim;
  const auto mid = sample(f, x, r);
  if (!mid.n_defined) throw PreconditionError("n_derivative_check: frequency not certified at this radius");
  const double d = detail::fd_step(f, r);
  if (!(r - d > 0.0)) throw ParameterError("n_derivative_check: radius too small for the difference step");
  const auto lo = sample(f, x, r - d);
  const auto hi = sample(f, x, r + d);
  const double N = mid.N, V = mid.V;
  const auto integrals = field_sphere_integral(f, x, r, [&](const Vec<n>& y, double u) {
    const double gy = (y - x).dot(f.grad(y));
    const double gc = (y - x).dot(f.probe(y).grad);
    const double a = gy - (N + V) * u;
    const double b = gy - N * u;
    const double a2 = gc - (N + V) * u;
    const double b2 = gc - N * u;
    return Eigen::Vector4d(a * a, b * b, a2 * a2, b2 * b2);
  });
  const auto& I = integrals.value;
  const double scale = 2.0 / (mid.H * std::pow(r, n + 2));
  DerivativeCheck c;
  c.lhs = (hi.N - lo.N) / (2.0 * d);
  c.rhs = scale * I[0] + 2.0 / r * (V * V + V * (N - 1.0));
  c.rhs_alt = scale * I[1] + 2.0 / r * V * (N - 1.0);
  const double grad_gap = std::max(std::abs(I[0] - I[2]), std::abs(I[1] - I[3]));
  c.tol = (n_error(hi) + n_error(lo)) / (2.0 * d) + scale * (integrals.error.maxCoeff() + grad_gap) +
          2.0 / r * n_error(mid) * (1.0 + std::abs(V));
  detail::finish_check(c);
  return c;
}

struct LimitEstimate {
  double M0 = kNaN;
  double N0 = kNaN;
  double H0 = kNaN;
  bool m_stable = false;
  bool n_stable = false;
  bool interior_positive = false;  // u(x) > 0 detected: M0 = −∞
  bool stable() const { return m_stable; }
};

/// M(0+), N(0+), H(0+) from the bottom of a ladder.
///
/// M and N take one Richardson step with rate r² from the two smallest
/// rungs, clamped so the limit never exceeds the bottom value (both are
/// nondecreasing in r).  H(0+) takes the same step, clamped to [0, H(r₁)].  A ladder is
/// unstable when the two smallest rungs differ by more than 5% (M relative
/// to |B_1|, N relative to max(|N|, 1)).
template <int Dim>
LimitEstimate limit_extrapolate(const RadialProfile<Dim>& p) {
  if (p.samples.size() < 2) throw ParameterError("limit_extrapolate: profile too short");
  const double b1 = unit_ball_volume(Dim);
  const auto& s1 = p.samples[0];
  const auto& s2 = p.samples[1];
  const double rho2 = (s2.r / s1.r) * (s2.r / s1.r);
  LimitEstimate e;
  e.H0 = std::clamp(s1.H - (s2.H - s1.H) / (rho2 - 1.0), 0.0, std::max(0.0, s1.H));
  // u(x) is compared with the rms of u on the smallest sphere.
  const double rms = std::sqrt(std::max(0.0, s1.H) * s1.r * s1.r / unit_sphere_area(Dim));
  if (p.u_center > 0.5 * rms && p.u_center > 0.0) {
    e.interior_positive = true;
    e.M0 = kNegInf;
    e.N0 = kNaN;
    e.m_stable = true;
    e.n_stable = false;
    return e;
  }
  e.M0 = std::min(s1.M, s1.M - (s2.M - s1.M) / (rho2 - 1.0));
  e.m_stable = std::abs(s2.M - s1.M) <= 0.05 * b1;
  if (s1.H > 0.0 && s2.H > 0.0) {
    e.N0 = std::min(s1.N, s1.N - (s2.N - s1.N) / (rho2 - 1.0));
    e.n_stable = std::abs(s2.N - s1.N) <= 0.05 * std::max(1.0, std::abs(s1.N));
  }
  return e;
}

struct VariationalResidual {
  double residual = 0.0;  // max over test fields of the normalized |∫ ... |
  double quad_tol = 0.0;  // max over test fields of the normalized quadrature estimate
  std::vector<double> per_field;
};

struct TestFieldSpec {
  int count = 32;
  std::uint64_t seed = 0;
  double min_scale = 0.15;  // half-width range as a fraction of the shortest box side
  double max_scale = 0.3;
};

template <int Dim>
struct BumpField {
  Vec<Dim> center;
  double half_width;
  Vec<Dim> direction;

  /// φ(y) = Π(1 − t_k²)³ with t = (y − c)/s, and its gradient.
  std::pair<double, Vec<Dim>> phi(const Vec<Dim>& y) const {
    std::array<double, Dim> f, df;
    for (int k = 0; k < Dim; ++k) {
      const double t = (y[k] - center[k]) / half_width;
      if (std::abs(t) >= 1.0) return {0.0, Vec<Dim>::Zero()};
      const double a = 1.0 - t * t;
      f[k] = a * a * a;
      df[k] = -6.0 * t * a * a / half_width;
    }
    double v = 1.0;
    for (int k = 0; k < Dim; ++k) v *= f[k];
    Vec<Dim> g;
    for (int k = 0; k < Dim; ++k) {
      double gk = df[k];
      for (int j = 0; j < Dim; ++j)
        if (j != k) gk *= f[j];
      g[k] = gk;
    }
    return {v, g};
  }
};

/// Seeded family of tensor-product bump fields ξ = d·φ supported inside the
/// box with a 2h margin.
template <int Dim>
std::vector<BumpField<Dim>> make_test_fields(const GridSpec<Dim>& box, const TestFieldSpec& spec) {
  if (spec.count < 1) throw ParameterError("variational_residual: need at least one test field");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double side = std::numeric_limits<double>::infinity();
  for (int k = 0; k < Dim; ++k) side = std::min(side, box.cells[k] * box.h);
  std::vector<BumpField<Dim>> out;
  for (int j = 0; j < spec.count; ++j) {
    BumpField<Dim> b;
    b.half_width = side * (spec.min_scale + (spec.max_scale - spec.min_scale) * unit(rng));
    const double margin = b.half_width + 2.0 * box.h;
    for (int k = 0; k < Dim; ++k) {
      const double lo = box.origin[k] + margin;
      const double hi = box.origin[k] + box.cells[k] * box.h - margin;
      b.center[k] = lo + (hi - lo) * unit(rng);
    }
    Vec<Dim> d;
    do {
      for (int k = 0; k < Dim; ++k) d[k] = gauss(rng);
    } while (d.norm() < 1e-3);
    b.direction = d.normalized();
    out.push_back(b);
  }
  return out;
}

namespace detail {

// ∫ over the axis-aligned box [lo, hi] with cells of the lattice subdivided
// `sub` times, each sampled at the centre of its overlap with the box.
template <int Dim, class Fn>
auto box_rule(const GridSpec<Dim>& lattice, const Vec<Dim>& lo, const Vec<Dim>& hi, int sub, Fn&& fn) {
  using R = std::decay_t<decltype(fn(lo))>;
  R acc = zero_like<R>();
  const double hs = lattice.h / sub;
  std::array<long, Dim> a, b;
  for (int k = 0; k < Dim; ++k) {
    a[k] = static_cast<long>(std::floor((lo[k] - lattice.origin[k]) / hs));
    b[k] = static_cast<long>(std::ceil((hi[k] - lattice.origin[k]) / hs));
  }
  std::array<long, Dim> i = a;
  while (true) {
    Vec<Dim> c;
    double w = 1.0;
    for (int k = 0; k < Dim; ++k) {
      const double c0 = std::max(lattice.origin[k] + i[k] * hs, lo[k]);
      const double c1 = std::min(lattice.origin[k] + (i[k] + 1) * hs, hi[k]);
      w *= std::max(0.0, c1 - c0);
      c[k] = 0.5 * (c0 + c1);
    }
    if (w > 0.0) acc += w * fn(c);
    int k = Dim - 1;
    while (k >= 0 && ++i[k] >= b[k]) {
      i[k] = a[k];
      --k;
    }
    if (k < 0) break;
  }
  return acc;
}

}  // namespace detail

/// First-variation residual of the energy ∫(|∇u|² + χ) along seeded bump
/// fields: |∫((|∇u|² + χ) div ξ − 2 ∇u·Dξ∇u)| / (∫|φ| + ∫|∇φ|).
template <class Field>
VariationalResidual variational_residual(const Field& f, const TestFieldSpec& spec = {}) {
  constexpr int n = Field::dim;
  const auto& box = f.spec();
  VariationalResidual out;
  for (const auto& xi : make_test_fields(box, spec)) {
    const Vec<n> lo = xi.center - Vec<n>::Constant(xi.half_width);
    const Vec<n> hi = xi.center + Vec<n>::Constant(xi.half_width);
    const auto integrand = [&](const Vec<n>& y) {
      const auto [phi, dphi] = xi.phi(y);
      if (phi == 0.0 && dphi.isZero()) return Eigen::Vector3d::Zero().eval();
      const auto pv = f.probe(y);
      const double div = xi.direction.dot(dphi);
      const double first = (pv.grad.squaredNorm() + pv.chi) * div - 2.0 * pv.grad.dot(xi.direction) * dphi.dot(pv.grad);
      return Eigen::Vector3d(first, std::abs(phi), dphi.norm());
    };
    const auto coarse = detail::box_rule(box, lo, hi, 1, integrand);
    const auto fine = detail::box_rule(box, lo, hi, 2, integrand);
    const double norm = fine[1] + fine[2];
    const double r = std::abs(fine[0]) / norm;
    out.per_field.push_back(r);
    out.residual = std::max(out.residual, r);
    out.quad_tol = std::max(out.quad_tol, std::abs(fine[0] - coarse[0]) / norm);
  }
  return out;
}

}  // namespace fbscope
