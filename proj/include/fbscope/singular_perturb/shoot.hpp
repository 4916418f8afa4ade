#pragma once

#include "fbscope/singular_perturb/beta.hpp"

#include <algorithm>
#include <functional>
#include <vector>

namespace fbscope {

/// Trajectory of u'' = β_ε(u) on a 1D interval.
struct Profile1D {
  std::vector<double> x;
  std::vector<double> u;
  std::vector<double> du;
  double first_integral = 0.0;  // (u')²/2 − B_ε(u) at the start
  double drift = 0.0;           // max deviation of the first integral along the path

  /// Cubic Hermite interpolation between stored steps.
  double value(double t) const {
    if (x.empty()) throw PreconditionError("Profile1D: empty trajectory");
    const bool up = x.back() >= x.front();
    const double lo = up ? x.front() : x.back();
    const double hi = up ? x.back() : x.front();
    if (t < lo - 1e-12 || t > hi + 1e-12) throw OutOfDomain("Profile1D: point outside the trajectory");
    const auto it = up ? std::lower_bound(x.begin(), x.end(), t)
                       : std::lower_bound(x.begin(), x.end(), t, std::greater<double>());
    std::size_t j = static_cast<std::size_t>(it - x.begin());
    if (j == 0) return u.front();
    if (j >= x.size()) return u.back();
    const std::size_t i = j - 1;
    const double hstep = x[j] - x[i];
    if (hstep == 0.0) return u[j];
    const double s = (t - x[i]) / hstep;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return h00 * u[i] + h10 * hstep * du[i] + h01 * u[j] + h11 * hstep * du[j];
  }
};

namespace detail {

struct State1D {
  double u;
  double du;
};

inline State1D rk4(const BetaSpec& b, State1D y, double dt) {
  const auto f = [&](const State1D& s) { return State1D{s.du, b.beta_eps(s.u)}; };
  const State1D k1 = f(y);
  const State1D k2 = f({y.u + 0.5 * dt * k1.u, y.du + 0.5 * dt * k1.du});
  const State1D k3 = f({y.u + 0.5 * dt * k2.u, y.du + 0.5 * dt * k2.du});
  const State1D k4 = f({y.u + dt * k3.u, y.du + dt * k3.du});
  return {y.u + dt / 6.0 * (k1.u + 2 * k2.u + 2 * k3.u + k4.u),
          y.du + dt / 6.0 * (k1.du + 2 * k2.du + 2 * k3.du + k4.du)};
}

}  // namespace detail

/// Integrates u'' = β_ε(u) from (x0, u0, u0') to x1 with RK4. Steps are split
/// where u crosses 0 or ε so that no step straddles a kink of β_ε.
inline Profile1D shoot_1d(const BetaSpec& b, double x0, double u0, double du0, double x1, double step = 0.0,
                          double blowup = 1e3) {
  const double eps = b.epsilon();
  if (step <= 0.0) step = eps / 64.0;
  if (x1 == x0) throw ParameterError("shoot_1d: empty interval");
  const double dir = x1 > x0 ? 1.0 : -1.0;
  const auto energy = [&](const detail::State1D& s) { return 0.5 * s.du * s.du - b.B_eps(s.u); };
  Profile1D p;
  detail::State1D y{u0, du0};
  double x = x0;
  p.x.push_back(x);
  p.u.push_back(y.u);
  p.du.push_back(y.du);
  p.first_integral = energy(y);
  const std::array<double, 2> kinks{0.0, eps};
  while (dir * (x1 - x) > 1e-14 * std::max(1.0, std::abs(x1))) {
    double dt = std::min(step, dir * (x1 - x));
    detail::State1D next = detail::rk4(b, y, dir * dt);
    for (double k : kinks) {
      const double a = y.u - k;
      const double c = next.u - k;
      if (a != 0.0 && c != 0.0 && (a < 0.0) != (c < 0.0)) {
        double lo = 0.0, hi = dt;
        for (int it = 0; it < 80; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double v = detail::rk4(b, y, dir * mid).u - k;
          ((v < 0.0) == (a < 0.0) ? lo : hi) = mid;
        }
        dt = hi;
        next = detail::rk4(b, y, dir * dt);
        break;
      }
    }
    x += dir * dt;
    y = next;
    if (!std::isfinite(y.u) || std::abs(y.u) > blowup) throw ParameterError("shoot_1d: trajectory blew up");
    p.x.push_back(x);
    p.u.push_back(y.u);
    p.du.push_back(y.du);
    p.drift = std::max(p.drift, std::abs(energy(y) - p.first_integral));
  }
  p.x.back() = x1;
  return p;
}

/// Two-point problem u(a) = ua, u(b) = ub by bisection on the slope at a.
/// Trajectories that blow up count as overshooting in the sign of the slope.
inline Profile1D shoot_1d_bvp(const BetaSpec& b, double a, double ua, double bpt, double ub, double step = 0.0) {
  if (!(bpt > a)) throw ParameterError("shoot_1d_bvp: need a < b");
  if (ua < 0.0 || ub < 0.0) throw ParameterError("shoot_1d_bvp: boundary values must be nonnegative");
  const double len = bpt - a;
  const auto end_value = [&](double s) {
    try {
      return shoot_1d(b, a, ua, s, bpt, step).u.back() - ub;
    } catch (const ParameterError&) {
      return s > 0.0 ? 1e300 : -1e300;
    }
  };
  double lo = (ub - ua) / len - 2.0, hi = (ub - ua) / len + 2.0;
  for (int k = 0; k < 60 && end_value(lo) > 0.0; ++k) lo -= std::abs(lo) + 1.0;
  for (int k = 0; k < 60 && end_value(hi) < 0.0; ++k) hi += std::abs(hi) + 1.0;
  if (end_value(lo) > 0.0 || end_value(hi) < 0.0) throw ParameterError("shoot_1d_bvp: could not bracket the slope");
  for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(lo));
       ++it) {
    const double mid = 0.5 * (lo + hi);
    (end_value(mid) < 0.0 ? lo : hi) = mid;
  }
  const double flo = std::abs(end_value(lo)), fhi = std::abs(end_value(hi));
  return shoot_1d(b, a, ua, flo < fhi ? lo : hi, bpt, step);
}

/// Even solution on [−L, L] with a pinched minimum u(0) = m < ε, u'(0) = 0 and
/// u(±L) = edge, returned on [0, L]. u(L) as a function of m rises from 0 as
/// m ↓ 0 to a peak below ε and falls back to ε; the branch below the peak is
/// the one that tends to the wedge edge·|y|/L as ε → 0. Throws when the edge
/// value exceeds the peak, in which case no pinched solution exists.
inline Profile1D symmetric_pinch_1d(const BetaSpec& b, double L, double edge, double step = 0.0) {
  const double eps = b.epsilon();
  if (!(L > 0.0) || !(edge > 0.0)) throw ParameterError("symmetric_pinch_1d: need L > 0 and edge > 0");
  const auto end_value = [&](double logm) { return shoot_1d(b, 0.0, std::exp(logm), 0.0, L, step).u.back(); };
  const double lo0 = std::log(eps * 1e-14), hi0 = std::log(eps * (1.0 - 1e-9));
  constexpr int scan = 200;
  double peak = lo0, peak_val = -1.0;
  for (int k = 0; k <= scan; ++k) {
    const double t = lo0 + (hi0 - lo0) * k / scan;
    const double v = end_value(t);
    if (v > peak_val) {
      peak_val = v;
      peak = t;
    }
  }
  if (peak_val < edge) throw ParameterError("symmetric_pinch_1d: edge value above the pinched branch");
  double lo = lo0, hi = peak;
  if (end_value(lo) > edge) throw ParameterError("symmetric_pinch_1d: minimum below representable range");
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::abs(lo); ++it) {
    const double mid = 0.5 * (lo + hi);
    (end_value(mid) < edge ? lo : hi) = mid;
  }
  return shoot_1d(b, 0.0, std::exp(0.5 * (lo + hi)), 0.0, L, step);
}

}  // namespace fbscope
