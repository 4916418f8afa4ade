#pragma once

// Ball and sphere quadrature on a uniform lattice.  Cells fully inside the
// ball use the sub-cell midpoint rule; boundary cells are weighted by their
// exact overlap area (2D) or a 4^3 point-count fraction (3D) and sampled at
// the centroid of their inside part.

#include "fbscope/field/grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <type_traits>
#include <vector>

namespace fbscope {

template <class R>
struct Estimate {
  R value;
  R error;
};

namespace detail {

template <class R>
R zero_like() {
  if constexpr (std::is_arithmetic_v<R>) {
    return R(0);
  } else {
    return R::Zero();
  }
}

template <class R>
R abs_diff(const R& a, const R& b) {
  if constexpr (std::is_arithmetic_v<R>) {
    return std::abs(a - b);
  } else {
    return (a - b).cwiseAbs();
  }
}

// ∫_{-r}^{t} sqrt(r^2 - s^2) ds for t in [-r, r].
inline double half_chord_integral(double t, double r) {
  t = std::clamp(t, -r, r);
  const double s = std::sqrt(std::max(0.0, r * r - t * t));
  return 0.5 * (t * s + r * r * std::asin(t / r)) + 0.25 * std::numbers::pi * r * r;
}

// Area of {|p| < r, p_x < X, p_y < Y} for a disk centred at the origin.
inline double disk_corner_area(double X, double Y, double r) {
  if (X <= -r || Y <= -r) return 0.0;
  X = std::min(X, r);
  const auto S = [r](double a, double b) {  // ∫_a^b sqrt(r^2-s^2)
    return b > a ? half_chord_integral(b, r) - half_chord_integral(a, r) : 0.0;
  };
  if (Y >= r) return 2.0 * S(-r, X);
  const double w = std::sqrt(r * r - Y * Y);
  // |s| < w: chord piece of length Y + sqrt(r^2-s^2); |s| > w: full chord or nothing.
  double area = 0.0;
  const double a = -w, b = std::min(X, w);
  if (b > a) area += Y * (b - a) + S(a, b);
  if (Y > 0.0) {
    area += 2.0 * S(-r, std::min(X, -w));
    if (X > w) area += 2.0 * S(w, X);
  }
  return area;
}

// Exact area of the rectangle [x0,x1]x[y0,y1] intersected with B_r(c).
inline double disk_rect_overlap(const Vec<2>& c, double r, double x0, double x1, double y0, double y1) {
  x0 -= c[0];
  x1 -= c[0];
  y0 -= c[1];
  y1 -= c[1];
  return disk_corner_area(x1, y1, r) - disk_corner_area(x0, y1, r) - disk_corner_area(x1, y0, r) +
         disk_corner_area(x0, y0, r);
}

// Gauss–Legendre nodes and weights on [-1, 1].
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

template <int Dim, class Fn>
auto ball_rule(const GridSpec<Dim>& lattice, const Vec<Dim>& x, double r, int sub, Fn&& fn) {
  using R = std::decay_t<decltype(fn(x))>;
  R acc = zero_like<R>();
  const double hs = lattice.h / sub;
  std::array<long, Dim> lo, hi;
  for (int k = 0; k < Dim; ++k) {
    lo[k] = static_cast<long>(std::floor((x[k] - r - lattice.origin[k]) / hs));
    hi[k] = static_cast<long>(std::ceil((x[k] + r - lattice.origin[k]) / hs));
  }
  constexpr int kFine = 4;
  std::array<long, Dim> i = lo;
  while (true) {
    Vec<Dim> a, b, mid;
    double near2 = 0.0, far2 = 0.0;
    for (int k = 0; k < Dim; ++k) {
      a[k] = lattice.origin[k] + i[k] * hs;
      b[k] = a[k] + hs;
      mid[k] = 0.5 * (a[k] + b[k]);
      const double dn = std::max({a[k] - x[k], 0.0, x[k] - b[k]});
      const double df = std::max(std::abs(a[k] - x[k]), std::abs(b[k] - x[k]));
      near2 += dn * dn;
      far2 += df * df;
    }
    if (near2 < r * r) {
      const double vol = std::pow(hs, Dim);
      if (far2 <= r * r) {
        acc += vol * fn(mid);
      } else {
        // Boundary cell: inside-point centroid from a kFine^Dim sub-lattice.
        Vec<Dim> centroid = Vec<Dim>::Zero();
        int inside = 0, total = 1;
        for (int k = 0; k < Dim; ++k) total *= kFine;
        for (int s = 0; s < total; ++s) {
          Vec<Dim> p;
          int t = s;
          for (int k = 0; k < Dim; ++k) {
            p[k] = a[k] + (t % kFine + 0.5) * hs / kFine;
            t /= kFine;
          }
          if ((p - x).squaredNorm() < r * r) {
            centroid += p;
            ++inside;
          }
        }
        double weight;
        if constexpr (Dim == 2) {
          weight = disk_rect_overlap(x, r, a[0], b[0], a[1], b[1]);
        } else {
          weight = vol * static_cast<double>(inside) / total;
        }
        if (weight > 0.0) acc += weight * fn(inside > 0 ? Vec<Dim>(centroid / inside) : mid);
      }
    }
    int k = Dim - 1;
    while (k >= 0 && ++i[k] >= hi[k]) {
      i[k] = lo[k];
      --k;
    }
    if (k < 0) break;
  }
  return acc;
}

template <int Dim, class Fn>
auto sphere_rule(const Vec<Dim>& x, double r, int n, Fn&& fn) {
  using R = std::decay_t<decltype(fn(x))>;
  R acc = zero_like<R>();
  if constexpr (Dim == 2) {
    const double w = 2.0 * std::numbers::pi * r / n;
    for (int k = 0; k < n; ++k) {
      const double t = 2.0 * std::numbers::pi * (k + 0.5) / n;
      acc += w * fn(Vec<2>(x[0] + r * std::cos(t), x[1] + r * std::sin(t)));
    }
  } else {
    std::vector<double> z, wz;
    gauss_legendre(std::max(1, n / 2), z, wz);
    const double wphi = 2.0 * std::numbers::pi / n;
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double st = std::sqrt(std::max(0.0, 1.0 - z[j] * z[j]));
      for (int k = 0; k < n; ++k) {
        const double phi = 2.0 * std::numbers::pi * (k + 0.5) / n;
        const Vec<3> p(x[0] + r * st * std::cos(phi), x[1] + r * st * std::sin(phi), x[2] + r * z[j]);
        acc += (r * r * wz[j] * wphi) * fn(p);
      }
    }
  }
  return acc;
}

}  // namespace detail

/// ∫_{B_r(x)} fn on the given lattice; the error is the gap between one and
/// two subdivisions per cell.
template <int Dim, class Fn>
auto ball_integral(const GridSpec<Dim>& lattice, const std::type_identity_t<Vec<Dim>>& x, double r, Fn&& fn) {
  if (!(r > 0.0)) throw ParameterError("ball_integral: radius must be positive");
  const auto coarse = detail::ball_rule(lattice, x, r, 1, fn);
  const auto fine = detail::ball_rule(lattice, x, r, 2, fn);
  return Estimate<std::decay_t<decltype(fine)>>{fine, detail::abs_diff(fine, coarse)};
}

/// ∫_{∂B_r(x)} fn with n_quad nodes per great circle, error from doubling.
template <int Dim, class Fn>
auto sphere_integral(const Vec<Dim>& x, double r, Fn&& fn, int n_quad = Dim == 2 ? 256 : 64) {
  if (n_quad < 64) throw ParameterError("sphere_integral: n_quad must be >= 64");
  if (!(r > 0.0)) throw ParameterError("sphere_integral: radius must be positive");
  const auto coarse = detail::sphere_rule<Dim>(x, r, n_quad, fn);
  const auto fine = detail::sphere_rule<Dim>(x, r, 2 * n_quad, fn);
  return Estimate<std::decay_t<decltype(fine)>>{fine, detail::abs_diff(fine, coarse)};
}

/// Field-aware wrappers: integrands receive the probe at each node.
template <class Field, class Fn>
auto field_ball_integral(const Field& f, const Vec<Field::dim>& x, double r, Fn&& fn) {
  if (!f.ball_interior(x, r)) throw OutOfDomain("ball_integral: ball not interior to the data region");
  return ball_integral(f.lattice_for(x, r), x, r, [&](const Vec<Field::dim>& p) { return fn(p, f.probe(p)); });
}

template <class Field, class Fn>
auto field_sphere_integral(const Field& f, const Vec<Field::dim>& x, double r, Fn&& fn, int n_quad = 0) {
  if (!f.ball_interior(x, r)) throw OutOfDomain("sphere_integral: ball not interior to the data region");
  if (n_quad == 0) n_quad = Field::dim == 2 ? 256 : 64;
  return sphere_integral<Field::dim>(x, r, [&](const Vec<Field::dim>& p) { return fn(p, f.value(p)); }, n_quad);
}

/// Δu(B_r(x)) tested against a radial cutoff η: −∫∇u·∇η.  η is a cos²
/// ramp of width σ centred on radius r, so a mass that grows linearly in
/// the radius is returned exactly at r.
template <class Field>
Estimate<double> laplacian_mass(const Field& f, const Vec<Field::dim>& x, double r, double sigma) {
  if (!(sigma > 0.0) || sigma >= 2.0 * r) throw ParameterError("laplacian_mass: need 0 < sigma < 2r");
  const double outer = r + 0.5 * sigma;
  if (!f.ball_interior(x, outer)) throw OutOfDomain("laplacian_mass: cutoff support leaves the data region");
  const double inner = r - 0.5 * sigma;
  return field_ball_integral(f, x, outer, [&](const Vec<Field::dim>& p, const auto& pv) {
    const Vec<Field::dim> d = p - x;
    const double rho = d.norm();
    if (rho <= inner || rho >= outer || rho == 0.0) return 0.0;
    const double t = (rho - inner) / sigma;
    const double deta = -std::numbers::pi / (2.0 * sigma) * std::sin(std::numbers::pi * t);
    return -deta * pv.grad.dot(d) / rho;
  });
}

}  // namespace fbscope
