#pragma once

#include "fbscope/core.hpp"

#include <Eigen/Eigenvalues>

#include <type_traits>
#include <vector>

namespace fbscope {

/// Finitely many weighted atoms.
template <int Dim>
class DiscreteMeasure {
 public:
  static constexpr int dim = Dim;

  DiscreteMeasure() = default;
  DiscreteMeasure(std::vector<Vec<Dim>> points, std::vector<double> weights)
      : points_(std::move(points)), weights_(std::move(weights)) {
    if (points_.size() != weights_.size()) throw ParameterError("DiscreteMeasure: points and weights differ in length");
    for (double w : weights_)
      if (!(w > 0.0) || !std::isfinite(w)) throw ParameterError("DiscreteMeasure: weights must be positive and finite");
  }

  /// Unit mass on every point.
  static DiscreteMeasure uniform(std::vector<Vec<Dim>> points) {
    std::vector<double> w(points.size(), 1.0);
    return DiscreteMeasure(std::move(points), std::move(w));
  }

  const std::vector<Vec<Dim>>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  double total_mass() const {
    double m = 0.0;
    for (double w : weights_) m += w;
    return m;
  }

  DiscreteMeasure scaled(double c) const {
    if (!(c > 0.0)) throw ParameterError("DiscreteMeasure: scale must be positive");
    auto w = weights_;
    for (double& v : w) v *= c;
    return DiscreteMeasure(points_, std::move(w));
  }

  /// μ restricted to the closed ball B̄_r(x).
  DiscreteMeasure restrict(const std::type_identity_t<Vec<Dim>>& x, double r) const {
    DiscreteMeasure out;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if ((points_[i] - x).norm() <= r) {
        out.points_.push_back(points_[i]);
        out.weights_.push_back(weights_[i]);
      }
    }
    return out;
  }

 private:
  std::vector<Vec<Dim>> points_;
  std::vector<double> weights_;
};

template <int Dim>
struct HyperplaneFit {
  Vec<Dim> centroid = Vec<Dim>::Zero();
  Vec<Dim> normal = Vec<Dim>::UnitX();
  double lambda_min = 0.0;  // Σ w ((y − ȳ)·normal)²
};

template <int Dim>
struct BetaNumber {
  double beta2 = 0.0;
  HyperplaneFit<Dim> plane;
};

namespace detail {

template <int Dim>
void weighted_moments(const DiscreteMeasure<Dim>& mu, Vec<Dim>& centroid, Mat<Dim>& moment) {
  const double m = mu.total_mass();
  centroid.setZero();
  for (std::size_t i = 0; i < mu.size(); ++i) centroid += mu.weights()[i] * mu.points()[i];
  centroid /= m;
  moment.setZero();
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const Vec<Dim> d = mu.points()[i] - centroid;
    moment += mu.weights()[i] * d * d.transpose();
  }
}

}  // namespace detail

/// β²_μ(x, r) = r^{−(n+1)} min_L ∫_{B_r(x)} dist(y, L)² dμ over affine
/// hyperplanes L: the least eigenvalue of the centred second-moment matrix.
template <int Dim>
BetaNumber<Dim> beta_number(const DiscreteMeasure<Dim>& mu, const std::type_identity_t<Vec<Dim>>& x, double r) {
  if (!(r > 0.0)) throw ParameterError("beta_number: radius must be positive");
  const auto local = mu.restrict(x, r);
  if (local.empty()) throw UndefinedMeasure("beta_number: no mass in the ball");
  BetaNumber<Dim> b;
  Mat<Dim> S;
  detail::weighted_moments(local, b.plane.centroid, S);
  Eigen::SelfAdjointEigenSolver<Mat<Dim>> es(S);
  // Eigenvalues at roundoff level relative to the trace are zero.
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * S.trace();
  b.plane.lambda_min = es.eigenvalues()[0] <= floor ? 0.0 : es.eigenvalues()[0];
  b.plane.normal = es.eigenvectors().col(0);
  b.beta2 = b.plane.lambda_min / std::pow(r, Dim + 1);
  return b;
}

namespace detail {

// Σ w (y·ν − c)² minimized over c by golden-section search.
template <int Dim>
double best_offset_cost(const DiscreteMeasure<Dim>& mu, const Vec<Dim>& nu) {
  std::vector<double> t(mu.size());
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    t[i] = mu.points()[i].dot(nu);
    lo = std::min(lo, t[i]);
    hi = std::max(hi, t[i]);
  }
  const auto cost = [&](double c) {
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) s += mu.weights()[i] * (t[i] - c) * (t[i] - c);
    return s;
  };
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c1 = b - g * (b - a), c2 = a + g * (b - a);
  double f1 = cost(c1), f2 = cost(c2);
  for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
    if (f1 <= f2) {
      b = c2;
      c2 = c1;
      f2 = f1;
      c1 = b - g * (b - a);
      f1 = cost(c1);
    } else {
      a = c1;
      c1 = c2;
      f1 = f2;
      c2 = a + g * (b - a);
      f2 = cost(c2);
    }
  }
  return std::min({f1, f2, cost(0.5 * (a + b))});
}

template <int Dim>
Vec<Dim> direction(double theta, double phi) {
  if constexpr (Dim == 2) {
    return Vec<2>(std::cos(theta), std::sin(theta));
  } else {
    return Vec<3>(std::sin(phi) * std::cos(theta), std::sin(phi) * std::sin(theta), std::cos(phi));
  }
}

}  // namespace detail

/// Independent oracle for beta_number: scans n_dirs unit normals (a
/// half-circle in 2D, a Fibonacci hemisphere in 3D), minimizes the offset
/// along each by golden-section search, then zooms around the best normal
/// `refine` times with the same scan.
template <int Dim>
double beta_number_bruteforce(const DiscreteMeasure<Dim>& mu, const std::type_identity_t<Vec<Dim>>& x, double r, int n_dirs,
                              int refine = 8) {
  if (!(r > 0.0)) throw ParameterError("beta_number_bruteforce: radius must be positive");
  if (n_dirs < 8) throw ParameterError("beta_number_bruteforce: need n_dirs >= 8");
  const auto local = mu.restrict(x, r);
  if (local.empty()) throw UndefinedMeasure("beta_number_bruteforce: no mass in the ball");
  double best = std::numeric_limits<double>::infinity();
  double bt = 0.0, bp = 0.0;
  const auto consider = [&](double th, double ph) {
    const double c = detail::best_offset_cost(local, detail::direction<Dim>(th, ph));
    if (c < best) {
      best = c;
      bt = th;
      bp = ph;
    }
  };
  double dt = 0.0, dp = 0.0;
  if constexpr (Dim == 2) {
    dt = std::numbers::pi / n_dirs;
    for (int k = 0; k < n_dirs; ++k) consider(k * dt, 0.0);
  } else {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < n_dirs; ++k) {
      const double z = 1.0 - (k + 0.5) / n_dirs;  // upper hemisphere
      consider(golden * k, std::acos(z));
    }
    dt = dp = std::sqrt(2.0 * std::numbers::pi / n_dirs);
  }
  for (int level = 0; level < refine; ++level) {
    const double t0 = bt, p0 = bp;
    constexpr int m = 10;
    for (int i = -m; i <= m; ++i) {
      if constexpr (Dim == 2) {
        consider(t0 + i * dt / m, 0.0);
      } else {
        for (int j = -m; j <= m; ++j) consider(t0 + i * dt / m / std::max(std::sin(p0), 1e-3), p0 + j * dp / m);
      }
    }
    dt /= m / 2.0;
    dp /= m / 2.0;
  }
  return std::max(0.0, best) / std::pow(r, Dim + 1);
}

}  // namespace fbscope
