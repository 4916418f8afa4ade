#pragma once

// Shared vocabulary for the whole toolkit: fixed-size vectors, error types and
// the dimensional constants that every functional is normalized against.

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace fbscope {

inline constexpr const char* kVersion = "0.1.0";

template <int Dim>
using Vec = Eigen::Matrix<double, Dim, 1>;

template <int Dim>
using Mat = Eigen::Matrix<double, Dim, Dim>;

/// Query point or ball leaves the region where data exists.
struct OutOfDomain : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// No closed form exists for the requested configuration.
struct NotAvailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct PreconditionError : std::logic_error {
  using std::logic_error::logic_error;
};

/// A measure restricted to a ball carries no mass.
struct UndefinedMeasure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// |B_1| in R^dim.
constexpr double unit_ball_volume(int dim) {
  switch (dim) {
    case 1: return 2.0;
    case 2: return std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi / 3.0;
    default: throw ParameterError("dimension must be 1, 2 or 3");
  }
}

/// H^{dim-1}(∂B_1) in R^dim.
constexpr double unit_sphere_area(int dim) {
  return dim * unit_ball_volume(dim);
}

/// (∫_{∂B_1} x_n^2)^{-1/2}; the slope for which the wedge α|x_n| has unit H.
/// ∫_{∂B_1} x_n^2 = |∂B_1|/dim = |B_1|.
inline double alpha_n(int dim) {
  if (dim != 2 && dim != 3) throw ParameterError("alpha_n: dim must be 2 or 3");
  return 1.0 / std::sqrt(unit_sphere_area(dim) / dim);
}

/// H^{dim-1} of a hyperplane section of B_r at distance d from the center.
inline double plane_section_measure(int dim, double r, double d) {
  const double s2 = r * r - d * d;
  if (s2 <= 0.0) return 0.0;
  return dim == 2 ? 2.0 * std::sqrt(s2) : std::numbers::pi * s2;
}

/// Parameter interval [t0, t1] ⊂ [0, 1] of the segment a + t(b−a) inside
/// the closed ball B_r(c); empty when t0 >= t1.
template <class V>
std::pair<double, double> segment_ball_clip(const V& a, const V& b, const V& c, double r) {
  const V d = b - a;
  const V f = a - c;
  const double A = d.squaredNorm();
  const double B = 2.0 * f.dot(d);
  const double C = f.squaredNorm() - r * r;
  if (A == 0.0) return C <= 0.0 ? std::pair{0.0, 1.0} : std::pair{0.0, 0.0};
  const double disc = B * B - 4.0 * A * C;
  if (disc <= 0.0) return {0.0, 0.0};
  const double sq = std::sqrt(disc);
  const double t0 = std::max(0.0, (-B - sq) / (2.0 * A));
  const double t1 = std::min(1.0, (-B + sq) / (2.0 * A));
  return {t0, std::max(t0, t1)};
}

template <int Dim>
constexpr void check_dim() {
  static_assert(Dim == 2 || Dim == 3, "only dimensions 2 and 3 are supported");
}

}  // namespace fbscope
