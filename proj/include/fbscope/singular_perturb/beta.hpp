#pragma once

#include "fbscope/core.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <string>

namespace fbscope {

/// Reaction profile β supported in [0, 1], scaled so that ∫₀¹β = 1/2, and its
/// ε-rescaling β_ε(s) = β(s/ε)/ε with primitive B_ε(s) = B(s/ε).
class BetaSpec {
 public:
  using Shape = std::function<double(double)>;

  /// `shape` and `dshape` are evaluated on (0, 1) only; the normalization
  /// constant is fixed here.
  BetaSpec(std::string id, Shape shape, Shape dshape, double eps)
      : id_(std::move(id)), shape_(std::move(shape)), dshape_(std::move(dshape)), eps_(eps) {
    if (!(eps > 0.0)) throw ParameterError("BetaSpec: epsilon must be positive");
    const double mass = integrate(1.0);
    if (!(mass > 0.0)) throw ParameterError("BetaSpec: profile has no mass");
    c_ = 0.5 / mass;
    for (int i = 1; i < 1000; ++i) {
      const double s = i / 1000.0;
      if (!(shape_(s) > 0.0)) throw ParameterError("BetaSpec: profile must be positive on (0, 1)");
    }
  }

  const std::string& id() const { return id_; }
  double epsilon() const { return eps_; }
  double normalization() const { return c_; }
  BetaSpec with_epsilon(double eps) const { return BetaSpec(id_, shape_, dshape_, eps); }

  double beta(double s) const { return s > 0.0 && s < 1.0 ? c_ * shape_(s) : 0.0; }
  double dbeta(double s) const { return s > 0.0 && s < 1.0 ? c_ * dshape_(s) : 0.0; }
  double B(double s) const {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 0.5;
    return c_ * integrate(s);
  }

  double beta_eps(double s) const { return beta(s / eps_) / eps_; }
  double dbeta_eps(double s) const { return dbeta(s / eps_) / (eps_ * eps_); }
  double B_eps(double s) const { return B(s / eps_); }
  /// Upper bound for β_ε' on its support.
  double dbeta_eps_max() const {
    double m = 0.0;
    for (int i = 0; i <= 1000; ++i) m = std::max(m, dbeta(std::clamp(i / 1000.0, 1e-12, 1.0 - 1e-12)));
    return m / (eps_ * eps_);
  }

 private:
  // ∫₀ˢ shape by 32 panels of 8-point Gauss–Legendre; exact for the
  // polynomial profiles below.
  double integrate(double s) const {
    static constexpr std::array<double, 4> x{0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                             0.9602898564975363};
    static constexpr std::array<double, 4> w{0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                             0.1012285362903763};
    constexpr int panels = 32;
    const double step = s / panels;
    double acc = 0.0;
    for (int p = 0; p < panels; ++p) {
      const double mid = (p + 0.5) * step;
      for (int k = 0; k < 4; ++k) {
        acc += w[k] * (shape_(mid - 0.5 * step * x[k]) + shape_(mid + 0.5 * step * x[k]));
      }
    }
    return 0.5 * step * acc;
  }

  std::string id_;
  Shape shape_;
  Shape dshape_;
  double eps_;
  double c_ = 1.0;
};

/// β(s) = 3s(1−s), B(s) = s²(3−2s)/2.
inline BetaSpec default_beta(double eps) {
  return BetaSpec("cubic", [](double s) { return s * (1.0 - s); }, [](double s) { return 1.0 - 2.0 * s; }, eps);
}

/// β(s) ∝ s²(1−s)², flatter at the ends of the support.
inline BetaSpec quartic_beta(double eps) {
  return BetaSpec(
      "quartic", [](double s) { return s * s * (1.0 - s) * (1.0 - s); },
      [](double s) { return 2.0 * s * (1.0 - s) * (1.0 - 2.0 * s); }, eps);
}

inline BetaSpec beta_by_id(const std::string& id, double eps) {
  if (id == "cubic") return default_beta(eps);
  if (id == "quartic") return quartic_beta(eps);
  throw ParameterError("unknown beta profile '" + id + "'");
}

}  // namespace fbscope
