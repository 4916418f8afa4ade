#pragma once

#include "fbscope/geometry/measure.hpp"
#include "fbscope/geometry/oracle.hpp"

#include <vector>

namespace fbscope {

struct SubspaceProbe {
  double lhs = 0.0;  // β²_μ(x, r)
  double rhs = 0.0;  // r^{1−n} ∫_{B_r(x)} [N_y(20r) − N_y(r)] dμ(y)
  bool contaminated = false;  // some oracle query was undefined
  bool violated = false;      // lhs > 0 while rhs = 0
  /// lhs / rhs, NaN when rhs = 0.
  double ratio() const { return rhs > 0.0 ? lhs / rhs : kNaN; }
};

inline constexpr double kRhsZero = 1e-12;
inline constexpr double kLhsZero = 1e-6;

template <int Dim>
SubspaceProbe subspace_inequality_probe(const DiscreteMeasure<Dim>& mu, const FrequencyOracle<Dim>& oracle,
                                        const std::type_identity_t<Vec<Dim>>& x, double r) {
  SubspaceProbe p;
  p.lhs = beta_number(mu, x, r).beta2;
  const auto local = mu.restrict(x, r);
  double acc = 0.0;
  for (std::size_t i = 0; i < local.size(); ++i) {
    const auto big = oracle(local.points()[i], 20.0 * r);
    const auto small = oracle(local.points()[i], r);
    if (!big.defined || !small.defined) {
      p.contaminated = true;
      continue;
    }
    acc += local.weights()[i] * (big.N - small.N);
  }
  p.rhs = acc * std::pow(r, 1 - Dim);
  if (p.rhs <= kRhsZero) p.rhs = 0.0;
  p.violated = p.rhs == 0.0 && p.lhs > kLhsZero;
  return p;
}

/// Best-fit affine subspace of dimension n − 2 through a point set: the
/// centroid in 2D, the centroid plus the top moment direction in 3D.
template <int Dim>
struct AffineFit {
  Vec<Dim> centroid = Vec<Dim>::Zero();
  std::vector<Vec<Dim>> directions;

  double distance(const Vec<Dim>& y) const {
    Vec<Dim> d = y - centroid;
    for (const auto& e : directions) d -= d.dot(e) * e;
    return d.norm();
  }
};

template <int Dim>
AffineFit<Dim> fit_codim2(const std::vector<Vec<Dim>>& pts) {
  if (pts.empty()) throw PreconditionError("fit_codim2: empty point set");
  AffineFit<Dim> fit;
  Vec<Dim> c;
  Mat<Dim> S;
  detail::weighted_moments(DiscreteMeasure<Dim>::uniform(pts), c, S);
  fit.centroid = c;
  Eigen::SelfAdjointEigenSolver<Mat<Dim>> es(S);
  // Drop the two smallest eigen-directions and keep the rest.
  for (int k = 2; k < Dim; ++k) fit.directions.push_back(es.eigenvectors().col(k));
  return fit;
}

template <int Dim>
struct DichotomyProbe {
  double nmax = kNaN;
  bool first_alternative = false;  // N^max < 1 + δ
  bool contaminated = false;
  std::vector<Vec<Dim>> E;
  AffineFit<Dim> fit;
  double max_dist = 0.0;  // sup_{E} dist(·, fit) / r
  bool second_alternative = false;  // E within δr of the fit
};

/// N^max = max over candidates in B̄_r(x) of N_y(20r).  Either N^max < 1+δ or
/// E = {y : N^max − N_y(r) < ε} is tested against its best (n−2)-plane.
template <int Dim>
DichotomyProbe<Dim> dichotomy_probe(const std::vector<Vec<Dim>>& candidates, const FrequencyOracle<Dim>& oracle,
                                    const std::type_identity_t<Vec<Dim>>& x, double r, double delta, double eps) {
  if (!(r > 0.0) || !(delta > 0.0) || !(eps > 0.0)) throw ParameterError("dichotomy_probe: r, δ, ε must be positive");
  std::vector<Vec<Dim>> local;
  for (const auto& y : candidates)
    if ((y - x).norm() <= r) local.push_back(y);
  if (local.empty()) throw PreconditionError("dichotomy_probe: no candidates in the ball");
  DichotomyProbe<Dim> p;
  p.nmax = kNegInf;
  for (const auto& y : local) {
    const auto v = oracle(y, 20.0 * r);
    if (!v.defined) {
      p.contaminated = true;
      continue;
    }
    p.nmax = std::max(p.nmax, v.N);
  }
  if (p.nmax < 1.0 + delta) {
    p.first_alternative = true;
    return p;
  }
  for (const auto& y : local) {
    const auto v = oracle(y, r);
    if (v.defined && p.nmax - v.N < eps) p.E.push_back(y);
  }
  if (p.E.empty()) return p;
  p.fit = fit_codim2(p.E);
  for (const auto& y : p.E) p.max_dist = std::max(p.max_dist, p.fit.distance(y) / r);
  p.second_alternative = p.max_dist <= delta;
  return p;
}

}  // namespace fbscope
