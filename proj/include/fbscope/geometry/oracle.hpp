#pragma once

#include "fbscope/analytic/solution.hpp"
#include "fbscope/functionals/functionals.hpp"

#include <functional>
#include <string>

namespace fbscope {

struct FrequencyValue {
  double N = kNaN;
  bool defined = false;
};

/// (x, r) ↦ N_x(r), backed by a grid field, a closed form or a synthetic rule.
/// The evaluator must be a pure function.
template <int Dim>
struct FrequencyOracle {
  std::function<FrequencyValue(const Vec<Dim>&, double)> eval;
  std::string provenance;  // "grid", "analytic" or "synthetic"
  std::string id;

  FrequencyValue operator()(const Vec<Dim>& x, double r) const { return eval(x, r); }
};

/// N from quadrature on a field; undefined outside the data region, below two
/// cells, or where the density of the top class is not certified.
template <class Field>
FrequencyOracle<Field::dim> grid_oracle(const Field& f, std::string id = "grid") {
  return {[&f](const Vec<Field::dim>& x, double r) -> FrequencyValue {
            if (r < 2.0 * f.resolution() || !f.ball_interior(x, r)) return {};
            const auto s = sample(f, x, r);
            return {s.N, s.n_defined};
          },
          "grid", std::move(id)};
}

/// Exact N for the |harmonic polynomial| family.
template <int Dim>
FrequencyOracle<Dim> analytic_oracle(AnalyticSolution<Dim> sol) {
  if (!sol.abs_family()) throw NotAvailable("analytic_oracle: needs a |harmonic polynomial| solution");
  std::string id = to_string(sol.kind());
  return {[sol = std::move(sol)](const Vec<Dim>& x, double r) -> FrequencyValue {
            const auto s = exact_functionals(sol, x, r);
            return {s.N, s.n_defined};
          },
          "analytic", std::move(id)};
}

template <int Dim>
FrequencyOracle<Dim> synthetic_oracle(std::string id, std::function<FrequencyValue(const Vec<Dim>&, double)> fn) {
  return {std::move(fn), "synthetic", std::move(id)};
}

/// N ≡ c everywhere.
template <int Dim>
FrequencyOracle<Dim> synthetic_constant(double c) {
  return synthetic_oracle<Dim>("constant", [c](const Vec<Dim>&, double) { return FrequencyValue{c, true}; });
}

/// N = on_value within `tol` of the hyperplane {y·ν = offset}, off_value
/// elsewhere, at every radius.
template <int Dim>
FrequencyOracle<Dim> synthetic_plane(const Vec<Dim>& nu, double offset, double on_value, double off_value,
                                     double tol = 1e-9) {
  const Vec<Dim> n = nu.normalized();
  return synthetic_oracle<Dim>("plane", [=](const Vec<Dim>& y, double) {
    return FrequencyValue{std::abs(y.dot(n) - offset) <= tol ? on_value : off_value, true};
  });
}

/// Staircase on a hyperplane: N_y(r) = max(1, n_top − step·k(r)) where
/// k(r) = ⌈log(r_top/r)/log(1/ratio)⌉₊ counts the scale generations below
/// r_top.  Off the plane N ≡ 1.  Nondecreasing in r.
template <int Dim>
FrequencyOracle<Dim> synthetic_staircase(const Vec<Dim>& nu, double offset, double n_top, double step, double r_top,
                                         double ratio, double tol = 1e-9) {
  if (!(ratio > 0.0 && ratio < 1.0) || !(step > 0.0) || !(r_top > 0.0))
    throw ParameterError("synthetic_staircase: bad parameters");
  const Vec<Dim> n = nu.normalized();
  return synthetic_oracle<Dim>("staircase", [=](const Vec<Dim>& y, double r) {
    if (std::abs(y.dot(n) - offset) > tol) return FrequencyValue{1.0, true};
    // The 1e-9 slack keeps exact generation radii on the upper step.
    const double k = std::max(0.0, std::ceil(std::log(r_top / r) / std::log(1.0 / ratio) - 1e-9));
    return FrequencyValue{std::max(1.0, n_top - step * k), true};
  });
}

}  // namespace fbscope
