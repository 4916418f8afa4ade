#pragma once

#include "fbscope/core.hpp"

namespace fbscope {

/// (D, H, M, N, V) at one center and radius.
///
/// N is the −∞ sentinel when H = 0 and V is NaN there.  n_defined records
/// whether H > 0 and M ≥ |B_1| was certified (within tolerance) at this or a
/// smaller radius, which is the hypothesis under which N ≥ 1 is expected.
template <int Dim>
struct FunctionalSample {
  Vec<Dim> x = Vec<Dim>::Zero();
  double r = 0.0;
  double D = 0.0;
  double H = 0.0;
  double M = 0.0;
  double N = kNegInf;
  double V = kNaN;
  double quad_err = 0.0;
  bool n_defined = false;
};

/// Fills M, N, V from D, H and the raw deficit r^{-n}∫_{B_r}(1−χ).
template <int Dim>
void finish_sample(FunctionalSample<Dim>& s, double deficit) {
  s.M = s.D - s.H;
  if (s.H > 0.0) {
    s.N = (s.D - unit_ball_volume(Dim)) / s.H;
    s.V = deficit / s.H;
  } else {
    s.N = kNegInf;
    s.V = kNaN;
  }
}

}  // namespace fbscope
