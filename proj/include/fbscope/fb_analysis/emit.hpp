#pragma once

#include "fbscope/fb_analysis/analysis.hpp"
#include "fbscope/functionals/emit.hpp"

namespace fbscope {

template <int Dim>
void write_boundary_csv(std::ostream& os, const BoundaryPointSet<Dim>& pts) {
  static const char* names[] = {"x", "y", "z"};
  for (int k = 0; k < Dim; ++k) os << names[k] << ',';
  os << "u,measure,M0,N0,H0,H_limit,label";
  for (int k = 0; k < Dim; ++k) os << ",nu_" << names[k];
  os << '\n';
  for (const auto& p : pts.points) {
    for (int k = 0; k < Dim; ++k) os << fmt17(p.x[k]) << ',';
    os << fmt17(p.u) << ',' << fmt17(p.measure) << ',' << fmt17(p.M0) << ',' << fmt17(p.N0) << ',' << fmt17(p.H0)
       << ',' << fmt17(p.H_limit) << ',' << to_string(p.label);
    for (int k = 0; k < Dim; ++k) os << ',' << fmt17(p.nu[k]);
    os << '\n';
  }
}

template <int Dim>
nlohmann::json to_json(const MeasureProfile<Dim>& mp) {
  nlohmann::json j;
  j["x"] = json_point<Dim>(mp.x);
  j["sigma"] = mp.sigma;
  j["measured_monotone"] = mp.measured_monotone;
  j["rungs"] = nlohmann::json::array();
  for (const auto& r : mp.rungs) {
    j["rungs"].push_back({{"r", r.r},
                          {"measured", json_number(r.measured)},
                          {"measured_err", json_number(r.measured_err)},
                          {"predicted", json_number(r.predicted)},
                          {"mismatch", json_number(r.mismatch)},
                          {"contaminated", r.contaminated}});
  }
  return j;
}

/// Label counts, total boundary measure and the high-frequency share.
template <int Dim>
nlohmann::json boundary_summary(const BoundaryPointSet<Dim>& pts) {
  nlohmann::json j;
  j["u_identically_zero"] = pts.u_identically_zero;
  j["points"] = pts.points.size();
  j["h"] = pts.h;
  j["threshold"] = pts.threshold;
  j["boundary_measure"] = pts.total_measure();
  j["counts"] = label_counts(pts);
  j["share_N0_above_1.1"] = high_frequency_share(pts, 1.1);
  return j;
}

}  // namespace fbscope
