#pragma once

#include "fbscope/functionals/functionals.hpp"

#include <json.hpp>

#include <cstdio>
#include <ostream>
#include <string>

namespace fbscope {

/// %.17g, with the sentinels spelled -inf / nan.
inline std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// JSON has no ±inf/nan: they become the strings used in the CSV files.
inline nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  return fmt17(v);
}

template <int Dim>
nlohmann::json json_point(const Vec<Dim>& p) {
  auto a = nlohmann::json::array();
  for (int k = 0; k < Dim; ++k) a.push_back(p[k]);
  return a;
}

template <int Dim>
void write_sample_csv_header(std::ostream& os) {
  static const char* names[] = {"x", "y", "z"};
  for (int k = 0; k < Dim; ++k) os << names[k] << ',';
  os << "r,D,H,M,N,V,quad_err,n_defined\n";
}

template <int Dim>
void write_sample_csv_row(std::ostream& os, const FunctionalSample<Dim>& s) {
  for (int k = 0; k < Dim; ++k) os << fmt17(s.x[k]) << ',';
  os << fmt17(s.r) << ',' << fmt17(s.D) << ',' << fmt17(s.H) << ',' << fmt17(s.M) << ',' << fmt17(s.N) << ','
     << fmt17(s.V) << ',' << fmt17(s.quad_err) << ',' << (s.n_defined ? 1 : 0) << '\n';
}

template <int Dim>
nlohmann::json to_json(const FunctionalSample<Dim>& s) {
  return {{"x", json_point<Dim>(s.x)}, {"r", s.r},         {"D", json_number(s.D)},
          {"H", json_number(s.H)},     {"M", json_number(s.M)}, {"N", json_number(s.N)},
          {"V", json_number(s.V)},     {"quad_err", s.quad_err}, {"n_defined", s.n_defined}};
}

inline nlohmann::json to_json(const DerivativeCheck& c) {
  return {{"lhs", json_number(c.lhs)},         {"rhs", json_number(c.rhs)}, {"rhs_alt", json_number(c.rhs_alt)},
          {"residual", json_number(c.residual)}, {"tol", json_number(c.tol)}, {"relative", json_number(c.relative)}};
}

template <int Dim>
nlohmann::json to_json(const RadialProfile<Dim>& p) {
  nlohmann::json j;
  j["x"] = json_point<Dim>(p.x);
  j["u_center"] = p.u_center;
  j["certified_from"] = p.certified_from;
  j["m_monotone"] = p.m_monotone;
  j["n_monotone"] = p.n_monotone;
  j["h_monotone"] = p.h_monotone;
  j["samples"] = nlohmann::json::array();
  for (const auto& s : p.samples) j["samples"].push_back(to_json(s));
  j["intervals"] = nlohmann::json::array();
  for (const auto& iv : p.intervals) {
    j["intervals"].push_back({{"r_lo", iv.r_lo},
                              {"r_hi", iv.r_hi},
                              {"dM", json_number(iv.dM)},
                              {"dN", json_number(iv.dN)},
                              {"dH", json_number(iv.dH)},
                              {"m_ok", iv.m_ok},
                              {"n_checked", iv.n_checked},
                              {"n_ok", iv.n_ok},
                              {"h_ok", iv.h_ok}});
  }
  return j;
}

}  // namespace fbscope
