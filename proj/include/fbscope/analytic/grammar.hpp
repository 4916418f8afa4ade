#pragma once

// Text names for the closed-form catalogue:
//   wedge:q=0.5,nu=en   wedge1:q=0.5   halfplane:a=1,nu=e2   absharm:v=x2-y2
//   homabs:k=2   cusp   zero   twoslope:ap=1,am=0.5
// A normal is en (last axis), e1/e2/e3, or components separated by ';'.

#include "fbscope/analytic/solution.hpp"

#include <map>
#include <sstream>
#include <string>

namespace fbscope {

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ParameterError("solution grammar: '" + key + "' expects a number, got '" + text + "'");
  }
}

template <int Dim>
Vec<Dim> parse_normal(const std::string& text) {
  if (text == "en") return Vec<Dim>::Unit(Dim - 1);
  if (text.size() == 2 && text[0] == 'e' && text[1] >= '1' && text[1] <= '0' + Dim) return Vec<Dim>::Unit(text[1] - '1');
  Vec<Dim> v;
  std::stringstream ss(text);
  std::string item;
  int k = 0;
  while (std::getline(ss, item, ';')) {
    if (k >= Dim) throw ParameterError("solution grammar: normal has too many components");
    v[k++] = parse_number("nu", trim(item));
  }
  if (k != Dim) throw ParameterError("solution grammar: normal has too few components");
  if (!(v.norm() > 0.0)) throw ParameterError("solution grammar: zero normal");
  return v.normalized();
}

}  // namespace detail

template <int Dim>
AnalyticSolution<Dim> parse_solution(const std::string& spec) {
  const std::string text = detail::trim(spec);
  const auto colon = text.find(':');
  const std::string kind = detail::trim(text.substr(0, colon));
  std::map<std::string, std::string> kv;
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = detail::trim(item);
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw ParameterError("solution grammar: expected key=value in '" + item + "'");
      kv[detail::trim(item.substr(0, eq))] = detail::trim(item.substr(eq + 1));
    }
  }
  const auto take = [&](const std::string& key, const std::string& fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  const auto number = [&](const std::string& key, const std::string& fallback) {
    return detail::parse_number(key, take(key, fallback));
  };

  std::optional<AnalyticSolution<Dim>> out;
  if (kind == "zero") {
    out = AnalyticSolution<Dim>::zero();
  } else if (kind == "wedge" || kind == "wedge1") {
    const double q = number("q", "1");
    const auto nu = detail::parse_normal<Dim>(take("nu", "en"));
    out = kind == "wedge" ? AnalyticSolution<Dim>::wedge(q, nu) : AnalyticSolution<Dim>::wedge_chi_one(q, nu);
  } else if (kind == "halfplane") {
    const double a = number("a", "1");
    out = AnalyticSolution<Dim>::halfplane(a, detail::parse_normal<Dim>(take("nu", "en")));
  } else if (kind == "absharm") {
    out = AnalyticSolution<Dim>::abs_harmonic(Polynomial<Dim>::parse(take("v", "x2-y2")));
  } else if (kind == "homabs") {
    out = AnalyticSolution<Dim>::homogeneous_abs(static_cast<int>(number("k", "2")));
  } else if (kind == "cusp") {
    out = AnalyticSolution<Dim>::cusp();
  } else if (kind == "twoslope") {
    const double ap = number("ap", "1");
    const double am = number("am", "0.5");
    out = AnalyticSolution<Dim>::two_slope(ap, am, detail::parse_normal<Dim>(take("nu", "en")));
  } else {
    throw ParameterError("solution grammar: unknown kind '" + kind + "'");
  }
  if (!kv.empty()) throw ParameterError("solution grammar: unknown key '" + kv.begin()->first + "' for " + kind);
  return *out;
}

}  // namespace fbscope
