#pragma once

// INI-style run configuration.  Keys are flattened to "section.key"; command
// line --set overrides win over the file.

#include "fbscope/core.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fbscope::cli {

/// Bad or inconsistent configuration; maps to exit code 3.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "field.analytic", "field.file", "field.dim", "field.cells", "field.lo", "field.hi", "field.evaluate",
      "solver.data", "solver.ladder", "solver.beta", "solver.tol", "solver.max_iter",
      "functionals.centers", "functionals.r_min", "functionals.r_max", "functionals.n_radii",
      "functionals.derivative_checks",
      "classify.r_min_cells", "classify.r_max_cells", "classify.n_radii", "classify.tol_class", "classify.gap",
      "classify.measure_centers", "classify.measure_radii", "classify.sigma_cells",
      "cover.oracle", "cover.synthetic", "cover.candidates", "cover.level", "cover.off_level", "cover.n_top",
      "cover.step", "cover.ratio", "cover.line_normal", "cover.line_offset", "cover.line_spacing", "cover.delta1",
      "cover.delta2", "cover.eps", "cover.r_stop", "cover.tau", "cover.max_nodes", "cover.root_center",
      "cover.root_radius", "cover.minkowski_s",
      "verify.criteria", "verify.tol_scale",
      "run.seed", "run.out"};
  return keys;
}

class RunConfig {
 public:
  RunConfig() = default;

  static RunConfig from_file(const std::string& path) {
    if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path);
    boost::property_tree::ptree pt;
    try {
      boost::property_tree::ini_parser::read_ini(path, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError(std::string("config parse error: ") + e.what());
    }
    RunConfig c;
    for (const auto& [section, sub] : pt) {
      if (sub.empty()) {
        c.set(section, sub.data());
        continue;
      }
      for (const auto& [key, leaf] : sub) c.set(section + "." + key, leaf.data());
    }
    return c;
  }

  /// "section.key=value"
  void apply_override(const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + kv + "'");
    set(kv.substr(0, eq), kv.substr(eq + 1));
  }

  void set(const std::string& key, const std::string& value) {
    if (!known_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");
    values_[key] = trim(value);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void erase(const std::string& key) { values_.erase(key); }

  std::string str(const std::string& key, const std::string& fallback = "") const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double num(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return parse_double(key, str(key));
  }

  int integer(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    const double v = num(key, 0.0);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError("'" + key + "' must be an integer");
    return static_cast<int>(v);
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto v = str(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("'" + key + "' must be true or false");
  }

  /// Comma-separated reals.
  std::vector<double> list(const std::string& key, std::vector<double> fallback = {}) const {
    if (!has(key)) return fallback;
    std::vector<double> out;
    std::stringstream ss(str(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(parse_double(key, item));
    }
    return out;
  }

  /// Semicolon-separated points, coordinates separated by commas.
  template <int Dim>
  std::vector<Vec<Dim>> points(const std::string& key, std::vector<Vec<Dim>> fallback = {}) const {
    if (!has(key)) return fallback;
    std::vector<Vec<Dim>> out;
    std::stringstream ss(str(key));
    std::string item;
    while (std::getline(ss, item, ';')) {
      if (trim(item).empty()) continue;
      RunConfig tmp;
      tmp.values_["p"] = item;
      const auto c = tmp.list("p");
      if (static_cast<int>(c.size()) != Dim)
        throw ConfigError("'" + key + "': expected " + std::to_string(Dim) + " coordinates in '" + trim(item) + "'");
      Vec<Dim> p;
      for (int d = 0; d < Dim; ++d) p[d] = c[d];
      out.push_back(p);
    }
    return out;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

  /// 64-bit FNV-1a over the sorted effective key/value pairs, command and
  /// seed.  The output directory is not part of the hash.
  std::string hash(const std::string& command, std::uint64_t seed) const {
    std::uint64_t h = 14695981039346656037ull;
    const auto feed = [&](const std::string& s) {
      for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
      }
    };
    feed("command=" + command + "\n");
    feed("seed=" + std::to_string(seed) + "\n");
    for (const auto& [k, v] : values_) {
      if (k == "run.out" || k == "run.seed") continue;
      feed(k + "=" + v + "\n");
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n\"");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n\"");
    return s.substr(a, b - a + 1);
  }

  static double parse_double(const std::string& key, const std::string& text) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(text, &pos);
      if (pos != text.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("'" + key + "': not a number: '" + text + "'");
    }
  }

  std::map<std::string, std::string> values_;
};

}  // namespace fbscope::cli
