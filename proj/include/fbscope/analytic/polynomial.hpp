#pragma once

#include "fbscope/core.hpp"

#include <array>
#include <cctype>
#include <map>
#include <string>
#include <string_view>

namespace fbscope {

/// Sparse real polynomial in Dim variables.
template <int Dim>
class Polynomial {
 public:
  using Exponent = std::array<int, Dim>;

  Polynomial() = default;

  static Polynomial constant(double c) {
    Polynomial p;
    p.add(Exponent{}, c);
    return p;
  }

  /// c · x_k
  static Polynomial coordinate(int k, double c = 1.0) {
    Exponent e{};
    e[k] = 1;
    Polynomial p;
    p.add(e, c);
    return p;
  }

  /// Σ c_k x_k
  static Polynomial linear(const Vec<Dim>& c) {
    Polynomial p;
    for (int k = 0; k < Dim; ++k) p += coordinate(k, c[k]);
    return p;
  }

  /// Re (x + i y)^k in the first two variables.
  static Polynomial real_power(int k) {
    static_assert(Dim >= 2);
    Polynomial p;
    double binom = 1.0;
    for (int j = 0; j <= k; ++j) {
      if (j % 2 == 0) {
        Exponent e{};
        e[0] = k - j;
        e[1] = j;
        p.add(e, (j / 2) % 2 == 0 ? binom : -binom);
      }
      binom = binom * (k - j) / (j + 1);
    }
    return p;
  }

  void add(const Exponent& e, double c) {
    if (c == 0.0) return;
    auto [it, inserted] = terms_.try_emplace(e, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  const std::map<Exponent, double>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  int degree() const {
    int d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, total(e));
    return d;
  }

  double operator()(const Vec<Dim>& p) const {
    double v = 0.0;
    for (const auto& [e, c] : terms_) {
      double m = c;
      for (int k = 0; k < Dim; ++k) m *= ipow(p[k], e[k]);
      v += m;
    }
    return v;
  }

  Polynomial derivative(int k) const {
    Polynomial d;
    for (const auto& [e, c] : terms_) {
      if (e[k] == 0) continue;
      Exponent f = e;
      --f[k];
      d.add(f, c * e[k]);
    }
    return d;
  }

  Vec<Dim> gradient(const Vec<Dim>& p) const {
    Vec<Dim> g;
    for (int k = 0; k < Dim; ++k) {
      double v = 0.0;
      for (const auto& [e, c] : terms_) {
        if (e[k] == 0) continue;
        double m = c * e[k];
        for (int j = 0; j < Dim; ++j) m *= ipow(p[j], j == k ? e[j] - 1 : e[j]);
        v += m;
      }
      g[k] = v;
    }
    return g;
  }

  Polynomial laplacian() const {
    Polynomial l;
    for (int k = 0; k < Dim; ++k) l += derivative(k).derivative(k);
    return l;
  }

  Polynomial& operator+=(const Polynomial& o) {
    for (const auto& [e, c] : o.terms_) add(e, c);
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }

  friend Polynomial operator*(double s, Polynomial a) {
    if (s == 0.0) return Polynomial{};
    for (auto& [e, c] : a.terms_) c *= s;
    return a;
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    Polynomial out;
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_) {
        Exponent e;
        for (int k = 0; k < Dim; ++k) e[k] = ea[k] + eb[k];
        out.add(e, ca * cb);
      }
    return out;
  }

  /// y ↦ P(x + r y).
  Polynomial compose_affine(const Vec<Dim>& x, double r) const {
    Polynomial out;
    for (const auto& [e, c] : terms_) {
      Polynomial m = constant(c);
      for (int k = 0; k < Dim; ++k) {
        if (e[k] == 0) continue;
        Polynomial axis;  // (x_k + r y_k)^{e_k}
        double binom = 1.0;
        for (int j = 0; j <= e[k]; ++j) {
          Exponent f{};
          f[k] = j;
          axis.add(f, binom * ipow(x[k], e[k] - j) * ipow(r, j));
          binom = binom * (e[k] - j) / (j + 1);
        }
        m = m * axis;
      }
      out += m;
    }
    return out;
  }

  /// ∫_{∂B_1} P dH^{Dim-1}
  double sphere_integral() const {
    double s = 0.0;
    for (const auto& [e, c] : terms_) s += c * sphere_moment(e);
    return s;
  }

  /// ∫_{B_1} P
  double ball_integral() const {
    double s = 0.0;
    for (const auto& [e, c] : terms_) s += c * sphere_moment(e) / (total(e) + Dim);
    return s;
  }

  /// ∫_{∂B_1} ω^e = 2 Π Γ((e_i+1)/2) / Γ((|e|+Dim)/2), zero when some e_i is odd.
  static double sphere_moment(const Exponent& e) {
    double lg = 0.0;
    for (int k = 0; k < Dim; ++k) {
      if (e[k] % 2 != 0) return 0.0;
      lg += std::lgamma(0.5 * (e[k] + 1));
    }
    return 2.0 * std::exp(lg - std::lgamma(0.5 * (total(e) + Dim)));
  }

  /// Parses "x2-y2", "y+0.5*x2-0.5*y2", "3xy", "x*z" (variables x, y, z; a
  /// trailing digit is an exponent).
  static Polynomial parse(std::string_view text) {
    Polynomial p;
    std::size_t i = 0;
    const auto skip = [&] {
      while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };
    skip();
    if (i >= text.size()) throw ParameterError("polynomial: empty expression");
    while (i < text.size()) {
      double sign = 1.0;
      skip();
      if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
        sign = text[i] == '-' ? -1.0 : 1.0;
        ++i;
        skip();
      }
      double coef = 1.0;
      bool have_number = false;
      if (i < text.size() && (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.')) {
        std::size_t used = 0;
        coef = std::stod(std::string(text.substr(i)), &used);
        i += used;
        have_number = true;
        skip();
        if (i < text.size() && text[i] == '*') ++i;
      }
      Exponent e{};
      bool have_var = false;
      while (i < text.size()) {
        skip();
        if (i >= text.size()) break;
        const char ch = text[i];
        int var = ch == 'x' ? 0 : ch == 'y' ? 1 : ch == 'z' ? 2 : -1;
        if (var < 0) break;
        if (var >= Dim) throw ParameterError("polynomial: variable out of range for this dimension");
        ++i;
        int power = 1;
        if (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
          power = 0;
          while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) power = power * 10 + (text[i++] - '0');
        }
        e[var] += power;
        have_var = true;
        if (i < text.size() && text[i] == '*') ++i;
      }
      if (!have_number && !have_var) throw ParameterError("polynomial: malformed term in '" + std::string(text) + "'");
      p.add(e, sign * coef);
      skip();
      if (i < text.size() && text[i] != '+' && text[i] != '-')
        throw ParameterError("polynomial: unexpected character in '" + std::string(text) + "'");
    }
    return p;
  }

 private:
  static int total(const Exponent& e) {
    int t = 0;
    for (int k = 0; k < Dim; ++k) t += e[k];
    return t;
  }

  static double ipow(double b, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
  }

  std::map<Exponent, double> terms_;
};

}  // namespace fbscope
