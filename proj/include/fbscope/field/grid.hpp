#pragma once

#include "fbscope/core.hpp"

#include <array>
#include <cstddef>
#include <string>

namespace fbscope {

/// Isotropic uniform grid over an axis-aligned box.
template <int Dim>
struct GridSpec {
  static constexpr int dim = Dim;

  Vec<Dim> origin = Vec<Dim>::Zero();
  std::array<int, Dim> cells{};
  double h = 0.0;

  /// Validating constructor: every axis needs >= 8 cells and the spacing must
  /// agree across axes to 1e-10 relative.
  static GridSpec make(const Vec<Dim>& origin, const Vec<Dim>& extent,
                       const std::array<int, Dim>& cells) {
    check_dim<Dim>();
    GridSpec g;
    g.origin = origin;
    g.cells = cells;
    for (int k = 0; k < Dim; ++k) {
      if (cells[k] < 8) throw ParameterError("GridSpec: cells_per_axis must be >= 8");
      if (!(extent[k] > 0.0)) throw ParameterError("GridSpec: extent must be positive");
    }
    g.h = extent[0] / cells[0];
    for (int k = 1; k < Dim; ++k) {
      const double hk = extent[k] / cells[k];
      if (std::abs(hk - g.h) > 1e-10 * g.h) throw ParameterError("GridSpec: spacing must be isotropic");
    }
    return g;
  }

  /// The cube [lo, hi]^Dim with n cells per axis.
  static GridSpec cube(double lo, double hi, int n) {
    std::array<int, Dim> c;
    c.fill(n);
    return make(Vec<Dim>::Constant(lo), Vec<Dim>::Constant(hi - lo), c);
  }

  /// Unchecked lattice used internally for quadrature around a ball.
  static GridSpec lattice(const Vec<Dim>& origin, double h, int n) {
    GridSpec g;
    g.origin = origin;
    g.cells.fill(n);
    g.h = h;
    return g;
  }

  Vec<Dim> extent() const {
    Vec<Dim> e;
    for (int k = 0; k < Dim; ++k) e[k] = cells[k] * h;
    return e;
  }
  Vec<Dim> upper() const { return origin + extent(); }

  std::array<int, Dim> nodes() const {
    std::array<int, Dim> n;
    for (int k = 0; k < Dim; ++k) n[k] = cells[k] + 1;
    return n;
  }

  std::size_t node_count() const {
    std::size_t n = 1;
    for (int k = 0; k < Dim; ++k) n *= static_cast<std::size_t>(cells[k] + 1);
    return n;
  }

  /// Row-major flat index: the last axis varies fastest.
  std::size_t index(const std::array<int, Dim>& i) const {
    std::size_t idx = 0;
    for (int k = 0; k < Dim; ++k) idx = idx * static_cast<std::size_t>(cells[k] + 1) + i[k];
    return idx;
  }

  std::array<int, Dim> multi_index(std::size_t idx) const {
    std::array<int, Dim> i;
    for (int k = Dim - 1; k >= 0; --k) {
      const auto n = static_cast<std::size_t>(cells[k] + 1);
      i[k] = static_cast<int>(idx % n);
      idx /= n;
    }
    return i;
  }

  Vec<Dim> node(const std::array<int, Dim>& i) const {
    Vec<Dim> p;
    for (int k = 0; k < Dim; ++k) p[k] = origin[k] + i[k] * h;
    return p;
  }

  bool contains(const Vec<Dim>& p) const {
    const double slack = 1e-12 * h;
    for (int k = 0; k < Dim; ++k) {
      if (p[k] < origin[k] - slack || p[k] > origin[k] + cells[k] * h + slack) return false;
    }
    return true;
  }

  /// Signed distance to the box boundary, positive inside.
  double boundary_distance(const Vec<Dim>& p) const {
    double d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < Dim; ++k) {
      d = std::min(d, p[k] - origin[k]);
      d = std::min(d, origin[k] + cells[k] * h - p[k]);
    }
    return d;
  }

  double cell_volume() const { return std::pow(h, Dim); }

  bool operator==(const GridSpec& o) const {
    return origin == o.origin && cells == o.cells && h == o.h;
  }
};

/// A ball B_r(x) tagged with whether it sits inside the grid with a 2h margin.
template <int Dim>
struct BallRegion {
  Vec<Dim> center = Vec<Dim>::Zero();
  double radius = 0.0;
  bool interior = false;

  static BallRegion make(const GridSpec<Dim>& grid, const Vec<Dim>& x, double r) {
    if (!(r > 0.0)) throw ParameterError("BallRegion: radius must be positive");
    return {x, r, grid.boundary_distance(x) > r + 2.0 * grid.h};
  }
};

}  // namespace fbscope
