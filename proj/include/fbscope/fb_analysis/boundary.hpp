#pragma once

#include "fbscope/field/scalar_field.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

namespace fbscope {

enum class PointClass { Regular, SigmaH, Degenerate, Unresolved };

inline std::string to_string(PointClass c) {
  switch (c) {
    case PointClass::Regular: return "regular";
    case PointClass::SigmaH: return "sigmaH";
    case PointClass::Degenerate: return "degenerate";
    case PointClass::Unresolved: return "unresolved";
  }
  return "unresolved";
}

template <int Dim>
struct BoundaryPoint {
  Vec<Dim> x = Vec<Dim>::Zero();
  double u = 0.0;        // interpolated value at x
  double measure = 0.0;  // share of boundary length (2D) or area (3D) carried by this point
  double M0 = kNaN;
  double N0 = kNaN;
  double H0 = kNaN;       // extrapolated H(0+)
  double H_limit = kNaN;  // H0, or 0 when H decays like a positive power of r
  double H_growth = kNaN;  // log-slope of H between the two smallest rungs
  PointClass label = PointClass::Unresolved;
  bool classified = false;
  bool out_of_domain = false;  // ladder did not fit in the data region
  Vec<Dim> nu = Vec<Dim>::Zero();
};

/// Zero-boundary crossings of a grid field plus the polyline (2D) or polygon
/// (3D) facets joining them cell by cell.
template <int Dim>
struct BoundaryPointSet {
  std::vector<BoundaryPoint<Dim>> points;
  std::vector<std::vector<int>> facets;
  double h = 0.0;
  double threshold = 0.0;
  bool u_identically_zero = false;

  double total_measure() const {
    double s = 0.0;
    for (const auto& p : points) s += p.measure;
    return s;
  }
};

namespace detail {

// Points closer than h/2 share one id.
template <int Dim>
class PointMerger {
 public:
  PointMerger(double h, std::vector<BoundaryPoint<Dim>>& pts) : cell_(0.5 * h), pts_(pts) {}

  int insert(const Vec<Dim>& p, double u) {
    const auto key = bucket(p);
    std::array<long, Dim> k;
    for (int off = 0; off < ipow3(); ++off) {
      int o = off;
      for (int d = 0; d < Dim; ++d) {
        k[d] = key[d] + (o % 3) - 1;
        o /= 3;
      }
      const auto it = grid_.find(hash(k));
      if (it == grid_.end()) continue;
      for (int id : it->second)
        if ((pts_[id].x - p).norm() < cell_) return id;
    }
    BoundaryPoint<Dim> bp;
    bp.x = p;
    bp.u = u;
    pts_.push_back(bp);
    const int id = static_cast<int>(pts_.size()) - 1;
    grid_[hash(key)].push_back(id);
    return id;
  }

 private:
  static constexpr int ipow3() { return Dim == 2 ? 9 : 27; }
  std::array<long, Dim> bucket(const Vec<Dim>& p) const {
    std::array<long, Dim> k;
    for (int d = 0; d < Dim; ++d) k[d] = static_cast<long>(std::floor(p[d] / cell_));
    return k;
  }
  static std::size_t hash(const std::array<long, Dim>& k) {
    std::size_t s = 1469598103934665603ull;
    for (long v : k) s = (s ^ static_cast<std::size_t>(v + (1l << 30))) * 1099511628211ull;
    return s;
  }
  double cell_;
  std::vector<BoundaryPoint<Dim>>& pts_;
  std::unordered_map<std::size_t, std::vector<int>> grid_;
};

inline double polygon_area_3d(const std::vector<Vec<3>>& p, std::vector<int>& order) {
  Vec<3> c = Vec<3>::Zero();
  for (const auto& q : p) c += q;
  c /= static_cast<double>(p.size());
  Eigen::Matrix3d S = Eigen::Matrix3d::Zero();
  for (const auto& q : p) S += (q - c) * (q - c).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(S);
  const Vec<3> e1 = es.eigenvectors().col(2), e2 = es.eigenvectors().col(1);
  order.resize(p.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::atan2((p[a] - c).dot(e2), (p[a] - c).dot(e1)) < std::atan2((p[b] - c).dot(e2), (p[b] - c).dot(e1));
  });
  double area = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Vec<3>& a = p[order[i]];
    const Vec<3>& b = p[order[(i + 1) % order.size()]];
    area += 0.5 * (a - c).cross(b - c).norm();
  }
  return area;
}

}  // namespace detail

/// Every grid edge joining a node with u > t to a node with u ≤ t, where
/// t = 10⁻⁸·max u, contributes one crossing of the level t.
template <int Dim>
BoundaryPointSet<Dim> extract_boundary(const ScalarField<Dim>& f) {
  const auto& g = f.spec();
  BoundaryPointSet<Dim> out;
  out.h = g.h;
  out.threshold = 1e-8 * f.max_value();
  if (f.max_value() == 0.0) {
    out.u_identically_zero = true;
    return out;
  }
  const double t = out.threshold;
  detail::PointMerger<Dim> merge(g.h, out.points);
  // Crossing ids per directed edge, keyed by (low node index, axis).
  std::unordered_map<std::size_t, int> edge_id;
  const auto edge_key = [&](std::size_t node, int axis) { return node * Dim + axis; };
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const auto m = g.multi_index(i);
    for (int k = 0; k < Dim; ++k) {
      if (m[k] == g.cells[k]) continue;
      auto m2 = m;
      ++m2[k];
      const double a = f.at(m), b = f.at(m2);
      if ((a > t) == (b > t)) continue;
      double s = (a - t) / (a - b);
      // Inside a zero plateau the linear crossing is pinned to the last zero
      // node; extrapolate the positive side instead.  A zero node with
      // positive values on both sides is a crease and is its own crossing.
      const bool a_pos = a > t;
      auto far = a_pos ? m : m2;
      far[k] += a_pos ? -1 : 1;
      auto beyond = a_pos ? m2 : m;
      beyond[k] += a_pos ? 1 : -1;
      const bool plateau = beyond[k] < 0 || beyond[k] > g.cells[k] || f.at(beyond) <= t;
      if (std::min(a, b) == 0.0 && plateau && far[k] >= 0 && far[k] <= g.cells[k]) {
        const double up = a_pos ? a : b;
        const double slope = f.at(far) - up;
        if (slope > 0.0) {
          const double d = std::min(1.0, (up - t) / slope);
          s = a_pos ? d : 1.0 - d;
        }
      }
      const Vec<Dim> p = g.node(m) + std::clamp(s, 0.0, 1.0) * g.h * Vec<Dim>::Unit(k);
      edge_id[edge_key(i, k)] = merge.insert(p, f.interpolate(p));
    }
  }
  // Facets cell by cell.
  std::map<std::vector<int>, bool> seen;
  std::array<int, Dim> c{};
  std::array<int, Dim> lim;
  for (int k = 0; k < Dim; ++k) lim[k] = g.cells[k];
  const auto add_measure = [&](const std::vector<int>& ids, double m) {
    for (int id : ids) out.points[id].measure += m / static_cast<double>(ids.size());
  };
  while (true) {
    std::vector<int> ids;
    for (int corner = 0; corner < (1 << Dim); ++corner) {
      auto m = c;
      for (int k = 0; k < Dim; ++k) m[k] += (corner >> k) & 1;
      for (int k = 0; k < Dim; ++k) {
        if ((corner >> k) & 1) continue;
        const auto it = edge_id.find(edge_key(g.index(m), k));
        if (it != edge_id.end()) ids.push_back(it->second);
      }
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if constexpr (Dim == 2) {
      std::vector<std::pair<int, int>> segs;
      if (ids.size() == 2) {
        segs.emplace_back(ids[0], ids[1]);
      } else if (ids.size() == 3) {
        // Connect the two shortest sides of the triangle.
        std::array<std::pair<double, std::pair<int, int>>, 3> e{
            {{(out.points[ids[0]].x - out.points[ids[1]].x).norm(), {ids[0], ids[1]}},
             {(out.points[ids[1]].x - out.points[ids[2]].x).norm(), {ids[1], ids[2]}},
             {(out.points[ids[0]].x - out.points[ids[2]].x).norm(), {ids[0], ids[2]}}}};
        std::sort(e.begin(), e.end());
        segs.push_back(e[0].second);
        segs.push_back(e[1].second);
      } else if (ids.size() == 4) {
        // Saddle cell: the pairing with the shorter total length.
        const auto len = [&](int a, int b) { return (out.points[a].x - out.points[b].x).norm(); };
        std::array<std::array<int, 4>, 3> pairings{{{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}}};
        int best = 0;
        double best_len = std::numeric_limits<double>::infinity();
        for (int q = 0; q < 3; ++q) {
          const auto& P = pairings[q];
          const double l = len(ids[P[0]], ids[P[1]]) + len(ids[P[2]], ids[P[3]]);
          if (l < best_len) {
            best_len = l;
            best = q;
          }
        }
        const auto& P = pairings[best];
        segs.emplace_back(ids[P[0]], ids[P[1]]);
        segs.emplace_back(ids[P[2]], ids[P[3]]);
      }
      for (auto [a, b] : segs) {
        std::vector<int> key{std::min(a, b), std::max(a, b)};
        if (seen.emplace(key, true).second) {
          add_measure(key, (out.points[a].x - out.points[b].x).norm());
          out.facets.push_back(key);
        }
      }
    } else {
      if (ids.size() >= 3 && seen.emplace(ids, true).second) {
        std::vector<Vec<3>> pts;
        for (int id : ids) pts.push_back(out.points[id].x);
        std::vector<int> order;
        const double area = detail::polygon_area_3d(pts, order);
        std::vector<int> poly;
        for (int o : order) poly.push_back(ids[o]);
        add_measure(poly, area);
        out.facets.push_back(poly);
      }
    }
    int k = Dim - 1;
    while (k >= 0 && ++c[k] >= lim[k]) {
      c[k] = 0;
      --k;
    }
    if (k < 0) break;
  }
  return out;
}

}  // namespace fbscope
