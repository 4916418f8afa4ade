#pragma once

#include "fbscope/functionals/emit.hpp"
#include "fbscope/geometry/oracle.hpp"

#include <json.hpp>

#include <deque>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace fbscope {

enum class NodeStatus { Terminal, Subdivided, Leaf, Flagged, Empty };
enum class DropLabel { NA, Large, Small };

inline const char* to_string(NodeStatus s) {
  switch (s) {
    case NodeStatus::Terminal: return "terminal";
    case NodeStatus::Subdivided: return "subdivided";
    case NodeStatus::Leaf: return "leaf";
    case NodeStatus::Flagged: return "flagged";
    case NodeStatus::Empty: return "empty";
  }
  return "flagged";
}

inline const char* to_string(DropLabel d) {
  switch (d) {
    case DropLabel::Large: return "large";
    case DropLabel::Small: return "small";
    case DropLabel::NA: return "n/a";
  }
  return "n/a";
}

template <int Dim>
struct CoveringNode {
  Vec<Dim> center = Vec<Dim>::Zero();
  double radius = 0.0;
  int generation = 0;
  int parent = -1;
  NodeStatus status = NodeStatus::Empty;
  DropLabel drop = DropLabel::NA;
  double nmax = kNaN;          // max over candidates in the ball of N_y(20·radius)
  int n_candidates = 0;
  int n_E = 0;                 // size of E when subdivided
  int large_drops = 0;         // large-drop labels on the path from the root, inclusive
  bool drop_consistent = true;  // large drop ⇒ nmax ≤ parent nmax − ε
  std::string flag_reason;
  std::vector<int> children;

  bool nonterminal() const { return status == NodeStatus::Subdivided || status == NodeStatus::Leaf; }
};

struct CoveringConfig {
  double delta1 = 0.1;
  double delta2 = 0.05;
  double eps = 0.1;
  double r_stop = 1e-3;
  double tau = 0.5;  // exponent n − 2 + τ of the second packing sum
  std::size_t max_nodes = 200000;
};

struct GenerationStats {
  int generation = 0;
  double radius = 0.0;
  int count = 0;
  int nonterminal = 0;
  int terminal = 0;
  int flagged = 0;
};

struct MinkowskiSample {
  double s = 0.0;
  double volume = 0.0;
  int packing = 0;
};

template <int Dim>
struct CoveringReport {
  CoveringConfig config;
  std::string oracle_provenance, oracle_id;
  std::vector<CoveringNode<Dim>> nodes;  // nodes[0] is the root; breadth-first order
  std::vector<GenerationStats> generations;
  std::vector<int> terminals;
  double packing_n1 = 0.0;    // Σ_terminal r^{n−1}
  double packing_tau = 0.0;   // Σ_terminal r^{n−2+τ}
  std::vector<MinkowskiSample> minkowski;
  double nmax_root = kNaN;
  int budget = 0;             // ⌈(N^max_root − 1)/ε⌉ + 1
  int max_large_drops = 0;
  int drop_violations = 0;    // large-drop children whose N^max did not fall by ε
  bool budget_ok = true;
  bool truncated = false;     // node cap reached
  int flagged = 0;

  int max_nonterminal_per_generation() const {
    int m = 0;
    for (const auto& g : generations) m = std::max(m, g.nonterminal);
    return m;
  }
};

namespace detail {

template <int Dim>
class PointHash {
 public:
  explicit PointHash(double cell) : cell_(cell) {}

  void insert(const Vec<Dim>& p, int id) { map_[key(cell_of(p))].push_back(id); }

  /// Calls fn(id) for every stored id within one cell of p.
  template <class Fn>
  void near(const Vec<Dim>& p, Fn&& fn) const {
    const auto c = cell_of(p);
    std::array<long, Dim> k;
    for (int off = 0; off < (Dim == 2 ? 9 : 27); ++off) {
      int o = off;
      for (int d = 0; d < Dim; ++d) {
        k[d] = c[d] + (o % 3) - 1;
        o /= 3;
      }
      const auto it = map_.find(key(k));
      if (it == map_.end()) continue;
      for (int id : it->second) fn(id);
    }
  }

 private:
  std::array<long, Dim> cell_of(const Vec<Dim>& p) const {
    std::array<long, Dim> k;
    for (int d = 0; d < Dim; ++d) k[d] = static_cast<long>(std::floor(p[d] / cell_));
    return k;
  }
  static std::size_t key(const std::array<long, Dim>& k) {
    std::size_t s = 1469598103934665603ull;
    for (long v : k) s = (s ^ static_cast<std::size_t>(v + (1l << 40))) * 1099511628211ull;
    return s;
  }
  double cell_;
  std::unordered_map<std::size_t, std::vector<int>> map_;
};

}  // namespace detail

/// Cells of side `cell` (default s/10) whose centers lie in the window ball
/// and within s of the set, times the cell volume.
template <int Dim>
double minkowski_estimate(const std::vector<Vec<Dim>>& pts, double s, const std::type_identity_t<Vec<Dim>>& wc, double wr,
                          double cell = 0.0) {
  if (!(s > 0.0)) throw ParameterError("minkowski_estimate: s must be positive");
  if (cell <= 0.0) cell = s / 10.0;
  std::unordered_set<std::size_t> marked;
  const int span = static_cast<int>(std::ceil(s / cell)) + 1;
  const auto key = [](const std::array<long, Dim>& k) {
    std::size_t h = 1469598103934665603ull;
    for (long v : k) h = (h ^ static_cast<std::size_t>(v + (1l << 40))) * 1099511628211ull;
    return h;
  };
  for (const auto& p : pts) {
    if ((p - wc).norm() > wr + s) continue;
    std::array<long, Dim> base, k;
    for (int d = 0; d < Dim; ++d) base[d] = static_cast<long>(std::floor(p[d] / cell));
    std::array<int, Dim> o;
    o.fill(-span);
    while (true) {
      Vec<Dim> c;
      for (int d = 0; d < Dim; ++d) {
        k[d] = base[d] + o[d];
        c[d] = (static_cast<double>(k[d]) + 0.5) * cell;
      }
      if ((c - p).norm() <= s && (c - wc).norm() <= wr) marked.insert(key(k));
      int d = 0;
      while (d < Dim && ++o[d] > span) o[d++] = -span;
      if (d == Dim) break;
    }
  }
  return static_cast<double>(marked.size()) * std::pow(cell, Dim);
}

/// Greedy, lowest index first: a point joins if its s-ball is disjoint from
/// those already chosen (centers ≥ 2s apart).
template <int Dim>
int disjoint_packing_count(const std::vector<Vec<Dim>>& pts, double s, const std::type_identity_t<Vec<Dim>>& wc, double wr) {
  if (!(s > 0.0)) throw ParameterError("disjoint_packing_count: s must be positive");
  detail::PointHash<Dim> hash(2.0 * s);
  std::vector<Vec<Dim>> chosen;
  for (const auto& p : pts) {
    if ((p - wc).norm() > wr) continue;
    bool ok = true;
    hash.near(p, [&](int id) { ok = ok && (chosen[id] - p).norm() >= 2.0 * s; });
    if (!ok) continue;
    hash.insert(p, static_cast<int>(chosen.size()));
    chosen.push_back(p);
  }
  return static_cast<int>(chosen.size());
}

/// Generation-by-generation covering of the candidate set.  A node with
/// N^max < 1 + δ₁ is terminal.  Otherwise its candidates are covered by balls
/// of radius δ₂·radius centered at candidates picked greedily (lowest index
/// first, centers ≥ δ₂·radius apart); a child whose candidates miss
/// E = {y : N^max − N_y(radius) < ε} has a large drop, the others a small drop.
/// Non-terminal nodes below r_stop are leaves.
template <int Dim>
CoveringReport<Dim> covering_tree(const std::vector<Vec<Dim>>& candidates, const FrequencyOracle<Dim>& oracle,
                                  const std::type_identity_t<Vec<Dim>>& root_center, double root_radius, const CoveringConfig& cfg,
                                  const std::vector<double>& minkowski_s = {}) {
  if (!(cfg.delta1 > 0.0) || !(cfg.eps > 0.0) || !(cfg.r_stop > 0.0) || !(root_radius > 0.0))
    throw ParameterError("covering_tree: δ₁, ε, r_stop and the root radius must be positive");
  if (!(cfg.delta2 > 0.0) || cfg.delta2 > std::min(cfg.delta1, 1.0 / 20.0) + 1e-15)
    throw ParameterError("covering_tree: need 0 < δ₂ ≤ min(δ₁, 1/20)");
  CoveringReport<Dim> rep;
  rep.config = cfg;
  rep.oracle_provenance = oracle.provenance;
  rep.oracle_id = oracle.id;

  // N_y(r) cache keyed by (candidate, generation, which radius).
  std::unordered_map<std::uint64_t, FrequencyValue> cache;
  const auto query = [&](int idx, int gen, bool big, double r) {
    const std::uint64_t key = (static_cast<std::uint64_t>(idx) << 12) | (static_cast<std::uint64_t>(gen) << 1) | big;
    const auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const auto v = oracle(candidates[idx], r);
    cache.emplace(key, v);
    return v;
  };

  struct Pending {
    int node;
    std::vector<int> cands;
  };
  std::deque<Pending> queue;
  {
    CoveringNode<Dim> root;
    root.center = root_center;
    root.radius = root_radius;
    std::vector<int> cands;
    for (int i = 0; i < static_cast<int>(candidates.size()); ++i)
      if ((candidates[i] - root_center).norm() <= root_radius) cands.push_back(i);
    rep.nodes.push_back(root);
    queue.push_back({0, std::move(cands)});
  }

  while (!queue.empty()) {
    Pending job = std::move(queue.front());
    queue.pop_front();
    auto& nd = rep.nodes[job.node];
    const double r = nd.radius;
    const int gen = nd.generation;
    nd.n_candidates = static_cast<int>(job.cands.size());
    if (job.cands.empty()) {
      nd.status = NodeStatus::Empty;
      continue;
    }
    if (gen >= 2040) throw ParameterError("covering_tree: generation limit exceeded");
    double nmax = kNegInf;
    bool gap = false;
    for (int i : job.cands) {
      const auto v = query(i, gen, true, 20.0 * r);
      if (!v.defined) gap = true;
      else nmax = std::max(nmax, v.N);
    }
    nd.nmax = nmax;
    if (nd.parent >= 0 && nd.drop == DropLabel::Large)
      nd.drop_consistent = nmax <= rep.nodes[nd.parent].nmax - cfg.eps + 1e-12;
    if (gap) {
      nd.status = NodeStatus::Flagged;
      nd.flag_reason = "oracle undefined";
      continue;
    }
    if (nmax < 1.0 + cfg.delta1) {
      nd.status = NodeStatus::Terminal;
      continue;
    }
    if (r < cfg.r_stop) {
      nd.status = NodeStatus::Leaf;
      continue;
    }
    // E, treating undefined small-radius values as members (small drop).
    std::vector<char> inE(job.cands.size(), 0);
    int nE = 0;
    for (std::size_t a = 0; a < job.cands.size(); ++a) {
      const auto v = query(job.cands[a], gen, false, r);
      inE[a] = !v.defined || nmax - v.N < cfg.eps;
      nE += inE[a];
    }
    nd.n_E = nE;
    const double rc = cfg.delta2 * r;
    detail::PointHash<Dim> centers(rc);
    std::vector<int> picked;  // positions in job.cands
    for (std::size_t a = 0; a < job.cands.size(); ++a) {
      const auto& y = candidates[job.cands[a]];
      bool ok = true;
      centers.near(y, [&](int c) { ok = ok && (candidates[job.cands[picked[c]]] - y).norm() >= rc; });
      if (!ok) continue;
      centers.insert(y, static_cast<int>(picked.size()));
      picked.push_back(static_cast<int>(a));
    }
    if (rep.nodes.size() + picked.size() > cfg.max_nodes) {
      nd.status = NodeStatus::Flagged;
      nd.flag_reason = "node cap";
      rep.truncated = true;
      continue;
    }
    std::vector<std::vector<int>> child_cands(picked.size());
    std::vector<char> child_hits_E(picked.size(), 0);
    for (std::size_t a = 0; a < job.cands.size(); ++a) {
      const auto& y = candidates[job.cands[a]];
      centers.near(y, [&](int c) {
        if ((candidates[job.cands[picked[c]]] - y).norm() <= rc) {
          child_cands[c].push_back(job.cands[a]);
          child_hits_E[c] |= inE[a];
        }
      });
    }
    nd.status = NodeStatus::Subdivided;
    const int parent_drops = nd.large_drops;
    for (std::size_t c = 0; c < picked.size(); ++c) {
      std::sort(child_cands[c].begin(), child_cands[c].end());
      CoveringNode<Dim> ch;
      ch.center = candidates[job.cands[picked[c]]];
      ch.radius = rc;
      ch.generation = gen + 1;
      ch.parent = job.node;
      ch.drop = child_hits_E[c] ? DropLabel::Small : DropLabel::Large;
      ch.large_drops = parent_drops + (ch.drop == DropLabel::Large);
      const int id = static_cast<int>(rep.nodes.size());
      rep.nodes[job.node].children.push_back(id);
      rep.nodes.push_back(std::move(ch));
      queue.push_back({id, std::move(child_cands[c])});
    }
  }

  // Reductions.
  const double n = Dim;
  rep.nmax_root = rep.nodes[0].nmax;
  rep.budget = std::isfinite(rep.nmax_root)
                   ? static_cast<int>(std::ceil(std::max(0.0, rep.nmax_root - 1.0) / cfg.eps)) + 1
                   : 0;
  for (int i = 0; i < static_cast<int>(rep.nodes.size()); ++i) {
    const auto& nd = rep.nodes[i];
    if (static_cast<int>(rep.generations.size()) <= nd.generation) {
      GenerationStats g;
      g.generation = static_cast<int>(rep.generations.size());
      g.radius = nd.radius;
      rep.generations.push_back(g);
    }
    auto& g = rep.generations[nd.generation];
    ++g.count;
    if (nd.nonterminal()) ++g.nonterminal;
    if (nd.status == NodeStatus::Terminal) {
      ++g.terminal;
      rep.terminals.push_back(i);
      rep.packing_n1 += std::pow(nd.radius, n - 1.0);
      rep.packing_tau += std::pow(nd.radius, n - 2.0 + cfg.tau);
    }
    if (nd.status == NodeStatus::Flagged) {
      ++g.flagged;
      ++rep.flagged;
    }
    rep.max_large_drops = std::max(rep.max_large_drops, nd.large_drops);
    if (!nd.drop_consistent) ++rep.drop_violations;
  }
  rep.budget_ok = std::isfinite(rep.nmax_root) && rep.max_large_drops <= rep.budget;
  for (double s : minkowski_s) {
    std::vector<Vec<Dim>> inside;
    for (const auto& y : candidates)
      if ((y - root_center).norm() <= root_radius) inside.push_back(y);
    rep.minkowski.push_back({s, minkowski_estimate(inside, s, root_center, root_radius),
                             disjoint_packing_count(inside, s, root_center, root_radius)});
  }
  return rep;
}

/// Every candidate in the root ball lies in a ball that was not subdivided.
template <int Dim>
bool covering_sound(const CoveringReport<Dim>& rep, const std::vector<Vec<Dim>>& candidates) {
  const auto& root = rep.nodes.at(0);
  std::vector<const CoveringNode<Dim>*> finals;
  for (const auto& nd : rep.nodes)
    if (nd.status != NodeStatus::Subdivided) finals.push_back(&nd);
  if (finals.empty()) return false;
  for (const auto& y : candidates) {
    if ((y - root.center).norm() > root.radius) continue;
    bool covered = false;
    for (const auto* nd : finals) {
      if ((y - nd->center).norm() <= nd->radius * (1.0 + 1e-12)) {
        covered = true;
        break;
      }
    }
    if (!covered) return false;
  }
  return true;
}

template <int Dim>
nlohmann::json to_json(const CoveringReport<Dim>& rep) {
  using nlohmann::json;
  json j;
  j["oracle"] = {{"provenance", rep.oracle_provenance}, {"id", rep.oracle_id}};
  j["config"] = {{"delta1", rep.config.delta1}, {"delta2", rep.config.delta2}, {"eps", rep.config.eps},
                 {"r_stop", rep.config.r_stop},   {"tau", rep.config.tau},       {"max_nodes", rep.config.max_nodes}};
  j["nodes"] = json::array();
  for (std::size_t i = 0; i < rep.nodes.size(); ++i) {
    const auto& nd = rep.nodes[i];
    json o = {{"id", i},
              {"parent", nd.parent},
              {"generation", nd.generation},
              {"center", json_point<Dim>(nd.center)},
              {"radius", nd.radius},
              {"status", to_string(nd.status)},
              {"drop", to_string(nd.drop)},
              {"nmax", json_number(nd.nmax)},
              {"candidates", nd.n_candidates},
              {"E", nd.n_E},
              {"large_drops", nd.large_drops},
              {"children", nd.children}};
    if (!nd.flag_reason.empty()) o["flag"] = nd.flag_reason;
    j["nodes"].push_back(std::move(o));
  }
  j["generations"] = json::array();
  for (const auto& g : rep.generations)
    j["generations"].push_back({{"k", g.generation},
                                {"radius", g.radius},
                                {"count", g.count},
                                {"nonterminal", g.nonterminal},
                                {"terminal", g.terminal},
                                {"flagged", g.flagged}});
  j["terminals"] = rep.terminals;
  j["packing"] = {{"q_n_minus_1", rep.packing_n1}, {"q_n_minus_2_plus_tau", rep.packing_tau}};
  j["minkowski"] = json::array();
  for (const auto& m : rep.minkowski) j["minkowski"].push_back({{"s", m.s}, {"volume", m.volume}, {"packing", m.packing}});
  j["budget"] = {{"nmax_root", json_number(rep.nmax_root)}, {"bound", rep.budget},
                 {"max_large_drops", rep.max_large_drops}, {"ok", rep.budget_ok},
                 {"drop_violations", rep.drop_violations}};
  j["truncated"] = rep.truncated;
  j["flagged"] = rep.flagged;
  return j;
}

template <int Dim>
void write_dot(std::ostream& os, const CoveringReport<Dim>& rep) {
  os << "digraph covering {\n  node [shape=box, fontsize=9];\n";
  for (std::size_t i = 0; i < rep.nodes.size(); ++i) {
    const auto& nd = rep.nodes[i];
    os << "  n" << i << " [label=\"k=" << nd.generation << " r=" << fmt17(nd.radius) << "\\n" << to_string(nd.status)
       << " Nmax=" << fmt17(nd.nmax) << "\"";
    if (nd.status == NodeStatus::Terminal) os << ", style=filled, fillcolor=lightgrey";
    if (nd.status == NodeStatus::Flagged) os << ", color=red";
    os << "];\n";
  }
  for (std::size_t i = 0; i < rep.nodes.size(); ++i)
    for (int c : rep.nodes[i].children)
      os << "  n" << i << " -> n" << c << " [label=\"" << to_string(rep.nodes[c].drop) << "\"];\n";
  os << "}\n";
}

}  // namespace fbscope
