#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "atlab/util.hpp"

namespace atlab {

constexpr int kMaxDim = 5;

using Coord = std::array<int, kMaxDim>;  // unused trailing axes are 0

inline uint64_t coord_key(const Coord& c, int dim) {
  uint64_t k = 0;
  for (int i = 0; i < dim; ++i) k = (k << 12) | static_cast<uint64_t>(c[i] + 2048);
  return k;
}

inline int coord_parity(const Coord& c, int dim) {
  int s = 0;
  for (int i = 0; i < dim; ++i) s += c[i];
  return ((s % 2) + 2) % 2;  // 0 = even, 1 = odd
}

// Percolation configuration on the canonical edge set of a region, plus the
// constant fill value off that edge set. `dual` marks configurations living on
// the dual edge set (indexed through the e <-> e* bijection).
struct EdgeConfig {
  std::vector<uint64_t> words;
  int num_edges = 0;
  int fill = 0;
  bool dual = false;

  static EdgeConfig make(int ne, int fill_value, bool on_dual = false) {
    EdgeConfig c;
    c.num_edges = ne;
    c.fill = fill_value;
    c.dual = on_dual;
    c.words.assign((ne + 63) / 64, 0);
    return c;
  }
  static EdgeConfig from_mask(uint64_t mask, int ne, int fill_value) {
    EdgeConfig c = make(ne, fill_value);
    if (ne > 0) c.words[0] = mask;
    return c;
  }
  bool get(int i) const { return (words[i >> 6] >> (i & 63)) & 1; }
  void set(int i, bool v) {
    uint64_t b = 1ull << (i & 63);
    if (v)
      words[i >> 6] |= b;
    else
      words[i >> 6] &= ~b;
  }
  int open_count() const {
    int n = 0;
    for (uint64_t w : words) n += popcount64(w);
    return n;
  }
  uint64_t low64() const { return words.empty() ? 0 : words[0]; }
};

// Finite region Λ of Z^d with its padded closure Λ̄, the edge set Ē_Λ (edges
// meeting Λ) in a canonical order, parity, and precomputed adjacency. All
// tables are immutable after construction.
class Region {
 public:
  struct Edge {
    int u, v;  // indices into vertex tables; u is the lexicographically smaller endpoint
    int axis;
  };

  int dim = 2;
  int radius = -1;  // >= 0 iff built as a box B_n
  Coord center{};

  static Region box(int d, int n, Coord center = {}) {
    if (d < 2 || d > kMaxDim) throw std::invalid_argument("region: need 2 <= d <= " + std::to_string(kMaxDim));
    if (n < 0) throw std::invalid_argument("region: box radius must be >= 0");
    std::vector<Coord> cells;
    Coord c{};
    build_box_rec(d, n, center, 0, c, cells);
    Region r = from_vertices(d, cells);
    r.radius = n;
    r.center = center;
    return r;
  }

  // Explicit vertex list; callers wanting the d=2 dual must pass a domain
  // (checked by DualGeometry).
  static Region from_vertices(int d, std::vector<Coord> lambda) {
    if (d < 2 || d > kMaxDim) throw std::invalid_argument("region: need 2 <= d <= " + std::to_string(kMaxDim));
    if (lambda.empty()) throw std::invalid_argument("region: empty vertex list");
    Region r;
    r.dim = d;
    std::sort(lambda.begin(), lambda.end());
    lambda.erase(std::unique(lambda.begin(), lambda.end()), lambda.end());

    std::unordered_map<uint64_t, int> in_set;
    for (auto& c : lambda) in_set.emplace(coord_key(c, d), 1);

    // Λ̄ = Λ plus all neighbors, lexicographic order.
    std::vector<Coord> closure = lambda;
    for (auto& c : lambda) {
      for (int a = 0; a < d; ++a) {
        for (int s : {-1, +1}) {
          Coord nb = c;
          nb[a] += s;
          if (!in_set.count(coord_key(nb, d))) closure.push_back(nb);
        }
      }
    }
    std::sort(closure.begin(), closure.end());
    closure.erase(std::unique(closure.begin(), closure.end()), closure.end());

    r.coords_ = closure;
    r.index_.reserve(closure.size() * 2);
    for (int i = 0; i < static_cast<int>(closure.size()); ++i) r.index_.emplace(coord_key(closure[i], d), i);
    r.in_lambda_.resize(closure.size());
    r.parity_.resize(closure.size());
    r.n_lambda_ = 0;
    for (int i = 0; i < static_cast<int>(closure.size()); ++i) {
      r.in_lambda_[i] = in_set.count(coord_key(closure[i], d)) ? 1 : 0;
      r.n_lambda_ += r.in_lambda_[i];
      r.parity_[i] = static_cast<uint8_t>(coord_parity(closure[i], d));
    }

    // Canonical edge order: lexicographic on (smaller endpoint, axis).
    for (int i = 0; i < static_cast<int>(closure.size()); ++i) {
      for (int a = 0; a < d; ++a) {
        Coord nb = closure[i];
        nb[a] += 1;
        int j = r.vertex_index(nb);
        if (j < 0) continue;
        if (r.in_lambda_[i] || r.in_lambda_[j]) r.edges_.push_back({i, j, a});
      }
    }
    // Closure order is lexicographic, so (i sorted, axis) is already canonical.

    r.incident_.assign(closure.size(), {});
    for (int e = 0; e < static_cast<int>(r.edges_.size()); ++e) {
      r.incident_[r.edges_[e].u].push_back({e, r.edges_[e].v});
      r.incident_[r.edges_[e].v].push_back({e, r.edges_[e].u});
    }

    // Fill structure off Ē_Λ: adjacent pairs inside Λ̄∖Λ, and closure-boundary
    // vertices with a neighbor outside Λ̄ (those join the outer sea when the
    // fill is 1).
    r.outer_contact_.assign(closure.size(), 0);
    for (int i = 0; i < static_cast<int>(closure.size()); ++i) {
      if (r.in_lambda_[i]) continue;
      for (int a = 0; a < d; ++a) {
        for (int s : {-1, +1}) {
          Coord nb = closure[i];
          nb[a] += s;
          int j = r.vertex_index(nb);
          if (j < 0) {
            r.outer_contact_[i] = 1;
          } else if (!r.in_lambda_[j] && s > 0) {
            r.fill_edges_.push_back({i, j});
          }
        }
      }
    }
    return r;
  }

  int num_vertices() const { return static_cast<int>(coords_.size()); }  // |Λ̄|
  int num_edges() const { return static_cast<int>(edges_.size()); }      // |Ē_Λ|
  int lambda_size() const { return n_lambda_; }                          // |Λ|
  const std::vector<Coord>& vertices() const { return coords_; }
  const Coord& vertex(int i) const { return coords_[i]; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_[e]; }
  bool in_lambda(int i) const { return in_lambda_[i] != 0; }
  int parity(int i) const { return parity_[i]; }  // 0 even, 1 odd
  const std::vector<std::pair<int, int>>& incident(int v) const { return incident_[v]; }

  int vertex_index(const Coord& c) const {
    auto it = index_.find(coord_key(c, dim));
    return it == index_.end() ? -1 : it->second;
  }

  // Max-norm distance from the box center; only meaningful for boxes.
  int max_norm(int i) const {
    int m = 0;
    for (int a = 0; a < dim; ++a) m = std::max(m, std::abs(coords_[i][a] - center[a]));
    return m;
  }

  // k_Λ(ω): clusters of ω meeting Λ̄, with ω = fill off Ē_Λ. With fill 1 every
  // vertex of Z^d∖Λ̄ lies in one outer sea cluster (true for boxes and for
  // d=2 domains, whose bounded complement components are single vertices of Λ̄).
  int cluster_count(const EdgeConfig& omega) const { return cluster_count(omega.words.data(), omega.fill); }
  int cluster_count(uint64_t mask, int fill) const {
    if (num_edges() > 64) throw std::invalid_argument("cluster_count: mask form needs |E| <= 64");
    return cluster_count(&mask, fill);
  }
  int cluster_count(const uint64_t* words, int fill) const {
    const int n = num_vertices();
    scratch_parent_.resize(n + 1);
    for (int i = 0; i <= n; ++i) scratch_parent_[i] = i;
    const int outer = n;
    for (int e = 0; e < num_edges(); ++e) {
      if ((words[e >> 6] >> (e & 63)) & 1) uf_union(edges_[e].u, edges_[e].v);
    }
    if (fill == 1) {
      for (auto& [a, b] : fill_edges_) uf_union(a, b);
      for (int i = 0; i < n; ++i)
        if (outer_contact_[i]) uf_union(i, outer);
    }
    int count = 0;
    scratch_seen_.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) {
      int r = uf_find(i);
      if (!scratch_seen_[r]) {
        scratch_seen_[r] = 1;
        ++count;
      }
    }
    return count;
  }

  // Root structure of (Λ̄ ∪ {outer}, open ∪ fill) for connectivity queries;
  // entry num_vertices() is the outer node. Only meaningful with fill 1 for
  // the outer node.
  std::vector<int> component_roots(const EdgeConfig& omega) const {
    const int n = num_vertices();
    scratch_parent_.resize(n + 1);
    for (int i = 0; i <= n; ++i) scratch_parent_[i] = i;
    for (int e = 0; e < num_edges(); ++e) {
      if (omega.get(e)) uf_union(edges_[e].u, edges_[e].v);
    }
    if (omega.fill == 1) {
      for (auto& [a, b] : fill_edges_) uf_union(a, b);
      for (int i = 0; i < n; ++i)
        if (outer_contact_[i]) uf_union(i, n);
    }
    std::vector<int> roots(n + 1);
    for (int i = 0; i <= n; ++i) roots[i] = uf_find(i);
    return roots;
  }

 private:
  static void build_box_rec(int d, int n, const Coord& center, int axis, Coord& c, std::vector<Coord>& out) {
    if (axis == d) {
      out.push_back(c);
      return;
    }
    for (int x = -n; x <= n; ++x) {
      c[axis] = center[axis] + x;
      build_box_rec(d, n, center, axis + 1, c, out);
    }
  }

  int uf_find(int x) const {
    while (scratch_parent_[x] != x) {
      scratch_parent_[x] = scratch_parent_[scratch_parent_[x]];
      x = scratch_parent_[x];
    }
    return x;
  }
  void uf_union(int a, int b) const {
    a = uf_find(a);
    b = uf_find(b);
    if (a != b) scratch_parent_[a] = b;
  }

  std::vector<Coord> coords_;
  std::unordered_map<uint64_t, int> index_;
  std::vector<uint8_t> in_lambda_, parity_, outer_contact_;
  std::vector<Edge> edges_;
  std::vector<std::pair<int, int>> fill_edges_;
  std::vector<std::vector<std::pair<int, int>>> incident_;
  int n_lambda_ = 0;
  mutable std::vector<int> scratch_parent_;
  mutable std::vector<uint8_t> scratch_seen_;
};

// Named regions used throughout the tests and the CLI.
inline Region region_single_site() { return Region::from_vertices(2, {Coord{0, 0}}); }
inline Region region_domino() { return Region::from_vertices(2, {Coord{0, 0}, Coord{1, 0}}); }
inline Region region_block2x2() {
  return Region::from_vertices(2, {Coord{0, 0}, Coord{1, 0}, Coord{0, 1}, Coord{1, 1}});
}

// Dual lattice data for a d=2 domain: Λ*, the e <-> e* bijection (quads), and
// dual cluster counting against the outer sea.
class DualGeometry {
 public:
  // Dual vertices are face centers (i+1/2, j+1/2), stored by their lower-left
  // primal corner (i, j).
  struct QuadEnds {
    std::array<int, 2> all;   // indices into dual_all()
    std::array<int, 2> star;  // indices into Λ*, or -1
  };

  static DualGeometry build(const Region& region) {
    if (region.dim != 2) throw std::invalid_argument("dual geometry: defined for d = 2 only");
    DualGeometry g;
    g.region_ = &region;

    // Unit faces of (Λ̄, Ē_Λ): all four surrounding edges present.
    auto edge_index = [&](const Coord& a, int axis) -> int {
      int u = region.vertex_index(a);
      if (u < 0) return -1;
      Coord b = a;
      b[axis] += 1;
      int v = region.vertex_index(b);
      if (v < 0) return -1;
      for (auto& [e, w] : region.incident(u))
        if (w == v) return e;
      return -1;
    };
    std::vector<std::array<int, 2>> star;
    for (int i = 0; i < region.num_vertices(); ++i) {
      Coord c = region.vertex(i);
      Coord right = c, up = c, diag = c;
      right[0] += 1;
      up[1] += 1;
      diag[0] += 1;
      diag[1] += 1;
      if (edge_index(c, 0) >= 0 && edge_index(c, 1) >= 0 && edge_index(up, 0) >= 0 && edge_index(right, 1) >= 0)
        star.push_back({c[0], c[1]});
    }
    std::sort(star.begin(), star.end());
    g.star_ = star;
    for (int i = 0; i < static_cast<int>(star.size()); ++i)
      g.star_index_.emplace(pack(star[i][0], star[i][1]), i);

    // Domain <=> every bounded face is a unit square: E - V + C == #unit faces.
    EdgeConfig all_open = EdgeConfig::make(region.num_edges(), 0);
    for (int e = 0; e < region.num_edges(); ++e) all_open.set(e, true);
    int components = region.cluster_count(all_open);
    g.is_domain_ = (region.num_edges() - region.num_vertices() + components) == static_cast<int>(star.size());

    // Quads: per primal edge, the two dual endpoints of e*.
    auto intern_all = [&](int x, int y) -> int {
      auto it = g.all_index_.find(pack(x, y));
      if (it != g.all_index_.end()) return it->second;
      int id = static_cast<int>(g.all_.size());
      g.all_.push_back({x, y});
      g.all_index_.emplace(pack(x, y), id);
      return id;
    };
    for (int e = 0; e < region.num_edges(); ++e) {
      const auto& ed = region.edge(e);
      Coord u = region.vertex(ed.u);
      QuadEnds q{};
      std::array<std::array<int, 2>, 2> duals;
      if (ed.axis == 0) {
        duals = {{{u[0], u[1] - 1}, {u[0], u[1]}}};
      } else {
        duals = {{{u[0] - 1, u[1]}, {u[0], u[1]}}};
      }
      for (int k = 0; k < 2; ++k) {
        q.all[k] = intern_all(duals[k][0], duals[k][1]);
        auto it = g.star_index_.find(pack(duals[k][0], duals[k][1]));
        q.star[k] = it == g.star_index_.end() ? -1 : it->second;
      }
      g.quads_.push_back(q);
    }
    return g;
  }

  const Region& region() const { return *region_; }
  bool is_domain() const { return is_domain_; }
  int star_size() const { return static_cast<int>(star_.size()); }  // |Λ*|
  const std::vector<std::array<int, 2>>& star() const { return star_; }
  const std::vector<std::array<int, 2>>& dual_all() const { return all_; }
  const QuadEnds& quad(int e) const { return quads_[e]; }
  int all_index_of_star(int si) const { return all_index_.at(pack(star_[si][0], star_[si][1])); }

  // ω* on the dual edge set, indexed through the quads; fill flips.
  EdgeConfig dual_config(const EdgeConfig& omega) const {
    EdgeConfig d = EdgeConfig::make(omega.num_edges, 1 - omega.fill, !omega.dual);
    for (int e = 0; e < omega.num_edges; ++e) d.set(e, !omega.get(e));
    return d;
  }

  // k_{Λ*}(ω*) for primal ω ∈ Ω_E^0. Every dual vertex outside Λ* belongs to
  // the open outer sea (its face has a missing edge, crossed by an open fill
  // dual edge), so the sea contributes exactly one cluster; internal clusters
  // live on Λ*.
  int dual_cluster_count(const EdgeConfig& omega) const {
    if (omega.fill != 0) throw std::invalid_argument("dual_cluster_count: stated for primal fill 0");
    const int n = star_size();
    parent_.resize(n + 1);
    for (int i = 0; i <= n; ++i) parent_[i] = i;
    const int outer = n;
    for (int e = 0; e < region_->num_edges(); ++e) {
      if (omega.get(e)) continue;  // dual edge open iff primal closed
      int a = quads_[e].star[0], b = quads_[e].star[1];
      if (a >= 0 && b >= 0)
        uf_union(a, b);
      else if (a >= 0)
        uf_union(a, outer);
      else if (b >= 0)
        uf_union(b, outer);
    }
    int count = 0;
    seen_.assign(n + 1, 0);
    for (int i = 0; i <= n; ++i) {  // outer sea always counts
      int r = uf_find(i);
      if (!seen_[r]) {
        seen_[r] = 1;
        ++count;
      }
    }
    return count;
  }

  int dual_cluster_count_mask(uint64_t omega_mask) const {
    EdgeConfig c = EdgeConfig::from_mask(omega_mask, region_->num_edges(), 0);
    return dual_cluster_count(c);
  }

  // Roots of (Λ* ∪ {outer}) under ω*; entry star_size() is the outer sea.
  std::vector<int> dual_component_roots(const EdgeConfig& omega) const {
    dual_cluster_count(omega);
    std::vector<int> roots(star_size() + 1);
    for (int i = 0; i <= star_size(); ++i) roots[i] = uf_find(i);
    return roots;
  }

 private:
  static uint64_t pack(int x, int y) {
    return (static_cast<uint64_t>(static_cast<uint32_t>(x + 4096)) << 20) | static_cast<uint32_t>(y + 4096);
  }
  int uf_find(int x) const {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void uf_union(int a, int b) const {
    a = uf_find(a);
    b = uf_find(b);
    if (a != b) parent_[a] = b;
  }

  const Region* region_ = nullptr;
  std::vector<std::array<int, 2>> star_, all_;
  std::unordered_map<uint64_t, int> star_index_, all_index_;
  std::vector<QuadEnds> quads_;
  bool is_domain_ = false;
  mutable std::vector<int> parent_;
  mutable std::vector<uint8_t> seen_;
};

// Euler identity k_Λ(ω) = |Λ̄| − |ω_E| + k_{Λ*}(ω*) − 1 on domains, for fill 0.
inline bool euler_identity_check(const DualGeometry& geom, const EdgeConfig& omega) {
  if (omega.fill != 0) throw std::invalid_argument("euler_identity_check: stated on Ω_E^0 (fill 0)");
  if (!geom.is_domain()) throw std::invalid_argument("euler_identity_check: region is not a domain");
  const Region& r = geom.region();
  int lhs = r.cluster_count(omega);
  int rhs = r.num_vertices() - omega.open_count() + geom.dual_cluster_count(omega) - 1;
  return lhs == rhs;
}

}  // namespace atlab
