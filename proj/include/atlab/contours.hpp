#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "atlab/lattice.hpp"

namespace atlab {

// Edge of Z^d between `a` and `a + e_axis` (a is the smaller endpoint).
struct LatticeEdge {
  Coord a{};
  int axis = 0;
  friend bool operator<(const LatticeEdge& l, const LatticeEdge& r) {
    return std::tie(l.a, l.axis) < std::tie(r.a, r.axis);
  }
  friend bool operator==(const LatticeEdge& l, const LatticeEdge& r) { return l.a == r.a && l.axis == r.axis; }
};

using EdgeSet = std::vector<LatticeEdge>;  // kept sorted

namespace detail {

struct CellBox {
  Coord lo{}, hi{};
  int dim;
  bool contains(const Coord& c) const {
    for (int i = 0; i < dim; ++i)
      if (c[i] < lo[i] || c[i] > hi[i]) return false;
    return true;
  }
};

}  // namespace detail

// E(C): edges of Z^d crossing the outer boundary component of the hypercube
// union of a finite connected cell set C. An edge {x, x+e_a} with exactly one
// endpoint in C crosses the outer component precisely when the outside
// endpoint lies in the unbounded complement component (cavities excluded).
inline EdgeSet contour_edges(int d, const std::vector<Coord>& cells) {
  if (cells.empty()) throw std::invalid_argument("contour_edges: C must be nonempty");
  std::set<Coord> in_c(cells.begin(), cells.end());

  // Connectivity of C.
  {
    std::vector<Coord> stack{cells[0]};
    std::set<Coord> seen{cells[0]};
    while (!stack.empty()) {
      Coord v = stack.back();
      stack.pop_back();
      for (int a = 0; a < d; ++a) {
        for (int s : {-1, 1}) {
          Coord nb = v;
          nb[a] += s;
          if (in_c.count(nb) && !seen.count(nb)) {
            seen.insert(nb);
            stack.push_back(nb);
          }
        }
      }
    }
    if (seen.size() != in_c.size()) throw std::invalid_argument("contour_edges: C must be connected");
  }

  detail::CellBox box;
  box.dim = d;
  box.lo = box.hi = cells[0];
  for (const auto& c : cells) {
    for (int i = 0; i < d; ++i) {
      box.lo[i] = std::min(box.lo[i], c[i] - 2);
      box.hi[i] = std::max(box.hi[i], c[i] + 2);
    }
  }
  // Flood fill the unbounded complement component from a corner of the margin box.
  std::set<Coord> outer;
  std::vector<Coord> stack{box.lo};
  outer.insert(box.lo);
  while (!stack.empty()) {
    Coord v = stack.back();
    stack.pop_back();
    for (int a = 0; a < d; ++a) {
      for (int s : {-1, 1}) {
        Coord nb = v;
        nb[a] += s;
        if (!box.contains(nb) || in_c.count(nb) || outer.count(nb)) continue;
        outer.insert(nb);
        stack.push_back(nb);
      }
    }
  }

  EdgeSet f;
  for (const auto& c : cells) {
    for (int a = 0; a < d; ++a) {
      for (int s : {-1, 1}) {
        Coord nb = c;
        nb[a] += s;
        if (in_c.count(nb) || !outer.count(nb)) continue;
        LatticeEdge e;
        e.axis = a;
        e.a = s > 0 ? c : nb;
        f.push_back(e);
      }
    }
  }
  std::sort(f.begin(), f.end());
  return f;
}

namespace detail {

// Largest |C| compatible with |E(C)| = k (discrete isoperimetry: the boundary
// edge count is at least 2d |C|^{(d-1)/d}).
inline int max_cells_for_contour(int d, int k) {
  double m = std::pow(static_cast<double>(k) / (2.0 * d), static_cast<double>(d) / (d - 1.0));
  return std::max(1, static_cast<int>(m + 1e-9));
}

// Enumerate connected cell sets containing `root` with |C| <= max_cells inside
// `universe`, each set exactly once (Redelmeier-style fixed-root growth: at
// each level, candidates are either included and recursed into, or excluded
// for the rest of that subtree; `seen` guards against rediscovery). Cells in
// `banned` are never used, which lets callers enumerate each set once with
// its lexicographically minimal cell as the root.
template <typename Fn>
void enumerate_connected_sets(int d, const Coord& root, const CellBox& universe, int max_cells, Fn&& report,
                              const std::set<Coord>* banned = nullptr) {
  std::vector<Coord> current{root};
  std::set<Coord> seen = banned ? *banned : std::set<Coord>{};
  seen.insert(root);
  std::function<void(std::vector<Coord>)> rec = [&](std::vector<Coord> cand) {
    report(current);
    if (static_cast<int>(current.size()) >= max_cells) return;
    while (!cand.empty()) {
      Coord v = cand.front();
      cand.erase(cand.begin());
      std::vector<Coord> added;
      for (int a = 0; a < d; ++a) {
        for (int s : {-1, 1}) {
          Coord nb = v;
          nb[a] += s;
          if (!universe.contains(nb) || seen.count(nb)) continue;
          seen.insert(nb);
          added.push_back(nb);
        }
      }
      std::vector<Coord> next = cand;
      next.insert(next.end(), added.begin(), added.end());
      current.push_back(v);
      rec(std::move(next));
      current.pop_back();
      for (const auto& nb : added) seen.erase(nb);
      // v stays in `seen`: later siblings must not re-add it, which encodes
      // the "exclude v" branch.
    }
  };
  std::vector<Coord> seed;
  for (int a = 0; a < d; ++a) {
    for (int s : {-1, 1}) {
      Coord nb = root;
      nb[a] += s;
      if (universe.contains(nb)) {
        seen.insert(nb);
        seed.push_back(nb);
      }
    }
  }
  rec(std::move(seed));
  for (const auto& nb : seed) seen.erase(nb);
}

}  // namespace detail

// All blocking edge sets F with |F| = k that block vertex x (there is a
// connected C ∋ x with E(C) = F), deduplicated.
inline std::vector<EdgeSet> enumerate_blocking(const Coord& x, int k, int d, int k_cap = 0) {
  if (k_cap == 0) k_cap = d == 2 ? 12 : 2 * d + 4;
  if (k > k_cap) throw CapExceeded("enumerate_blocking: k exceeds cap " + std::to_string(k_cap));
  int max_cells = detail::max_cells_for_contour(d, k);
  detail::CellBox universe;
  universe.dim = d;
  for (int i = 0; i < d; ++i) {
    universe.lo[i] = x[i] - (max_cells - 1) - 1;
    universe.hi[i] = x[i] + (max_cells - 1) + 1;
  }
  std::set<EdgeSet> found;
  detail::enumerate_connected_sets(d, x, universe, max_cells, [&](const std::vector<Coord>& c) {
    EdgeSet f = contour_edges(d, c);
    if (static_cast<int>(f.size()) == k) found.insert(std::move(f));
  });
  return {found.begin(), found.end()};
}

// Exact count of blocking F ⊆ Ē_{B_n} with |F| = k (witnesses range over
// connected C ⊆ B_n), plus the crude counting bound log |E| + 6(d-1)k log 6(d-1).
struct BlockingCount {
  long long exact = 0;
  double log_bound = 0;  // natural log of |E| (6(d-1))^{6(d-1)k}
  bool within_bound() const { return exact == 0 || std::log(static_cast<double>(exact)) <= log_bound; }
};

inline double log_blocking_bound(int num_edges, int d, int k) {
  return std::log(static_cast<double>(num_edges)) + 6.0 * (d - 1) * k * std::log(6.0 * (d - 1));
}

// Exact blocking counts for every size k <= k_max in one sweep: connected
// witnesses C ⊆ B_n are enumerated once each (lexicographically minimal cell
// as root), their edge sets deduplicated and bucketed by size.
inline std::map<int, long long> count_blocking_in_box_upto(const Region& box, int k_max) {
  if (box.radius < 0) throw std::invalid_argument("count_blocking_in_box: needs a box region");
  const int d = box.dim;
  int max_cells = detail::max_cells_for_contour(d, k_max);
  detail::CellBox lambda_box;
  lambda_box.dim = d;
  for (int i = 0; i < d; ++i) {
    lambda_box.lo[i] = box.center[i] - box.radius;
    lambda_box.hi[i] = box.center[i] + box.radius;
  }
  Coord c{};
  std::vector<Coord> cells;
  std::function<void(int)> gen = [&](int axis) {
    if (axis == d) {
      cells.push_back(c);
      return;
    }
    for (int v = lambda_box.lo[axis]; v <= lambda_box.hi[axis]; ++v) {
      c[axis] = v;
      gen(axis + 1);
    }
  };
  gen(0);
  std::sort(cells.begin(), cells.end());
  std::set<EdgeSet> found;
  std::set<Coord> banned;
  for (const auto& root : cells) {
    detail::enumerate_connected_sets(
        d, root, lambda_box, max_cells,
        [&](const std::vector<Coord>& cc) {
          EdgeSet f = contour_edges(d, cc);
          if (static_cast<int>(f.size()) <= k_max) found.insert(std::move(f));
        },
        &banned);
    banned.insert(root);
  }
  std::map<int, long long> by_size;
  for (int k = 1; k <= k_max; ++k) by_size[k] = 0;
  for (const auto& f : found) by_size[static_cast<int>(f.size())] += 1;
  return by_size;
}

inline BlockingCount count_blocking_in_box(const Region& box, int k) {
  BlockingCount out;
  out.exact = count_blocking_in_box_upto(box, k).at(k);
  out.log_bound = log_blocking_bound(box.num_edges(), box.dim, k);
  return out;
}

// Plaquette adjacency: two edges are neighbors when their plaquettes share a
// (d-2)-dimensional hypercube; the resulting graph has max degree 6(d-1).
inline int max_plaquette_degree(const Region& r) {
  const int d = r.dim;
  // Subface key: doubled center coordinates plus the pair of directions not
  // spanned by the subface.
  std::map<std::pair<Coord, int>, std::vector<int>> by_subface;
  for (int e = 0; e < r.num_edges(); ++e) {
    const auto& ed = r.edge(e);
    Coord m2{};  // doubled plaquette center
    for (int i = 0; i < d; ++i) m2[i] = 2 * r.vertex(ed.u)[i];
    m2[ed.axis] += 1;
    for (int j = 0; j < d; ++j) {
      if (j == ed.axis) continue;
      for (int s : {-1, 1}) {
        Coord sub = m2;
        sub[j] += s;
        int excluded = (1 << ed.axis) | (1 << j);
        by_subface[{sub, excluded}].push_back(e);
      }
    }
  }
  std::vector<std::set<int>> adj(r.num_edges());
  for (auto& [key, list] : by_subface) {
    for (size_t i = 0; i < list.size(); ++i)
      for (size_t j = 0; j < list.size(); ++j)
        if (i != j) adj[list[i]].insert(list[j]);
  }
  int deg = 0;
  for (auto& s : adj) deg = std::max(deg, static_cast<int>(s.size()));
  return deg;
}

}  // namespace atlab
