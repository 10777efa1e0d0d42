#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "atlab/spins.hpp"
#include "atlab/weights.hpp"

namespace atlab {

// Per-edge factor over two-layer endpoint states. Index: prev*4 + next, where
// a cell state b encodes (s bit) | (s' bit) << 1 and bit 1 means spin +1.
using EdgeFactorTable = std::array<double, 16>;

inline EdgeFactorTable at_edge_factor(const Couplings& c) {
  EdgeFactorTable t{};
  for (int bu = 0; bu < 4; ++bu) {
    for (int bv = 0; bv < 4; ++bv) {
      int a = (bu & 1) == (bv & 1) ? +1 : -1;
      int b = (bu >> 1) == (bv >> 1) ? +1 : -1;
      t[bu * 4 + bv] = std::exp(c.K * a + c.Kp * b + c.Kpp * a * b);
    }
  }
  return t;
}

// Multiplies the AT factor by h(edge class), where the class is the
// conditional sampling class of the edge given the two layers:
// disagreement in s -> closed; disagreement in s' only -> density p1; else p2.
inline EdgeFactorTable classed_edge_factor(const Couplings& c, double on_es, double on_es2, double on_rest) {
  EdgeFactorTable t = at_edge_factor(c);
  for (int bu = 0; bu < 4; ++bu) {
    for (int bv = 0; bv < 4; ++bv) {
      bool ds = (bu & 1) != (bv & 1);
      bool ds2 = (bu >> 1) != (bv >> 1);
      t[bu * 4 + bv] *= ds ? on_es : (ds2 ? on_es2 : on_rest);
    }
  }
  return t;
}

// Exact log partition function of a two-layer ±1 system on a d=2 region with
// arbitrary per-edge factors, by a sliding-window DP over the bounding
// rectangle in column-major order (window = one column, 4^H states).
// `edge_factor(e)` returns the 16-entry table for canonical edge index e.
template <typename EdgeFactorFn>
double two_layer_log_partition(const Region& r, const BoundaryCondition& bc1, const BoundaryCondition& bc2,
                               EdgeFactorFn&& edge_factor) {
  if (r.dim != 2) throw std::invalid_argument("transfer DP: d = 2 only");
  int lo0 = 1 << 30, hi0 = -(1 << 30), lo1 = 1 << 30, hi1 = -(1 << 30);
  for (int i = 0; i < r.num_vertices(); ++i) {
    lo0 = std::min(lo0, r.vertex(i)[0]);
    hi0 = std::max(hi0, r.vertex(i)[0]);
    lo1 = std::min(lo1, r.vertex(i)[1]);
    hi1 = std::max(hi1, r.vertex(i)[1]);
  }
  const int W = hi0 - lo0 + 1, H = hi1 - lo1 + 1;
  if (H > 11) throw CapExceeded("transfer DP: column height > 11");
  const int nsites = W * H;

  struct Cell {
    std::array<int, 4> allowed{};  // allowed two-layer states
    int n_allowed = 1;             // absent cells carry the single dummy state 0
    int vert_table = -1;           // factor table to (x, y-1), -1 if none
    int horiz_table = -1;          // factor table to (x-1, y)
  };
  std::vector<Cell> cells(nsites);
  std::vector<EdgeFactorTable> tables(r.num_edges());
  for (int e = 0; e < r.num_edges(); ++e) tables[e] = edge_factor(e);

  auto edge_between = [&](int u, int v) -> int {
    for (auto& [e, w] : r.incident(u))
      if (w == v) return e;
    return -1;
  };

  for (int x = lo0; x <= hi0; ++x) {
    for (int y = lo1; y <= hi1; ++y) {
      int t = (x - lo0) * H + (y - lo1);
      Coord c{};
      c[0] = x;
      c[1] = y;
      int vi = r.vertex_index(c);
      Cell& cell = cells[t];
      if (vi < 0) continue;
      int f1 = bc1.forced(r, vi), f2 = bc2.forced(r, vi);
      cell.n_allowed = 0;
      for (int b = 0; b < 4; ++b) {
        int s1 = (b & 1) ? +1 : -1, s2 = (b >> 1) ? +1 : -1;
        if ((f1 == 0 || s1 == f1) && (f2 == 0 || s2 == f2)) cell.allowed[cell.n_allowed++] = b;
      }
      Coord down = c, left = c;
      down[1] -= 1;
      left[0] -= 1;
      if (int vd = r.vertex_index(down); vd >= 0) cell.vert_table = edge_between(vd, vi);
      if (int vl = r.vertex_index(left); vl >= 0) cell.horiz_table = edge_between(vl, vi);
    }
  }

  const size_t nstates = 1ull << (2 * H);
  const size_t mask = nstates - 1;
  std::vector<double> dp(nstates, 0.0), ndp(nstates, 0.0);
  dp[0] = 1.0;
  double log_acc = 0.0;
  const int old_shift = 2 * (H - 1);
  for (int t = 0; t < nsites; ++t) {
    const Cell& cell = cells[t];
    std::fill(ndp.begin(), ndp.end(), 0.0);
    const double* vert = (cell.vert_table >= 0 && (t % H) != 0) ? tables[cell.vert_table].data() : nullptr;
    const double* horiz = (cell.horiz_table >= 0 && t >= H) ? tables[cell.horiz_table].data() : nullptr;
    for (size_t st = 0; st < nstates; ++st) {
      double w0 = dp[st];
      if (w0 == 0.0) continue;
      int prev_v = static_cast<int>(st & 3);
      int prev_h = static_cast<int>((st >> old_shift) & 3);
      for (int i = 0; i < cell.n_allowed; ++i) {
        int b = cell.allowed[i];
        double w = w0;
        if (vert) w *= vert[prev_v * 4 + b];
        if (horiz) w *= horiz[prev_h * 4 + b];
        ndp[((st << 2) | static_cast<size_t>(b)) & mask] += w;
      }
    }
    dp.swap(ndp);
    double mx = 0.0;
    for (double v : dp) mx = std::max(mx, v);
    if (mx <= 0.0) throw std::runtime_error("transfer DP: all states died (inconsistent constraints)");
    if (mx < 1e-140 || mx > 1e140) {
      for (double& v : dp) v /= mx;
      log_acc += std::log(mx);
    }
  }
  KahanSum z;
  for (double v : dp) z.add(v);
  return std::log(z.value()) + log_acc;
}

// P[every edge in `edges` is closed] under the graphical representation on a
// box, through the conditional classes: closed surely on E_s, density p1 on
// E_{s'}∖E_s, p2 elsewhere. Exact, via two DP partition functions.
inline double gat_edges_all_closed_probability(const Region& r, const Couplings& c, const BoundaryCondition& bc1,
                                               const BoundaryCondition& bc2, const std::vector<int>& edges) {
  EdgeDensities p = sampling_densities(c);
  EdgeFactorTable plain = at_edge_factor(c);
  EdgeFactorTable closed = classed_edge_factor(c, 1.0, 1.0 - p.p1, 1.0 - p.p2);
  double log_z = two_layer_log_partition(r, bc1, bc2, [&](int) { return plain; });
  double log_zc = two_layer_log_partition(r, bc1, bc2, [&](int e) {
    for (int m : edges)
      if (m == e) return closed;
    return plain;
  });
  return std::exp(log_zc - log_z);
}

// P[ω_e = 1] under the graphical representation on a box (fill-independent
// for edges of Ē_Λ), again via conditional classes.
inline double gat_edge_open_probability(const Region& r, const Couplings& c, const BoundaryCondition& bc1,
                                        const BoundaryCondition& bc2, int e) {
  EdgeDensities p = sampling_densities(c);
  EdgeFactorTable plain = at_edge_factor(c);
  EdgeFactorTable open = classed_edge_factor(c, 0.0, p.p1, p.p2);
  double log_z = two_layer_log_partition(r, bc1, bc2, [&](int) { return plain; });
  double log_zo = two_layer_log_partition(r, bc1, bc2, [&](int ee) { return ee == e ? open : plain; });
  return std::exp(log_zo - log_z);
}

// θ_1(couplings) = GAT^{1,f}_{B_2}[0 ↔ Z^d ∖ B_0]: the origin is connected to
// its complement iff some incident edge is open.
inline double theta1_exact(const Couplings& c) {
  static thread_local Region b2 = Region::box(2, 2);
  Coord origin{};
  int o = b2.vertex_index(origin);
  std::vector<int> edges;
  for (auto& [e, w] : b2.incident(o)) edges.push_back(e);
  return 1.0 - gat_edges_all_closed_probability(b2, c, BoundaryCondition::plus(), BoundaryCondition::free_bc(), edges);
}

}  // namespace atlab
