#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "atlab/heights.hpp"
#include "atlab/lattice.hpp"
#include "atlab/rng.hpp"
#include "atlab/spins.hpp"
#include "atlab/stats.hpp"
#include "atlab/weights.hpp"

namespace atlab {

// Single-site heat-bath chain for the two-layer spin measure. Boundary spins
// are never touched; the trajectory is a pure function of (seed, chain id).
struct ChainState {
  const Region* region = nullptr;
  SpinPair pair;
  Couplings c;
  uint64_t seed = 0;
  uint64_t sweep = 0;
  int chain_id = 0;
  std::vector<int> free1, free2;
  std::vector<double> heat1, heat2;  // conditional P[s_x = +1] by neighbor sums

  static ChainState make(const Region& r, const Couplings& c, const BoundaryCondition& bc1,
                         const BoundaryCondition& bc2, uint64_t seed, int chain_id = 0) {
    ChainState st;
    st.region = &r;
    st.c = c;
    st.seed = seed;
    st.chain_id = chain_id;
    st.pair = SpinPair::make(r, bc1, bc2);
    auto pattern = [&](const BoundaryCondition& bc, int i) {
      switch (bc.kind) {
        case BoundaryCondition::kMinus: return -1;
        case BoundaryCondition::kAlternating: return r.parity(i) == 0 ? +1 : -1;
        default: return +1;
      }
    };
    for (int i = 0; i < r.num_vertices(); ++i) {
      if (bc1.forced(r, i) == 0) {
        st.free1.push_back(i);
        st.pair.s1.set(i, pattern(bc1, i));
      }
      if (bc2.forced(r, i) == 0) {
        st.free2.push_back(i);
        st.pair.s2.set(i, pattern(bc2, i));
      }
    }
    st.build_heat_tables();
    return st;
  }

  void build_heat_tables() {
    int m = 2 * region->dim;  // neighbor sums live in [-m, m]
    int w = 2 * m + 1;
    heat1.assign(w * w, 0.0);
    heat2.assign(w * w, 0.0);
    for (int a = -m; a <= m; ++a) {
      for (int b = -m; b <= m; ++b) {
        heat1[(a + m) * w + (b + m)] = 1.0 / (1.0 + std::exp(-2.0 * (c.K * a + c.Kpp * b)));
        heat2[(a + m) * w + (b + m)] = 1.0 / (1.0 + std::exp(-2.0 * (c.Kp * a + c.Kpp * b)));
      }
    }
  }

  // Conditional P[s_x = +1 | rest] for one layer; neighbor sums over Ē_Λ only.
  double conditional_plus(int layer, int x) const {
    const Region& r = *region;
    int m = 2 * r.dim, w = 2 * m + 1;
    int a = 0, b = 0;
    for (auto& [e, y] : r.incident(x)) {
      (void)e;
      if (layer == 1) {
        a += pair.s1.get(y);
        b += pair.s2.get(x) * pair.s2.get(y) * pair.s1.get(y);
      } else {
        a += pair.s2.get(y);
        b += pair.s1.get(x) * pair.s1.get(y) * pair.s2.get(y);
      }
    }
    return (layer == 1 ? heat1 : heat2)[(a + m) * w + (b + m)];
  }
};

// One systematic sweep of heat-bath updates over both layers.
inline void glauber_sweep(ChainState& st) {
  const uint64_t sw = st.sweep;
  for (int x : st.free1) {
    double p = st.conditional_plus(1, x);
    double u = rng::uniform(st.seed, rng::kSpinUpdate, (static_cast<uint64_t>(st.chain_id) << 32) | 1u, sw,
                            static_cast<uint64_t>(x));
    st.pair.s1.set(x, u < p ? +1 : -1);
  }
  for (int x : st.free2) {
    double p = st.conditional_plus(2, x);
    double u = rng::uniform(st.seed, rng::kSpinUpdate, (static_cast<uint64_t>(st.chain_id) << 32) | 2u, sw,
                            static_cast<uint64_t>(x));
    st.pair.s2.set(x, u < p ? +1 : -1);
  }
  ++st.sweep;
}

// Conditional percolation sample given the current pair: closed on E_s, open
// with density p1 on E_{s'}∖E_s, with density p2 elsewhere; fill = 1{η = +}.
inline EdgeConfig sample_gat(const ChainState& st) {
  const Region& r = *st.region;
  EdgeDensities p = sampling_densities(st.c);
  EdgeConfig om = EdgeConfig::make(r.num_edges(), st.pair.bc1.gat_fill());
  for (int e = 0; e < r.num_edges(); ++e) {
    const auto& ed = r.edge(e);
    bool ds = st.pair.s1.get(ed.u) != st.pair.s1.get(ed.v);
    if (ds) continue;
    bool ds2 = st.pair.s2.get(ed.u) != st.pair.s2.get(ed.v);
    double density = ds2 ? p.p1 : p.p2;
    double u = rng::uniform(st.seed, rng::kEdgeSample, st.chain_id, st.sweep, static_cast<uint64_t>(e));
    if (u < density) om.set(e, true);
  }
  return om;
}

// Like sample_gat but for an externally supplied transformed pair (used for
// the boundary-cluster observable, where the sampling couplings differ from
// the chain's).
inline EdgeConfig sample_gat_for(const Region& r, const Couplings& c, const SpinLayer& s1, const SpinLayer& s2,
                                 int fill, uint64_t seed, int chain_id, uint64_t sweep) {
  EdgeDensities p = sampling_densities(c);
  EdgeConfig om = EdgeConfig::make(r.num_edges(), fill);
  for (int e = 0; e < r.num_edges(); ++e) {
    const auto& ed = r.edge(e);
    if (s1.get(ed.u) != s1.get(ed.v)) continue;
    bool ds2 = s2.get(ed.u) != s2.get(ed.v);
    double u = rng::uniform(seed, rng::kEdgeSample, (static_cast<uint64_t>(chain_id) << 1) | 1u, sweep,
                            static_cast<uint64_t>(e));
    if (u < (ds2 ? p.p1 : p.p2)) om.set(e, true);
  }
  return om;
}

// σ = (σ•, σ∘) and the pinned height function built from one (pair, ω)
// sample. Requires d = 2, free first-layer boundary (fill 0) and K = K''
// (ice rule) for the height stage.
struct SigmaHeightSample {
  SpinLayer sigma_bullet;          // over Λ̄
  std::vector<int8_t> sigma_circ;  // over dual_all(), +1 off Λ*
  std::vector<int> h_primal;       // over Λ̄
  std::vector<int> h_dual;         // over dual_all()
};

inline SigmaHeightSample sample_sigma_and_height(const ChainState& st, const DualGeometry& geom,
                                                 const EdgeConfig& omega) {
  const Region& r = *st.region;
  if (r.dim != 2) throw std::invalid_argument("sigma/height sampling: d = 2 only");
  if (st.c.K != st.c.Kpp) throw std::invalid_argument("height stage: needs K = K'' (ice rule)");
  if (omega.fill != 0) throw std::invalid_argument("height stage: needs free first-layer boundary (fill 0)");

  SigmaHeightSample out;
  out.sigma_bullet = st.pair.s2;

  auto roots = geom.dual_component_roots(omega);
  const int outer_root = roots[geom.star_size()];
  std::vector<int8_t> color_of_root(geom.star_size() + 1, 0);
  for (int i = 0; i <= geom.star_size(); ++i) {
    int rt = roots[i];
    if (color_of_root[rt] != 0) continue;
    if (rt == outer_root) {
      color_of_root[rt] = +1;
    } else {
      double u = rng::uniform(st.seed, rng::kClusterColor, st.chain_id, st.sweep, static_cast<uint64_t>(rt));
      color_of_root[rt] = u < 0.5 ? +1 : -1;
    }
  }
  out.sigma_circ.assign(geom.dual_all().size(), +1);
  for (int e = 0; e < r.num_edges(); ++e) {
    const auto& q = geom.quad(e);
    for (int k = 0; k < 2; ++k)
      if (q.star[k] >= 0) out.sigma_circ[q.all[k]] = color_of_root[roots[q.star[k]]];
  }

  // Ice rule: E_{σ•} and E_{σ∘} disjoint (hard assertion, zero tolerance).
  for (int e = 0; e < r.num_edges(); ++e) {
    const auto& ed = r.edge(e);
    const auto& q = geom.quad(e);
    bool db = out.sigma_bullet.get(ed.u) != out.sigma_bullet.get(ed.v);
    bool dc = out.sigma_circ[q.all[0]] != out.sigma_circ[q.all[1]];
    if (db && dc) throw std::runtime_error("ice rule violated on a quad");
  }
  // Heights pinned to 1 off Λ*; axioms validated inside.
  HeightAssignment h = heights_from_sigma(r, geom, out.sigma_bullet, out.sigma_circ, 1);
  out.h_primal = std::move(h.h_primal);
  out.h_dual = std::move(h.h_dual);
  return out;
}

// Runs `chains` independent chains in parallel (deterministic merge by chain
// index; per-chain work is a pure function of seed and chain id).
// on_sample(chain state, chain-local sample index, series) is called after
// burn-in every `thin` sweeps.
inline std::vector<ObservableSeries> run_chains(
    const Region& r, const Couplings& c, const BoundaryCondition& bc1, const BoundaryCondition& bc2,
    uint64_t seed, int chains, uint64_t sweeps, uint64_t burn_in, uint64_t thin,
    const std::function<void(ChainState&, uint64_t, ObservableSeries&)>& on_sample, int threads = 0) {
  if (threads <= 0) threads = default_thread_count();
  std::vector<ObservableSeries> out(chains);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      int id = next.fetch_add(1);
      if (id >= chains) break;
      ChainState st = ChainState::make(r, c, bc1, bc2, seed, id);
      uint64_t sample_index = 0;
      for (uint64_t s = 0; s < sweeps; ++s) {
        glauber_sweep(st);
        if (s >= burn_in && (s - burn_in) % thin == 0) on_sample(st, sample_index++, out[id]);
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(threads, chains); ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return out;
}

inline ObservableSeries merge_series(const std::vector<ObservableSeries>& per_chain) {
  ObservableSeries all;
  for (const auto& s : per_chain) all.append(s);
  return all;
}

// Staggered product order m† = |Λ|^{-1} Σ_x (-1)^{parity(x)} s_x s'_x.
inline double staggered_product_order(const Region& r, const SpinPair& p) {
  double m = 0;
  for (int i = 0; i < r.num_vertices(); ++i) {
    if (!r.in_lambda(i)) continue;
    int sign = r.parity(i) == 0 ? +1 : -1;
    m += sign * p.s1.get(i) * p.s2.get(i);
  }
  return m / r.lambda_size();
}

// Boundary-cluster observables from the transformed graphical sample
// ω̃ ~ GAT^{1,+} of (F_odd(s s'), s) with couplings (-U, J, -J'): membership
// of the origin in the boundary cluster C, and the maximal hole diameter of
// Λ ∖ C (max-norm diameter of its connected components).
struct BoundaryClusterStats {
  double origin_in_c = 0;
  double max_hole_diam = 0;
};

inline BoundaryClusterStats boundary_cluster_stats(const ChainState& st) {
  const Region& r = *st.region;
  auto [J, Jp, U] = st.c.original_roles();
  Couplings ct = Couplings::jju(J, Jp, U)
                     .apply(CouplingPermutation{{2, 0, 1}, {1, 1, 1}})    // (ss', s)
                     .apply(CouplingPermutation{{0, 1, 2}, {-1, 1, -1}});  // flip odd sites of the product layer
  SpinLayer prod = st.pair.s1;
  for (int i = 0; i < r.num_vertices(); ++i)
    prod.set(i, st.pair.s1.get(i) * st.pair.s2.get(i) * (r.parity(i) == 1 ? -1 : +1));
  EdgeConfig om = sample_gat_for(r, ct, prod, st.pair.s1, 1, st.seed, st.chain_id, st.sweep);
  auto roots = r.component_roots(om);
  int outer = roots[r.num_vertices()];
  BoundaryClusterStats out;
  Coord origin = r.center;
  int oi = r.vertex_index(origin);
  out.origin_in_c = roots[oi] == outer ? 1.0 : 0.0;
  // Holes: components of Λ ∖ C under nearest-neighbor adjacency within Λ.
  std::vector<int> hole(r.num_vertices(), -1);
  int nh = 0;
  for (int i = 0; i < r.num_vertices(); ++i) {
    if (!r.in_lambda(i) || roots[i] == outer || hole[i] >= 0) continue;
    std::vector<int> stack{i};
    hole[i] = nh;
    Coord lo = r.vertex(i), hi = r.vertex(i);
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int a = 0; a < r.dim; ++a) {
        lo[a] = std::min(lo[a], r.vertex(v)[a]);
        hi[a] = std::max(hi[a], r.vertex(v)[a]);
      }
      for (auto& [e, w] : r.incident(v)) {
        (void)e;
        if (r.in_lambda(w) && roots[w] != outer && hole[w] < 0) {
          hole[w] = nh;
          stack.push_back(w);
        }
      }
    }
    int diam = 0;
    for (int a = 0; a < r.dim; ++a) diam = std::max(diam, hi[a] - lo[a]);
    out.max_hole_diam = std::max(out.max_hole_diam, static_cast<double>(diam));
    ++nh;
  }
  return out;
}

}  // namespace atlab
