#pragma once

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "atlab/enumerate.hpp"
#include "atlab/heights.hpp"
#include "atlab/sampler.hpp"

namespace atlab {

// σ = (σ•, σ∘) key: σ• bits over Λ̄ followed by σ∘ bits over Λ* (+1 ↦ 1).
inline uint64_t sigma_key(const Region& r, uint64_t sigma_bullet_mask, uint64_t sigma_circ_star_bits) {
  return sigma_bullet_mask | (sigma_circ_star_bits << r.num_vertices());
}

// E_{σ∘} as a primal-edge mask: e is in it iff the dual endpoints of e*
// disagree (dual vertices outside Λ* carry +1).
inline uint64_t sigma_circ_disagreement_mask(const Region& r, const DualGeometry& g, uint64_t star_bits) {
  uint64_t m = 0;
  for (int e = 0; e < r.num_edges(); ++e) {
    const auto& q = g.quad(e);
    int v0 = q.star[0] >= 0 ? static_cast<int>((star_bits >> q.star[0]) & 1) : 1;
    int v1 = q.star[1] >= 0 ? static_cast<int>((star_bits >> q.star[1]) & 1) : 1;
    if (v0 != v1) m |= 1ull << e;
  }
  return m;
}

// Closed-form staggered eight-vertex spin law on a domain:
// ∝ a^{|E_{σ∘}∖E_{σ•}|} b^{|E_{σ•}∖E_{σ∘}|} c^{|E∖(E_{σ•}∪E_{σ∘})|} d^{|E_{σ•}∩E_{σ∘}|}.
inline EnumeratedMeasure eightv_law(Oracle& o, const EightVertexWeights& w, const BoundaryCondition& bc2) {
  const Region& r = o.region();
  const DualGeometry& g = o.dual();
  if (!g.is_domain()) throw std::invalid_argument("eightv_law: region is not a domain");
  if (w.a < 0 || w.b < 0 || w.c <= 0 || w.d < 0) throw std::invalid_argument("eightv_law: need a,b,d >= 0 and c > 0");
  const LayerTables& t2 = o.layer(bc2);
  const int S = g.star_size(), E = r.num_edges(), V = r.num_vertices();
  if (t2.scheme.free_sites.size() + S > 24) throw CapExceeded("eightv_law: state space too large");
  std::vector<uint64_t> ec_mask(1ull << S);
  for (uint64_t m = 0; m < (1ull << S); ++m) ec_mask[m] = sigma_circ_disagreement_mask(r, g, m);
  auto logpow = [](double base, int c) {
    if (c == 0) return 0.0;
    return base > 0 ? c * std::log(base) : -std::numeric_limits<double>::infinity();
  };
  MeasureBuilder b(sigma_space(r));
  for (size_t j = 0; j < t2.states(); ++j) {
    uint64_t eb = t2.es_mask[j];
    for (uint64_t m = 0; m < (1ull << S); ++m) {
      uint64_t ec = ec_mask[m];
      int na = popcount64(ec & ~eb), nb = popcount64(eb & ~ec), nd = popcount64(eb & ec);
      int nc = E - na - nb - nd;
      double lw = logpow(w.a, na) + logpow(w.b, nb) + logpow(w.c, nc) + logpow(w.d, nd);
      b.add_log(sigma_key(r, t2.spin_mask[j], m), lw);
    }
  }
  return b.finish();
}

// The same law obtained as the pushforward of the percolation coupling: σ• is
// the second spin layer, σ∘ colors the dual clusters of ω (+1 on the outer
// sea). Free first-layer boundary (fill 0) as in the coupling.
inline EnumeratedMeasure eightv_pushforward(Oracle& o, const Couplings& c, const BoundaryCondition& bc2) {
  const Region& r = o.region();
  const DualGeometry& g = o.dual();
  if (!g.is_domain()) throw std::invalid_argument("eightv_pushforward: region is not a domain");
  if (c.K < std::abs(c.Kpp)) throw std::invalid_argument("eightv_pushforward: need K >= |K''|");
  const LayerTables& t2 = o.layer(bc2);
  const auto& k0 = o.k_table(0);
  const int E = r.num_edges(), S = g.star_size();
  if (E > 12) throw CapExceeded("eightv_pushforward: |E| > 12");
  double u1 = std::expm1(2 * (c.K - c.Kpp)), w1 = std::expm1(2 * (c.K + c.Kpp));
  detail::check_linear_range(E * std::log(std::max({u1, w1, 1.0})) + 2 * std::abs(c.Kpp - c.Kp) * E);
  auto u1p = detail::pow_table(u1, E), w1p = detail::pow_table(w1, E);
  std::vector<double> a2(t2.states());
  for (size_t j = 0; j < t2.states(); ++j) a2[j] = std::exp(2 * (c.Kpp - c.Kp) * t2.es_count[j]);

  std::unordered_map<uint64_t, double> acc;
  std::vector<int> internal_roots;
  for (uint64_t om = 0; om < (1ull << E); ++om) {
    EdgeConfig cfg = EdgeConfig::from_mask(om, E, 0);
    auto roots = g.dual_component_roots(cfg);
    int outer = roots[S];
    internal_roots.clear();
    for (int si = 0; si < S; ++si) {
      int rt = roots[si];
      if (rt != outer && std::find(internal_roots.begin(), internal_roots.end(), rt) == internal_roots.end())
        internal_roots.push_back(rt);
    }
    double base = std::ldexp(1.0, k0[om] - static_cast<int>(internal_roots.size()));
    for (uint64_t coloring = 0; coloring < (1ull << internal_roots.size()); ++coloring) {
      uint64_t star_bits = 0;
      for (int si = 0; si < S; ++si) {
        int rt = roots[si];
        int bit = 1;
        if (rt != outer) {
          size_t idx = std::find(internal_roots.begin(), internal_roots.end(), rt) - internal_roots.begin();
          bit = static_cast<int>((coloring >> idx) & 1);
        }
        star_bits |= static_cast<uint64_t>(bit) << si;
      }
      for (size_t j = 0; j < t2.states(); ++j) {
        int c1 = popcount64(om & t2.es_mask[j]);
        double w = a2[j] * u1p[c1] * w1p[popcount64(om) - c1] * base;
        acc[sigma_key(r, t2.spin_mask[j], star_bits)] += w;
      }
    }
  }
  MeasureBuilder b(sigma_space(r));
  for (auto& [k, v] : acc)
    if (v > 0) b.add_log(k, std::log(v));
  return b.finish();
}

// ---------------------------------------------------------------------------
// Height-function law on boxes, standard staggered boundary
// t = shift + (0 on even, 2 on odd, 1 on dual).

inline int pinned_primal_height(const Region& r, int i, int shift) { return shift + (r.parity(i) == 0 ? 0 : 2); }

inline uint64_t height_key(const Region& r, const DualGeometry& g, const std::vector<int>& h_primal,
                           const std::vector<int>& h_dual, int shift) {
  int free_sites = r.lambda_size() + g.star_size();
  if (free_sites > 16) throw CapExceeded("height_key: more than 16 free height values");
  uint64_t key = 0;
  int pos = 0;
  auto pack = [&](int h) {
    int nib = h - shift + 7;
    if (nib < 0 || nib > 15) throw std::runtime_error("height_key: value out of packable range");
    key |= static_cast<uint64_t>(nib) << pos;
    pos += 4;
  };
  for (int i = 0; i < r.num_vertices(); ++i)
    if (r.in_lambda(i)) pack(h_primal[i]);
  for (int si = 0; si < g.star_size(); ++si) pack(h_dual[g.all_index_of_star(si)]);
  return key;
}

// Backtracking enumeration of all admissible height functions (free on
// Λ ∪ Λ*, pinned to the standard boundary outside); leaf gets the full
// assignment and its (a,b,c) weight relative to c^{|E|}.
template <typename LeafFn>
uint64_t hf_enumerate(const Region& r, const DualGeometry& g, double a_over_c, double b_over_c, int shift,
                      LeafFn&& leaf, uint64_t leaf_cap = (1ull << 33)) {
  const int NP = r.num_vertices(), ND = static_cast<int>(g.dual_all().size()), S = g.star_size();
  std::vector<int> hp(NP), hd(ND);
  std::vector<uint8_t> hp_set(NP, 0), hd_set(ND, 0);
  std::vector<uint8_t> in_star(ND, 0);
  for (int si = 0; si < S; ++si) in_star[g.all_index_of_star(si)] = 1;
  for (int i = 0; i < NP; ++i)
    if (!r.in_lambda(i)) {
      hp[i] = pinned_primal_height(r, i, shift);
      hp_set[i] = 1;
    }
  for (int j = 0; j < ND; ++j)
    if (!in_star[j]) {
      hd[j] = shift + 1;
      hd_set[j] = 1;
    }

  // Quad-pair constraint lists per free node. Nodes: primal Λ first, then Λ*.
  struct Node {
    bool primal;
    int idx;                              // vertex index or dual_all index
    std::vector<std::pair<bool, int>> nb;  // (neighbor is primal, its index)
  };
  std::vector<Node> nodes;
  std::vector<int> primal_node(NP, -1), dual_node(ND, -1);
  for (int i = 0; i < NP; ++i)
    if (r.in_lambda(i)) {
      primal_node[i] = static_cast<int>(nodes.size());
      nodes.push_back({true, i, {}});
    }
  for (int j = 0; j < ND; ++j)
    if (in_star[j]) {
      dual_node[j] = static_cast<int>(nodes.size());
      nodes.push_back({false, j, {}});
    }
  for (int e = 0; e < r.num_edges(); ++e) {
    const auto& ed = r.edge(e);
    const auto& q = g.quad(e);
    for (int pv : {ed.u, ed.v}) {
      for (int k = 0; k < 2; ++k) {
        int dv = q.all[k];
        if (primal_node[pv] >= 0) nodes[primal_node[pv]].nb.push_back({false, dv});
        if (dual_node[dv] >= 0) nodes[dual_node[dv]].nb.push_back({true, pv});
      }
    }
  }
  for (auto& n : nodes) {
    std::sort(n.nb.begin(), n.nb.end());
    n.nb.erase(std::unique(n.nb.begin(), n.nb.end()), n.nb.end());
  }
  // Assignment order: every node must have an already-set neighbor.
  std::vector<int> order;
  std::vector<uint8_t> placed(nodes.size(), 0);
  for (size_t round = 0; round < nodes.size(); ++round) {
    int pick = -1;
    for (size_t i = 0; i < nodes.size() && pick < 0; ++i) {
      if (placed[i]) continue;
      for (auto& [isp, idx] : nodes[i].nb) {
        bool set = isp ? (hp_set[idx] || (primal_node[idx] >= 0 && placed[primal_node[idx]]))
                       : (hd_set[idx] || (dual_node[idx] >= 0 && placed[dual_node[idx]]));
        if (set) {
          pick = static_cast<int>(i);
          break;
        }
      }
    }
    if (pick < 0) throw std::runtime_error("hf_enumerate: disconnected height constraint graph");
    placed[pick] = 1;
    order.push_back(pick);
  }

  const int E = r.num_edges();
  detail::check_linear_range(E * std::log(std::max({a_over_c, b_over_c, 1.0})));
  uint64_t leaves = 0;
  std::function<void(size_t)> rec = [&](size_t depth) {
    if (depth == order.size()) {
      if (++leaves > leaf_cap) throw CapExceeded("hf_enumerate: leaf cap exceeded");
      double w = 1.0;
      for (int e = 0; e < E; ++e) {
        const auto& ed = r.edge(e);
        const auto& q = g.quad(e);
        if (hp[ed.u] != hp[ed.v]) w *= b_over_c;
        if (hd[q.all[0]] != hd[q.all[1]]) w *= a_over_c;
      }
      leaf(hp, hd, w);
      return;
    }
    Node& n = nodes[order[depth]];
    int first_h = INT32_MIN;
    for (auto& [isp, idx] : n.nb) {
      if (isp ? hp_set[idx] : hd_set[idx]) {
        first_h = isp ? hp[idx] : hd[idx];
        break;
      }
    }
    if (first_h == INT32_MIN) throw std::runtime_error("hf_enumerate: node without assigned neighbor");
    for (int v : {first_h - 1, first_h + 1}) {
      bool ok = true;
      for (auto& [isp, idx] : n.nb) {
        bool set = isp ? hp_set[idx] != 0 : hd_set[idx] != 0;
        if (set && std::abs(v - (isp ? hp[idx] : hd[idx])) != 1) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      if (n.primal) {
        hp[n.idx] = v;
        hp_set[n.idx] = 1;
      } else {
        hd[n.idx] = v;
        hd_set[n.idx] = 1;
      }
      rec(depth + 1);
      if (n.primal)
        hp_set[n.idx] = 0;
      else
        hd_set[n.idx] = 0;
    }
  };
  rec(0);
  return leaves;
}

// Direct height-function law (route independent of the spin representation).
inline EnumeratedMeasure hf_law(const Region& r, const DualGeometry& g, double a, double b, double c,
                                int shift = 0) {
  if (r.radius < 0 || r.radius < 1) throw std::invalid_argument("hf_law: needs a box B_n with n >= 1");
  if (!(a > 0) || !(b > 0) || !(c > 0)) throw std::invalid_argument("hf_law: weights must be positive");
  if ((shift % 2) != 0) throw std::invalid_argument("hf_law: boundary shift must be even (admissibility)");
  MeasureBuilder mb(height_space(r));
  hf_enumerate(r, g, a / c, b / c, shift, [&](const std::vector<int>& hp, const std::vector<int>& hd, double w) {
    mb.add_log(height_key(r, g, hp, hd, shift), std::log(w));
  });
  return mb.finish();
}

// Pushforward of the six-vertex spin law (d = 0, σ• boundary ±) through the
// gradient map pinned at shift+1 on the dual boundary; bijective with hf_law.
inline EnumeratedMeasure hf_from_sixv_pushforward(Oracle& o, double a, double b, double c, int shift = 0) {
  const Region& r = o.region();
  const DualGeometry& g = o.dual();
  EightVertexWeights w{a, b, c, 0.0};
  EnumeratedMeasure sixv = eightv_law(o, w, BoundaryCondition::alternating());
  MeasureBuilder mb(height_space(r));
  const int V = r.num_vertices(), S = g.star_size();
  for (size_t i = 0; i < sixv.size(); ++i) {
    uint64_t key = sixv.keys[i];
    SpinLayer sb;
    sb.n = V;
    sb.words = {key & ((V == 64 ? ~0ull : (1ull << V) - 1))};
    uint64_t star_bits = key >> V;
    std::vector<int8_t> sc(g.dual_all().size(), 1);
    for (int si = 0; si < S; ++si) sc[g.all_index_of_star(si)] = ((star_bits >> si) & 1) ? +1 : -1;
    HeightAssignment h = heights_from_sigma(r, g, sb, sc, shift + 1);
    mb.add_log(height_key(r, g, h.h_primal, h.h_dual, shift), std::log(sixv.prob[i]));
  }
  return mb.finish();
}

// Exact Var(h_0) by streaming enumeration (no law materialized); the spec cap
// for this oracle is n <= 2.
struct HeightVarianceResult {
  double variance = 0;
  double stderr_ = 0;  // 0 for the exact backend
  uint64_t states = 0;
};

inline HeightVarianceResult height_variance_oracle(const Region& r, const DualGeometry& g, double a, double b,
                                                   double c, int shift = 0) {
  if (r.radius > 2) throw CapExceeded("height_variance_oracle: n <= 2 only");
  Coord origin = r.center;
  int oi = r.vertex_index(origin);
  KahanSum z, m1, m2;
  HeightVarianceResult out;
  out.states = hf_enumerate(r, g, a / c, b / c, shift,
                            [&](const std::vector<int>& hp, const std::vector<int>&, double w) {
                              z.add(w);
                              m1.add(w * hp[oi]);
                              m2.add(w * hp[oi] * hp[oi]);
                            });
  double e1 = m1.value() / z.value(), e2 = m2.value() / z.value();
  out.variance = e2 - e1 * e1;
  return out;
}

// (J, U) for the six-vertex specialization with given a/c = tanh 2J and
// b/c = e^{-2U}/cosh 2J; couplings returned in the (K, K', K'') = (J, U, J)
// arrangement used by the height-function chain.
inline Couplings couplings_from_sixv_ratios(double a_over_c, double b_over_c) {
  if (!(a_over_c > 0) || !(a_over_c < 1) || !(b_over_c > 0))
    throw std::invalid_argument("sixv ratios: need 0 < a/c < 1 and b/c > 0");
  double J = 0.5 * std::atanh(a_over_c);
  double U = -0.5 * std::log(b_over_c * std::cosh(2 * J));
  return Couplings::iso(J, U).apply(CouplingPermutation{{0, 2, 1}, {1, 1, 1}});
}

inline HeightVarianceResult height_variance_mcmc(int n, double a_over_c, double b_over_c, uint64_t seed,
                                                 int chains = 8, uint64_t sweeps = 30000, uint64_t burn_in = 10000,
                                                 uint64_t thin = 10, int threads = 0) {
  Region r = Region::box(2, n);
  DualGeometry g = DualGeometry::build(r);
  Couplings c = couplings_from_sixv_ratios(a_over_c, b_over_c);
  Coord origin{};
  int oi = r.vertex_index(origin);
  auto per_chain = run_chains(
      r, c, BoundaryCondition::free_bc(), BoundaryCondition::alternating(), seed, chains, sweeps, burn_in, thin,
      [&](ChainState& st, uint64_t, ObservableSeries& s) {
        EdgeConfig om = sample_gat(st);
        SigmaHeightSample sh = sample_sigma_and_height(st, g, om);
        s.add("h0", sh.h_primal[oi]);
      },
      threads);
  // Per-chain batched variance estimates, combined across chains.
  double mean = 0, var_of_mean = 0;
  int used = 0;
  for (auto& s : per_chain) {
    BatchStats bs = s.variance_stats("h0");
    if (bs.batches == 0) continue;
    mean += bs.mean;
    var_of_mean += bs.stderr_ * bs.stderr_;
    ++used;
  }
  HeightVarianceResult out;
  if (used == 0) throw std::runtime_error("height_variance_mcmc: not enough samples for error bars");
  out.variance = mean / used;
  out.stderr_ = std::sqrt(var_of_mean) / used;
  out.states = 0;
  return out;
}

}  // namespace atlab
