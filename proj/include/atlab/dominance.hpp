#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "atlab/enumerate.hpp"
#include "atlab/measure.hpp"
#include "atlab/rng.hpp"

namespace atlab {

namespace detail {

// Dinic max-flow on doubles; big enough for 2 * 4096 + 2 nodes.
class MaxFlow {
 public:
  explicit MaxFlow(int n) : head_(n, -1) {}
  void add_edge(int u, int v, double cap) {
    edges_.push_back({v, head_[u], cap});
    head_[u] = static_cast<int>(edges_.size()) - 1;
    edges_.push_back({u, head_[v], 0.0});
    head_[v] = static_cast<int>(edges_.size()) - 1;
  }
  double run(int s, int t) {
    double flow = 0;
    while (bfs(s, t)) {
      iter_ = head_;
      for (;;) {
        double f = dfs(s, t, std::numeric_limits<double>::infinity());
        if (f <= 0) break;
        flow += f;
      }
    }
    return flow;
  }

 private:
  struct E {
    int to, next;
    double cap;
  };
  bool bfs(int s, int t) {
    level_.assign(head_.size(), -1);
    std::queue<int> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (int e = head_[v]; e != -1; e = edges_[e].next) {
        if (edges_[e].cap > 1e-15 && level_[edges_[e].to] < 0) {
          level_[edges_[e].to] = level_[v] + 1;
          q.push(edges_[e].to);
        }
      }
    }
    return level_[t] >= 0;
  }
  double dfs(int v, int t, double f) {
    if (v == t) return f;
    for (int& e = iter_[v]; e != -1; e = edges_[e].next) {
      auto& ed = edges_[e];
      if (ed.cap > 1e-15 && level_[ed.to] == level_[v] + 1) {
        double d = dfs(ed.to, t, std::min(f, ed.cap));
        if (d > 0) {
          ed.cap -= d;
          edges_[e ^ 1].cap += d;
          return d;
        }
      }
    }
    return 0;
  }
  std::vector<E> edges_;
  std::vector<int> head_, level_, iter_;
};

}  // namespace detail

// Exact decision of μ ≤_st ν by feasibility of a coupling supported on
// {ω ≤ ω'}: transport feasibility on the product of the two state spaces
// (max-flow value 1 within tolerance). Keys are edge masks; the partial order
// is coordinatewise inclusion.
inline bool strassen_dominates(const EnumeratedMeasure& mu, const EnumeratedMeasure& nu, double tol = 1e-10) {
  if (mu.space != nu.space)
    throw std::invalid_argument("strassen: mismatched edge sets (" + mu.space + " vs " + nu.space + ")");
  const int m = static_cast<int>(mu.size()), n = static_cast<int>(nu.size());
  if (m > 4096 || n > 4096) throw CapExceeded("strassen: state space > 4096 (use the Holley criterion)");
  detail::MaxFlow flow(m + n + 2);
  const int source = m + n, sink = m + n + 1;
  for (int i = 0; i < m; ++i) flow.add_edge(source, i, mu.prob[i]);
  for (int j = 0; j < n; ++j) flow.add_edge(m + j, sink, nu.prob[j]);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      if ((mu.keys[i] & ~nu.keys[j]) == 0) flow.add_edge(i, m + j, 2.0);
  return flow.run(source, sink) >= 1.0 - tol;
}

enum class HolleyVerdict { kCertified, kInconclusive };

// Sufficient pairwise condition ν[ω∨ζ] μ[ω∧ζ] ≥ μ[ω] ν[ζ] over all pairs of
// configurations; certifies μ ≤_st ν when both measures are strictly positive.
inline HolleyVerdict holley_pairwise(const EnumeratedMeasure& mu, const EnumeratedMeasure& nu,
                                     double rel_tol = 1e-12) {
  if (mu.space != nu.space) throw std::invalid_argument("holley: mismatched edge sets");
  uint64_t full = 0;
  for (uint64_t k : mu.keys) full |= k;
  for (uint64_t k : nu.keys) full |= k;
  int e_bits = full == 0 ? 0 : 64 - std::countl_zero(full);
  size_t n = 1ull << e_bits;
  if (n > 4096) throw CapExceeded("holley_pairwise: state space > 4096");
  if (mu.size() != n || nu.size() != n) return HolleyVerdict::kInconclusive;  // needs strict positivity
  std::vector<double> a(n, 0.0), b(n, 0.0);
  for (size_t i = 0; i < mu.size(); ++i) a[mu.keys[i]] = mu.prob[i];
  for (size_t i = 0; i < nu.size(); ++i) b[nu.keys[i]] = nu.prob[i];
  for (size_t om = 0; om < n; ++om) {
    for (size_t ze = 0; ze < n; ++ze) {
      double lhs = b[om | ze] * a[om & ze];
      double rhs = a[om] * b[ze];
      if (lhs < rhs * (1.0 - rel_tol) - 1e-300) return HolleyVerdict::kInconclusive;
    }
  }
  return HolleyVerdict::kCertified;
}

// Scalar Holley certificate for the pair-coupling weight family
// u1^{|ω|+|ω'|} û3^{|ω∩ω'|} 2^{k+k'}: the per-edge factor comparisons reduce
// to four inequalities, all implied by u1_lo ≤ û3 u1_hi when û3 ≤ 1. Works at
// any size since no enumeration is involved.
inline HolleyVerdict holley_weight_conditions(double u1_lo, double u3hat_lo, double u1_hi, double u3hat_hi,
                                              double rel_tol = 1e-12) {
  auto ge = [&](double x, double y) { return x >= y * (1.0 - rel_tol); };
  bool ok = ge(u1_hi, u1_lo) && ge(u1_hi * u1_hi * u3hat_hi, u1_lo * u1_lo * u3hat_lo) &&
            ge(u1_hi * u3hat_hi, u1_lo) && ge(u1_hi * u3hat_hi, u1_lo * u3hat_lo);
  return ok ? HolleyVerdict::kCertified : HolleyVerdict::kInconclusive;
}

// Boundary maximality: GAT^{1,f} on a larger region Δ, conditioned on any
// exterior context and restricted to Ē_Λ, is dominated by GAT^{1,f} on Λ.
// Exhausts contexts when few, otherwise samples them deterministically.
struct MaximalityReport {
  bool unconditioned_ok = false;
  int contexts_checked = 0;
  int contexts_failed = 0;
  bool all_ok() const { return unconditioned_ok && contexts_failed == 0; }
};

inline MaximalityReport maximality_check(Oracle& big, Oracle& small, const Couplings& c, int max_contexts = 256,
                                         uint64_t seed = 1) {
  const Region& rb = big.region();
  const Region& rs = small.region();
  // Map Ē_Λ edges into Ē_Δ by coordinates.
  std::vector<int> edge_map(rs.num_edges(), -1);
  for (int e = 0; e < rs.num_edges(); ++e) {
    const auto& ed = rs.edge(e);
    int u = rb.vertex_index(rs.vertex(ed.u));
    if (u < 0) throw std::invalid_argument("maximality_check: small region not inside large region");
    for (auto& [be, w] : rb.incident(u)) {
      if (rb.vertex(w) == rs.vertex(ed.v)) {
        edge_map[e] = be;
        break;
      }
    }
    if (edge_map[e] < 0) throw std::invalid_argument("maximality_check: edge of small region missing in large one");
  }
  uint64_t inner_mask = 0;
  for (int be : edge_map) inner_mask |= 1ull << be;

  EnumeratedMeasure nu = gat_law(small, c, 1, BoundaryCondition::free_bc());
  EnumeratedMeasure big_law = gat_law(big, c, 1, BoundaryCondition::free_bc());
  std::vector<double> table(1ull << rb.num_edges(), 0.0);
  for (size_t i = 0; i < big_law.size(); ++i) table[big_law.keys[i]] = big_law.prob[i];

  auto project = [&](uint64_t big_key) {
    uint64_t k = 0;
    for (int e = 0; e < rs.num_edges(); ++e)
      if (big_key & (1ull << edge_map[e])) k |= 1ull << e;
    return k;
  };

  MaximalityReport rep;
  {
    EnumeratedMeasure marg = big_law.marginal(project, nu.space);
    rep.unconditioned_ok = strassen_dominates(marg, nu);
  }

  // Contexts: assignments of Ē_Δ ∖ Ē_Λ.
  std::vector<int> outer_edges;
  for (int e = 0; e < rb.num_edges(); ++e)
    if (!(inner_mask & (1ull << e))) outer_edges.push_back(e);
  uint64_t n_ctx_total = 1ull << outer_edges.size();
  bool exhaustive = n_ctx_total <= static_cast<uint64_t>(max_contexts);
  uint64_t n_ctx = exhaustive ? n_ctx_total : static_cast<uint64_t>(max_contexts);
  for (uint64_t t = 0; t < n_ctx; ++t) {
    uint64_t pick = exhaustive ? t : rng::hash(seed, rng::kContext, t) % n_ctx_total;
    uint64_t ctx = 0;
    for (size_t i = 0; i < outer_edges.size(); ++i)
      if ((pick >> i) & 1) ctx |= 1ull << outer_edges[i];
    DenseAccumulator acc(nu.space, 1ull << rs.num_edges());
    double mass = 0;
    for (uint64_t sub = 0; sub < (1ull << rs.num_edges()); ++sub) {
      uint64_t big_key = ctx;
      for (int e = 0; e < rs.num_edges(); ++e)
        if ((sub >> e) & 1) big_key |= 1ull << edge_map[e];
      double p = table[big_key];
      acc.add(sub, p);
      mass += p;
    }
    if (mass <= 0) continue;  // zero-probability context
    ++rep.contexts_checked;
    if (!strassen_dominates(acc.finish(), nu)) ++rep.contexts_failed;
  }
  return rep;
}

}  // namespace atlab
