#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "atlab/lattice.hpp"
#include "atlab/measure.hpp"
#include "atlab/spins.hpp"
#include "atlab/weights.hpp"

namespace atlab {

// Desk-scale enumeration caps: free spins per layer, and edges for ω-space
// enumeration. Beyond these, callers get a clear CapExceeded.
constexpr int kMaxFreeSpins = 20;
constexpr int kMaxEnumEdges = 24;
// Guard for linear-space pow tables: |log weight| of any single state must
// stay far from the double range.
constexpr double kMaxLinearLogWeight = 600.0;

inline std::string region_signature(const Region& r) {
  std::string s = "d" + std::to_string(r.dim);
  if (r.radius >= 0)
    s += "n" + std::to_string(r.radius);
  else
    s += "v" + std::to_string(r.lambda_size());
  s += "V" + std::to_string(r.num_vertices()) + "E" + std::to_string(r.num_edges());
  return s;
}

inline std::string omega_space(const Region& r, int fill) {
  return "omega[" + region_signature(r) + ",#=" + std::to_string(fill) + "]";
}
inline std::string spin_pair_space(const Region& r) { return "spins[" + region_signature(r) + "]"; }
inline std::string joint_space(const Region& r, int fill) {
  return "joint[" + region_signature(r) + ",#=" + std::to_string(fill) + "]";
}
inline std::string sigma_space(const Region& r) { return "sigma[" + region_signature(r) + "]"; }
inline std::string height_space(const Region& r) { return "height[" + region_signature(r) + "]"; }

// ---------------------------------------------------------------------------
// Layer enumeration tables

struct LayerScheme {
  uint64_t forced_plus = 0;  // forced +1 sites as bits over Λ̄
  std::vector<int> free_sites;
  uint64_t materialize(uint64_t state) const {
    uint64_t s = forced_plus;
    for (size_t i = 0; i < free_sites.size(); ++i)
      if ((state >> i) & 1) s |= 1ull << free_sites[i];
    return s;
  }
};

inline LayerScheme layer_scheme(const Region& r, const BoundaryCondition& bc) {
  if (r.num_vertices() > 63) throw CapExceeded("layer enumeration: |closure| > 63");
  LayerScheme s;
  for (int i = 0; i < r.num_vertices(); ++i) {
    int v = bc.forced(r, i);
    if (v == 0)
      s.free_sites.push_back(i);
    else if (v > 0)
      s.forced_plus |= 1ull << i;
  }
  if (static_cast<int>(s.free_sites.size()) > kMaxFreeSpins)
    throw CapExceeded("layer enumeration: " + std::to_string(s.free_sites.size()) + " free spins > cap " +
                      std::to_string(kMaxFreeSpins));
  return s;
}

inline uint64_t disagreement_mask(const Region& r, uint64_t spins) {
  uint64_t m = 0;
  for (int e = 0; e < r.num_edges(); ++e) {
    const auto& ed = r.edge(e);
    m |= (((spins >> ed.u) ^ (spins >> ed.v)) & 1ull) << e;
  }
  return m;
}

struct LayerTables {
  LayerScheme scheme;
  std::vector<uint64_t> spin_mask;  // per free-state: spins over Λ̄ (+1 ↦ 1)
  std::vector<uint64_t> es_mask;    // disagreement edges per free-state
  std::vector<uint8_t> es_count;
  size_t states() const { return spin_mask.size(); }
};

inline LayerTables build_layer_tables(const Region& r, const BoundaryCondition& bc) {
  LayerTables t;
  t.scheme = layer_scheme(r, bc);
  size_t n = 1ull << t.scheme.free_sites.size();
  t.spin_mask.resize(n);
  t.es_mask.resize(n);
  t.es_count.resize(n);
  for (size_t i = 0; i < n; ++i) {
    uint64_t s = t.scheme.materialize(i);
    t.spin_mask[i] = s;
    uint64_t m = disagreement_mask(r, s);
    t.es_mask[i] = m;
    t.es_count[i] = static_cast<uint8_t>(popcount64(m));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Oracle workspace: caches cluster-count tables, dual geometry and layer
// tables for one region. Immutable region; lazy caches.

class Oracle {
 public:
  explicit Oracle(const Region& r) : region_(r) {}
  const Region& region() const { return region_; }

  const std::vector<int8_t>& k_table(int fill) {
    auto& tab = fill ? k1_ : k0_;
    if (!tab.empty()) return tab;
    if (region_.num_edges() > kMaxEnumEdges)
      throw CapExceeded("omega enumeration: |E| = " + std::to_string(region_.num_edges()) + " > cap " +
                        std::to_string(kMaxEnumEdges));
    size_t n = 1ull << region_.num_edges();
    tab.resize(n);
    uint64_t mask = 0;
    for (size_t w = 0; w < n; ++w) {
      mask = w;
      tab[w] = static_cast<int8_t>(region_.cluster_count(&mask, fill));
    }
    return tab;
  }

  const DualGeometry& dual() {
    if (!dual_) dual_ = std::make_unique<DualGeometry>(DualGeometry::build(region_));
    return *dual_;
  }

  const LayerTables& layer(const BoundaryCondition& bc) {
    std::string key = bc.name();
    if (bc.kind == BoundaryCondition::kExplicit)
      for (auto v : bc.values) key += v > 0 ? '+' : '-';
    auto it = layers_.find(key);
    if (it == layers_.end()) it = layers_.emplace(key, build_layer_tables(region_, bc)).first;
    return it->second;
  }

 private:
  const Region& region_;
  std::vector<int8_t> k0_, k1_;
  std::unique_ptr<DualGeometry> dual_;
  std::map<std::string, LayerTables> layers_;
};

// ---------------------------------------------------------------------------
// Pointwise weights

// exp(Σ_{e∈Ē_Λ} K s_x s_y + K' s'_x s'_y + K'' s_x s'_x s_y s'_y), log form.
inline double at_log_weight(const Region& r, const Couplings& c, uint64_t s1, uint64_t s2) {
  double h = 0;
  for (int e = 0; e < r.num_edges(); ++e) {
    const auto& ed = r.edge(e);
    int a = ((s1 >> ed.u) & 1) == ((s1 >> ed.v) & 1) ? +1 : -1;
    int b = ((s2 >> ed.u) & 1) == ((s2 >> ed.v) & 1) ? +1 : -1;
    h += c.K * a + c.Kp * b + c.Kpp * a * b;
  }
  return h;
}
inline double at_weight(const Region& r, const Couplings& c, const SpinPair& p) {
  if (!p.boundary_consistent()) throw std::invalid_argument("at_weight: pair violates its boundary conditions");
  return std::exp(at_log_weight(r, c, p.s1.low64(), p.s2.low64()));
}

// Equivalent disagreement form e^{-2(K+K'')|E_s|} e^{-2(K'+K'')|E_{s'}|} e^{4K''|E_s ∩ E_{s'}|}.
inline double at_log_weight_disagreement(const Region& r, const Couplings& c, uint64_t s1, uint64_t s2) {
  uint64_t e1 = disagreement_mask(r, s1), e2 = disagreement_mask(r, s2);
  return -2 * (c.K + c.Kpp) * popcount64(e1) - 2 * (c.Kp + c.Kpp) * popcount64(e2) +
         4 * c.Kpp * popcount64(e1 & e2);
}

// Joint weight of (s, s', ω): e^{2(K''-K')|E_{s'}|} u1^{|ω∩E_{s'}|} w1^{|ω∖E_{s'}|} 1{ω ∩ E_s = ∅},
// with u1 = e^{2(K-K'')}-1 and w1 = e^{2(K+K'')}-1 and the 0^0 = 1 convention.
inline double joint_log_weight(const Region& r, const Couplings& c, uint64_t s1, uint64_t s2, uint64_t omega) {
  if (c.K < std::abs(c.Kpp)) throw std::invalid_argument("joint weight: need K >= |K''|");
  uint64_t e1 = disagreement_mask(r, s1), e2 = disagreement_mask(r, s2);
  if (omega & e1) return -std::numeric_limits<double>::infinity();
  double u1 = std::expm1(2 * (c.K - c.Kpp)), w1 = std::expm1(2 * (c.K + c.Kpp));
  int c1 = popcount64(omega & e2), c2 = popcount64(omega & ~e2);
  double lw = 2 * (c.Kpp - c.Kp) * popcount64(e2);
  if (c1 > 0) {
    if (u1 == 0.0) return -std::numeric_limits<double>::infinity();
    lw += c1 * std::log(u1);
  }
  if (c2 > 0) {
    if (w1 == 0.0) return -std::numeric_limits<double>::infinity();
    lw += c2 * std::log(w1);
  }
  return lw;
}
inline double joint_weight(const Region& r, const Couplings& c, const SpinPair& p, const EdgeConfig& omega) {
  if (!p.boundary_consistent()) throw std::invalid_argument("joint_weight: pair violates its boundary conditions");
  if (omega.fill != p.bc1.gat_fill()) throw std::invalid_argument("joint_weight: fill inconsistent with first-layer boundary");
  return std::exp(joint_log_weight(r, c, p.s1.low64(), p.s2.low64(), omega.low64()));
}

namespace detail {
inline void check_linear_range(double log_factor_bound) {
  if (log_factor_bound > kMaxLinearLogWeight)
    throw CapExceeded("couplings too large for linear-space enumeration tables");
}
inline std::vector<double> pow_table(double base, int n) {
  std::vector<double> t(n + 1);
  t[0] = 1.0;
  for (int i = 1; i <= n; ++i) t[i] = t[i - 1] * base;
  return t;
}
}  // namespace detail

// ---------------------------------------------------------------------------
// AT law over spin pairs; key = s1 bits | s2 bits << |Λ̄|.

inline EnumeratedMeasure at_law(Oracle& o, const Couplings& c, const BoundaryCondition& bc1,
                                const BoundaryCondition& bc2) {
  const Region& r = o.region();
  const LayerTables& t1 = o.layer(bc1);
  const LayerTables& t2 = o.layer(bc2);
  if (t1.scheme.free_sites.size() + t2.scheme.free_sites.size() > 24)
    throw CapExceeded("at_law: joint spin space too large to materialize");
  const int V = r.num_vertices();
  MeasureBuilder b(spin_pair_space(r));
  for (size_t i = 0; i < t1.states(); ++i) {
    for (size_t j = 0; j < t2.states(); ++j) {
      double lw = -2 * (c.K + c.Kpp) * t1.es_count[i] - 2 * (c.Kp + c.Kpp) * t2.es_count[j] +
                  4 * c.Kpp * popcount64(t1.es_mask[i] & t2.es_mask[j]);
      b.add_log(t1.spin_mask[i] | (t2.spin_mask[j] << V), lw);
    }
  }
  return b.finish();
}

// ---------------------------------------------------------------------------
// Full joint law of (s, s', ω); key = s1 | s2 << V | ω << 2V. Tiny regions only.

inline EnumeratedMeasure joint_law(Oracle& o, const Couplings& c, const BoundaryCondition& bc1,
                                   const BoundaryCondition& bc2) {
  const Region& r = o.region();
  const int fill = bc1.gat_fill();
  const LayerTables& t1 = o.layer(bc1);
  const LayerTables& t2 = o.layer(bc2);
  const int E = r.num_edges(), V = r.num_vertices();
  if (2 * V + E > 63) throw CapExceeded("joint_law: key space exceeds 63 bits");
  if (t1.scheme.free_sites.size() + t2.scheme.free_sites.size() + E > 24)
    throw CapExceeded("joint_law: state space too large to materialize");
  const uint64_t full = E == 64 ? ~0ull : ((1ull << E) - 1);
  MeasureBuilder b(joint_space(r, fill));
  for (size_t i = 0; i < t1.states(); ++i) {
    uint64_t allowed = full & ~t1.es_mask[i];
    for (size_t j = 0; j < t2.states(); ++j) {
      uint64_t key_sp = t1.spin_mask[i] | (t2.spin_mask[j] << V);
      uint64_t omega = allowed;
      for (;;) {
        double lw = joint_log_weight(r, c, t1.spin_mask[i], t2.spin_mask[j], omega);
        b.add_log(key_sp | (omega << (2 * V)), lw);
        if (omega == 0) break;
        omega = (omega - 1) & allowed;
      }
    }
  }
  return b.finish();
}

// ω-marginal of the joint law, computed without cluster counting: the number
// of admissible first layers is counted by explicit enumeration. This is the
// independent route the closed-form law is checked against.
inline EnumeratedMeasure joint_omega_marginal(Oracle& o, const Couplings& c, const BoundaryCondition& bc1,
                                              const BoundaryCondition& bc2) {
  const Region& r = o.region();
  const int fill = bc1.gat_fill();
  const LayerTables& t1 = o.layer(bc1);
  const LayerTables& t2 = o.layer(bc2);
  const int E = r.num_edges();
  if (E > kMaxEnumEdges) throw CapExceeded("joint_omega_marginal: |E| > cap");
  const uint64_t full = (1ull << E) - 1;
  const size_t n = 1ull << E;

  std::vector<uint32_t> count_s(n, 0);
  for (size_t i = 0; i < t1.states(); ++i) {
    uint64_t allowed = full & ~t1.es_mask[i];
    uint64_t m = allowed;
    for (;;) {
      ++count_s[m];
      if (m == 0) break;
      m = (m - 1) & allowed;
    }
  }

  double u1 = std::expm1(2 * (c.K - c.Kpp)), w1 = std::expm1(2 * (c.K + c.Kpp));
  if (c.K < std::abs(c.Kpp)) throw std::invalid_argument("joint_omega_marginal: need K >= |K''|");
  detail::check_linear_range(E * std::log(std::max({u1, w1, 1.0})) + 2 * std::abs(c.Kpp - c.Kp) * E);
  auto u1p = detail::pow_table(u1, E), w1p = detail::pow_table(w1, E);
  std::vector<double> a2(t2.states());
  for (size_t j = 0; j < t2.states(); ++j) a2[j] = std::exp(2 * (c.Kpp - c.Kp) * t2.es_count[j]);

  DenseAccumulator acc(omega_space(r, fill), n);
  for (size_t w = 0; w < n; ++w) {
    if (count_s[w] == 0) continue;
    int total = popcount64(w);
    KahanSum inner;
    for (size_t j = 0; j < t2.states(); ++j) {
      int c1 = popcount64(w & t2.es_mask[j]);
      inner.add(a2[j] * u1p[c1] * w1p[total - c1]);
    }
    acc.add(w, count_s[w] * inner.value());
  }
  return acc.finish();
}

// ---------------------------------------------------------------------------
// Closed-form graphical-representation law, both branches.

inline EnumeratedMeasure gat_law(Oracle& o, const Couplings& c, int fill, const BoundaryCondition& bc2) {
  const Region& r = o.region();
  if (fill != 0 && fill != 1) throw std::invalid_argument("gat_law: fill must be 0 or 1");
  if (c.K < std::abs(c.Kpp)) throw std::invalid_argument("gat_law: need K >= |K''|");
  const LayerTables& t2 = o.layer(bc2);
  const auto& k = o.k_table(fill);
  const int E = r.num_edges();
  const size_t n = 1ull << E;
  GatWeights w = gat_weights(c);
  MeasureBuilder b(omega_space(r, fill));
  if (!w.degenerate) {
    detail::check_linear_range(E * std::log(std::max({w.w2, w.w3, 1.0})));
    // Inner sum over s' by (|E_{s'}|, |E_{s'} ∩ ω|) via a 2D table.
    std::vector<std::array<double, 65>> tab(E + 1);
    for (int tot = 0; tot <= E; ++tot)
      for (int c1 = 0; c1 <= tot; ++c1) tab[tot][c1] = ipow(w.w2, tot - c1) * ipow(w.w3, c1);
    for (size_t om = 0; om < n; ++om) {
      KahanSum inner;
      for (size_t j = 0; j < t2.states(); ++j) {
        int c1 = popcount64(om & t2.es_mask[j]);
        inner.add(tab[t2.es_count[j]][c1]);
      }
      double lw = popcount64(om) * w.log_w1 + k[om] * std::numbers::ln2 + std::log(inner.value());
      b.add_log(om, lw);
    }
  } else {
    // K + K'' = 0: weight (e^{4K}-1)^{|ω|} 2^{k_Λ(ω)} Σ_{s': E_{s'} ⊇ ω} e^{-2(K+K')|E_{s'}|}.
    double lf = std::log(std::expm1(4 * c.K));
    for (size_t om = 0; om < n; ++om) {
      int no = popcount64(om);
      if (no > 0 && lf == -std::numeric_limits<double>::infinity()) continue;
      KahanSum inner;
      for (size_t j = 0; j < t2.states(); ++j) {
        if ((om & ~t2.es_mask[j]) == 0) inner.add(std::exp(-2 * (c.K + c.Kp) * t2.es_count[j]));
      }
      if (inner.value() <= 0) continue;
      double lw = (no == 0 ? 0.0 : no * lf) + k[om] * std::numbers::ln2 + std::log(inner.value());
      b.add_log(om, lw);
    }
  }
  return b.finish();
}

// Independent FK-Ising oracle: ∝ p^{|ω|} (1-p)^{|E|-|ω|} 2^{k_Λ(ω)}, with its
// own breadth-first cluster recount (no shared union-find path).
inline EnumeratedMeasure fk_ising_law(const Region& r, double p_edge, int fill) {
  const int E = r.num_edges();
  if (E > kMaxEnumEdges) throw CapExceeded("fk_ising_law: |E| > cap");
  const int V = r.num_vertices();
  auto bfs_clusters = [&](uint64_t om) {
    std::vector<int> comp(V + 1, -1);
    std::vector<std::vector<int>> adj(V + 1);
    for (int e = 0; e < E; ++e) {
      if ((om >> e) & 1) {
        adj[r.edge(e).u].push_back(r.edge(e).v);
        adj[r.edge(e).v].push_back(r.edge(e).u);
      }
    }
    if (fill == 1) {
      // Fill edges and contacts reconstructed from coordinates.
      for (int i = 0; i < V; ++i) {
        if (r.in_lambda(i)) continue;
        bool contact = false;
        for (int a = 0; a < r.dim; ++a) {
          for (int s : {-1, +1}) {
            Coord nb = r.vertex(i);
            nb[a] += s;
            int j = r.vertex_index(nb);
            if (j < 0)
              contact = true;
            else if (!r.in_lambda(j)) {
              adj[i].push_back(j);
              adj[j].push_back(i);
            }
          }
        }
        if (contact) {
          adj[i].push_back(V);
          adj[V].push_back(i);
        }
      }
    }
    int nc = 0;
    std::vector<int> stack;
    for (int i = 0; i < V; ++i) {
      if (comp[i] >= 0) continue;
      ++nc;
      comp[i] = nc;
      stack.push_back(i);
      while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int u : adj[v])
          if (comp[u] < 0) {
            comp[u] = nc;
            stack.push_back(u);
          }
      }
    }
    return nc;
  };
  MeasureBuilder b(omega_space(r, fill));
  for (uint64_t om = 0; om < (1ull << E); ++om) {
    int no = popcount64(om);
    double lw = no * std::log(p_edge) + (E - no) * std::log1p(-p_edge) + bfs_clusters(om) * std::numbers::ln2;
    b.add_log(om, lw);
  }
  return b.finish();
}

// ---------------------------------------------------------------------------
// Correlation = connection

struct CorrConnRow {
  int x, y;  // closure vertex indices; y = -1 for the one-point row
  double lhs, rhs;
};
struct CorrConnReport {
  std::vector<CorrConnRow> rows;
  double max_gap = 0;
};

inline CorrConnReport correlation_equals_connection(Oracle& o, const Couplings& c, const BoundaryCondition& bc1,
                                                    const BoundaryCondition& bc2) {
  const Region& r = o.region();
  const LayerTables& t1 = o.layer(bc1);
  const LayerTables& t2 = o.layer(bc2);
  std::vector<int> lambda;
  for (int i = 0; i < r.num_vertices(); ++i)
    if (r.in_lambda(i)) lambda.push_back(i);
  std::vector<std::pair<int, int>> pairs;
  for (size_t a = 0; a < lambda.size(); ++a)
    for (size_t b = a + 1; b < lambda.size(); ++b) pairs.emplace_back(lambda[a], lambda[b]);

  // Spin side: stream states, Kahan accumulators, max-log normalization.
  double max_lw = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < t1.states(); ++i)
    for (size_t j = 0; j < t2.states(); ++j)
      max_lw = std::max(max_lw, -2 * (c.K + c.Kpp) * t1.es_count[i] - 2 * (c.Kp + c.Kpp) * t2.es_count[j] +
                                    4 * c.Kpp * popcount64(t1.es_mask[i] & t2.es_mask[j]));
  KahanSum z;
  std::vector<KahanSum> two(pairs.size());
  std::vector<KahanSum> one(lambda.size());
  for (size_t i = 0; i < t1.states(); ++i) {
    uint64_t s = t1.spin_mask[i];
    for (size_t j = 0; j < t2.states(); ++j) {
      double w = std::exp(-2 * (c.K + c.Kpp) * t1.es_count[i] - 2 * (c.Kp + c.Kpp) * t2.es_count[j] +
                          4 * c.Kpp * popcount64(t1.es_mask[i] & t2.es_mask[j]) - max_lw);
      z.add(w);
      for (size_t p = 0; p < pairs.size(); ++p) {
        int prod = (((s >> pairs[p].first) ^ (s >> pairs[p].second)) & 1) ? -1 : +1;
        two[p].add(w * prod);
      }
      for (size_t q = 0; q < lambda.size(); ++q) one[q].add(w * (((s >> lambda[q]) & 1) ? +1 : -1));
    }
  }

  // Percolation side: connection probabilities under the closed-form law.
  int fill = bc1.gat_fill();
  EnumeratedMeasure gat = gat_law(o, c, fill, bc2);
  std::vector<KahanSum> conn(pairs.size());
  std::vector<KahanSum> conn_out(lambda.size());
  for (size_t idx = 0; idx < gat.size(); ++idx) {
    EdgeConfig om = EdgeConfig::from_mask(gat.keys[idx], r.num_edges(), fill);
    auto roots = r.component_roots(om);
    for (size_t p = 0; p < pairs.size(); ++p)
      if (roots[pairs[p].first] == roots[pairs[p].second]) conn[p].add(gat.prob[idx]);
    if (fill == 1) {
      for (size_t q = 0; q < lambda.size(); ++q)
        if (roots[lambda[q]] == roots[r.num_vertices()]) conn_out[q].add(gat.prob[idx]);
    }
  }

  CorrConnReport rep;
  for (size_t p = 0; p < pairs.size(); ++p) {
    CorrConnRow row{pairs[p].first, pairs[p].second, two[p].value() / z.value(), conn[p].value()};
    rep.max_gap = std::max(rep.max_gap, std::abs(row.lhs - row.rhs));
    rep.rows.push_back(row);
  }
  if (fill == 1) {
    for (size_t q = 0; q < lambda.size(); ++q) {
      CorrConnRow row{lambda[q], -1, one[q].value() / z.value(), conn_out[q].value()};
      rep.max_gap = std::max(rep.max_gap, std::abs(row.lhs - row.rhs));
      rep.rows.push_back(row);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Strong finite energy: conditional single-edge probabilities against the
// two-sided bounds; lower bound read as 0 when w3 = 0.

struct FiniteEnergyReport {
  double lower = 0, upper = 1;
  double min_slack = std::numeric_limits<double>::infinity();
  int contexts = 0;
};

inline FiniteEnergyReport finite_energy_check(Oracle& o, const Couplings& c, int fill,
                                              const BoundaryCondition& bc2) {
  if (c.K + c.Kpp <= 0) throw std::invalid_argument("finite_energy_check: need K + K'' > 0");
  const Region& r = o.region();
  GatWeights w = gat_weights(c);
  FiniteEnergyReport rep;
  rep.upper = 1.0 / (1.0 + (1.0 / w.w1) * std::min(1.0, w.w2) / std::max(1.0, w.w3));
  rep.lower = w.w3 == 0 ? 0.0 : 1.0 / (1.0 + (1.0 / w.w1) * 2.0 * std::max(1.0, w.w2) / std::min(1.0, w.w3));
  EnumeratedMeasure gat = gat_law(o, c, fill, bc2);
  const int E = r.num_edges();
  std::vector<double> table(1ull << E, 0.0);
  for (size_t i = 0; i < gat.size(); ++i) table[gat.keys[i]] = gat.prob[i];
  for (int e = 0; e < E; ++e) {
    uint64_t bit = 1ull << e;
    for (uint64_t ctx = 0; ctx < (1ull << E); ++ctx) {
      if (ctx & bit) continue;
      double w_open = table[ctx | bit], w_closed = table[ctx];
      double denom = w_open + w_closed;
      if (denom <= 0) continue;
      double p = w_open / denom;
      rep.min_slack = std::min(rep.min_slack, std::min(p - rep.lower, rep.upper - p));
      ++rep.contexts;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// FKG lattice condition on pairs differing at exactly two edges.

struct FkgReport {
  bool regime = false;            // §-restrictions hold, so the check must pass
  double worst_margin = std::numeric_limits<double>::infinity();  // relative
  uint64_t worst_omega = 0;
  int worst_e = -1, worst_f = -1;
};

inline FkgReport fkg_lattice_check(Oracle& o, const Couplings& c, int fill, const BoundaryCondition& bc2) {
  const Region& r = o.region();
  FkgReport rep;
  rep.regime = regime_predicates(c).gat_fkg;
  EnumeratedMeasure gat = gat_law(o, c, fill, bc2);
  const int E = r.num_edges();
  std::vector<double> table(1ull << E, 0.0);
  for (size_t i = 0; i < gat.size(); ++i) table[gat.keys[i]] = gat.prob[i];
  for (uint64_t om = 0; om < (1ull << E); ++om) {
    for (int e = 0; e < E; ++e) {
      if (om & (1ull << e)) continue;
      for (int f = e + 1; f < E; ++f) {
        if (om & (1ull << f)) continue;
        double ab = table[om | (1ull << e) | (1ull << f)] * table[om];
        double cd = table[om | (1ull << e)] * table[om | (1ull << f)];
        if (ab == 0.0 && cd == 0.0) continue;
        double margin = (ab - cd) / std::max({ab, cd, 1e-300});
        if (margin < rep.worst_margin) {
          rep.worst_margin = margin;
          rep.worst_omega = om;
          rep.worst_e = e;
          rep.worst_f = f;
        }
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Griffiths' first inequality: ⟨s^A⟩ = GAT^{1,+}[κ_A] ≥ 0, where κ_A asks
// every finite cluster to contain an even number of vertices of A.

struct GriffithsReport {
  double spin_side = 0, percolation_side = 0;
  double gap() const { return std::abs(spin_side - percolation_side); }
};

inline GriffithsReport griffiths_check(Oracle& o, double J, double Jp, double U, const std::vector<int>& a_raw) {
  const Region& r = o.region();
  // Multiset collapse: vertices appearing an even number of times drop out.
  std::map<int, int> mult;
  for (int v : a_raw) mult[v] ^= 1;
  std::vector<int> A;
  for (auto& [v, m] : mult)
    if (m) A.push_back(v);
  Couplings c;
  if (J >= std::abs(U))
    c = Couplings::jju(J, Jp, U);
  else if (J >= std::abs(Jp))
    c = Couplings::jju(J, Jp, U).apply(CouplingPermutation{{0, 2, 1}, {1, 1, 1}});
  else
    throw std::invalid_argument("griffiths_check: need J >= min{|J'|, |U|}");

  GriffithsReport rep;
  const LayerTables& t1 = o.layer(BoundaryCondition::plus());
  const LayerTables& t2 = o.layer(BoundaryCondition::plus());
  double max_lw = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < t1.states(); ++i)
    for (size_t j = 0; j < t2.states(); ++j)
      max_lw = std::max(max_lw, -2 * (c.K + c.Kpp) * t1.es_count[i] - 2 * (c.Kp + c.Kpp) * t2.es_count[j] +
                                    4 * c.Kpp * popcount64(t1.es_mask[i] & t2.es_mask[j]));
  KahanSum z, num;
  for (size_t i = 0; i < t1.states(); ++i) {
    int prod = +1;
    for (int v : A) prod *= ((t1.spin_mask[i] >> v) & 1) ? +1 : -1;
    for (size_t j = 0; j < t2.states(); ++j) {
      double w = std::exp(-2 * (c.K + c.Kpp) * t1.es_count[i] - 2 * (c.Kp + c.Kpp) * t2.es_count[j] +
                          4 * c.Kpp * popcount64(t1.es_mask[i] & t2.es_mask[j]) - max_lw);
      z.add(w);
      num.add(w * prod);
    }
  }
  rep.spin_side = num.value() / z.value();

  EnumeratedMeasure gat = gat_law(o, c, 1, BoundaryCondition::plus());
  KahanSum ev;
  const int V = r.num_vertices();
  for (size_t idx = 0; idx < gat.size(); ++idx) {
    EdgeConfig om = EdgeConfig::from_mask(gat.keys[idx], r.num_edges(), 1);
    auto roots = r.component_roots(om);
    int outer_root = roots[V];
    std::map<int, int> parity_by_root;
    for (int v : A)
      if (roots[v] != outer_root) parity_by_root[roots[v]] ^= 1;
    bool ok = true;
    for (auto& [_, par] : parity_by_root)
      if (par) ok = false;
    if (ok) ev.add(gat.prob[idx]);
  }
  rep.percolation_side = ev.value();
  return rep;
}

// ---------------------------------------------------------------------------
// Pair coupling of graphical representations: marginals (streamed) and, on
// very small regions, the materialized pair law. Key for the pair law:
// ω | ω' << E.

struct AtrcMarginals {
  EnumeratedMeasure first, second;
};

inline AtrcMarginals atrc_marginals(Oracle& o, const Couplings& c, int fill1, int fill2, int threads = 0) {
  const Region& r = o.region();
  const int E = r.num_edges();
  if (E > 12) throw CapExceeded("atrc_marginals: |E| > 12");
  AtrcWeights u = atrc_weights(c);
  if (u.u1 < 0 || u.u2 < 0 || u.u3 < 0)
    throw std::invalid_argument("atrc_marginals: weights must be non-negative (FKG-compatible couplings)");
  detail::check_linear_range(E * std::log(std::max({u.u1, u.u2, u.u3, 1.0})));
  auto u1p = detail::pow_table(u.u1, E), u2p = detail::pow_table(u.u2, E), u3p = detail::pow_table(u.u3, E);
  const auto& k1 = o.k_table(fill1);
  const auto& k2 = o.k_table(fill2);
  auto p2 = detail::pow_table(2.0, 2 * (r.num_vertices() + 1));
  const size_t n = 1ull << E;

  struct Acc {
    std::vector<double> m1, m2;
  };
  Acc init;
  init.m1.assign(n, 0.0);
  init.m2.assign(n, 0.0);
  Acc total = parallel_block_reduce<Acc>(
      n, init,
      [&](uint64_t lo, uint64_t hi, Acc& acc) {
        for (uint64_t om = lo; om < hi; ++om) {
          double base = p2[k1[om]];
          for (uint64_t op = 0; op < n; ++op) {
            double w = base * u1p[popcount64(om & ~op)] * u2p[popcount64(op & ~om)] *
                       u3p[popcount64(om & op)] * p2[k2[op]];
            acc.m1[om] += w;
            acc.m2[op] += w;
          }
        }
      },
      [&](Acc& a, const Acc& b) {
        for (size_t i = 0; i < n; ++i) {
          a.m1[i] += b.m1[i];
          a.m2[i] += b.m2[i];
        }
      },
      threads, 1024);

  AtrcMarginals out{EnumeratedMeasure{}, EnumeratedMeasure{}};
  DenseAccumulator d1(omega_space(r, fill1), n), d2(omega_space(r, fill2), n);
  for (size_t i = 0; i < n; ++i) {
    d1.at(i) = total.m1[i];
    d2.at(i) = total.m2[i];
  }
  out.first = d1.finish();
  out.second = d2.finish();
  return out;
}

inline EnumeratedMeasure atrc_law(Oracle& o, const Couplings& c, int fill1, int fill2) {
  const Region& r = o.region();
  const int E = r.num_edges();
  if (2 * E > 24) throw CapExceeded("atrc_law: pair space too large to materialize");
  AtrcWeights u = atrc_weights(c);
  const auto& k1 = o.k_table(fill1);
  const auto& k2 = o.k_table(fill2);
  MeasureBuilder b("atrc[" + region_signature(r) + ",#=" + std::to_string(fill1) + std::to_string(fill2) + "]");
  const size_t n = 1ull << E;
  auto logpow = [](double base, int c) {
    if (c == 0) return 0.0;
    return base > 0 ? c * std::log(base) : -std::numeric_limits<double>::infinity();
  };
  for (uint64_t om = 0; om < n; ++om) {
    for (uint64_t op = 0; op < n; ++op) {
      double lw = logpow(u.u1, popcount64(om & ~op)) + logpow(u.u2, popcount64(op & ~om)) +
                  logpow(u.u3, popcount64(om & op)) + (k1[om] + k2[op]) * std::numbers::ln2;
      b.add_log(om | (op << E), lw);
    }
  }
  return b.finish();
}

// ---------------------------------------------------------------------------
// Russo-type inequality data along a one-parameter family of couplings.

struct RussoPoint {
  double derivative;   // centered finite difference of E[X]
  double covariance;   // Cov(X, |ω_E|) at the midpoint
  double epsilon;      // caller-provided infimum of d/dβ log w1
  double lhs() const { return derivative; }
  double rhs() const { return epsilon * covariance; }
};

template <typename CurveFn, typename XFn>
bool x_is_increasing(const Region& r, CurveFn&&, XFn&& x) {
  const int E = r.num_edges();
  for (uint64_t om = 0; om < (1ull << E); ++om)
    for (int e = 0; e < E; ++e)
      if (!(om & (1ull << e)) && x(om | (1ull << e)) < x(om)) return false;
  return true;
}

template <typename CurveFn, typename XFn>
RussoPoint russo_check(Oracle& o, CurveFn&& curve, double beta, XFn&& x, double eps, double h = 1e-4,
                       bool verify_increasing = true) {
  const Region& r = o.region();
  if (verify_increasing) {
    const int E = r.num_edges();
    for (uint64_t om = 0; om < (1ull << E); ++om)
      for (int e = 0; e < E; ++e)
        if (!(om & (1ull << e)) && x(om | (1ull << e)) < x(om))
          throw std::invalid_argument("russo_check: X is not increasing");
  }
  auto mean_x = [&](double b) {
    EnumeratedMeasure m = gat_law(o, curve(b), 1, BoundaryCondition::free_bc());
    return m.expectation([&](uint64_t k) { return x(k); });
  };
  RussoPoint p{};
  p.derivative = (mean_x(beta + h) - mean_x(beta - h)) / (2 * h);
  EnumeratedMeasure m = gat_law(o, curve(beta), 1, BoundaryCondition::free_bc());
  double ex = m.expectation([&](uint64_t k) { return x(k); });
  double eo = m.expectation([&](uint64_t k) { return static_cast<double>(popcount64(k)); });
  KahanSum cov;
  for (size_t i = 0; i < m.size(); ++i)
    cov.add(m.prob[i] * (x(m.keys[i]) - ex) * (popcount64(m.keys[i]) - eo));
  p.covariance = cov.value();
  p.epsilon = eps;
  return p;
}

}  // namespace atlab
