#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "atlab/lattice.hpp"

namespace atlab {

// Boundary condition for one spin layer. Plus/Minus/Alternating/Explicit fix
// the layer on Λ̄∖Λ (and conceptually off Λ̄); Free leaves Λ̄∖Λ unconstrained
// and is +1 off Λ̄, so interactions always run over the same edge set Ē_Λ.
struct BoundaryCondition {
  enum Kind { kPlus, kMinus, kFree, kAlternating, kExplicit } kind = kPlus;
  std::vector<int8_t> values;  // explicit values per closure vertex (used off Λ)

  static BoundaryCondition plus() { return {kPlus, {}}; }
  static BoundaryCondition minus() { return {kMinus, {}}; }
  static BoundaryCondition free_bc() { return {kFree, {}}; }
  static BoundaryCondition alternating() { return {kAlternating, {}}; }
  static BoundaryCondition explicit_bc(std::vector<int8_t> v) { return {kExplicit, std::move(v)}; }

  bool fixes_closure() const { return kind != kFree; }

  // Forced value at closure vertex i, or 0 if the site is free under this
  // boundary condition (sites of Λ are always free).
  int forced(const Region& r, int i) const {
    if (r.in_lambda(i)) return 0;
    switch (kind) {
      case kPlus: return +1;
      case kMinus: return -1;
      case kFree: return 0;
      case kAlternating: return r.parity(i) == 0 ? +1 : -1;
      case kExplicit: return values.at(i);
    }
    return 0;
  }

  // # = 1{η = +}; the graphical representation is defined for η ∈ {+, f}.
  int gat_fill() const {
    if (kind == kPlus) return 1;
    if (kind == kFree) return 0;
    throw std::invalid_argument("graphical representation: first-layer boundary must be + or f");
  }

  std::string name() const {
    switch (kind) {
      case kPlus: return "+";
      case kMinus: return "-";
      case kFree: return "f";
      case kAlternating: return "alt";
      case kExplicit: return "explicit";
    }
    return "?";
  }
};

// One ±1 layer over Λ̄, bit-packed (+1 ↦ 1).
struct SpinLayer {
  std::vector<uint64_t> words;
  int n = 0;

  static SpinLayer constant(int n, int value) {
    SpinLayer s;
    s.n = n;
    s.words.assign((n + 63) / 64, value > 0 ? ~0ull : 0ull);
    return s;
  }
  int get(int i) const { return ((words[i >> 6] >> (i & 63)) & 1) ? +1 : -1; }
  void set(int i, int v) {
    uint64_t b = 1ull << (i & 63);
    if (v > 0)
      words[i >> 6] |= b;
    else
      words[i >> 6] &= ~b;
  }
  void flip(int i) { words[i >> 6] ^= 1ull << (i & 63); }
  uint64_t low64() const { return words.empty() ? 0 : words[0]; }
};

struct SpinPair {
  const Region* region = nullptr;
  SpinLayer s1, s2;
  BoundaryCondition bc1, bc2;

  static SpinPair make(const Region& r, BoundaryCondition b1, BoundaryCondition b2) {
    SpinPair p;
    p.region = &r;
    p.bc1 = std::move(b1);
    p.bc2 = std::move(b2);
    p.s1 = SpinLayer::constant(r.num_vertices(), +1);
    p.s2 = SpinLayer::constant(r.num_vertices(), +1);
    p.apply_boundary();
    return p;
  }

  void apply_boundary() {
    for (int i = 0; i < region->num_vertices(); ++i) {
      if (int v = bc1.forced(*region, i); v != 0) s1.set(i, v);
      if (int v = bc2.forced(*region, i); v != 0) s2.set(i, v);
    }
  }

  bool boundary_consistent() const {
    for (int i = 0; i < region->num_vertices(); ++i) {
      if (int v = bc1.forced(*region, i); v != 0 && s1.get(i) != v) return false;
      if (int v = bc2.forced(*region, i); v != 0 && s2.get(i) != v) return false;
    }
    return true;
  }
};

// E_s over Ē_Λ.
inline EdgeConfig disagreement_edges(const Region& r, const SpinLayer& s) {
  EdgeConfig d = EdgeConfig::make(r.num_edges(), 0);
  for (int e = 0; e < r.num_edges(); ++e) {
    const auto& ed = r.edge(e);
    if (s.get(ed.u) != s.get(ed.v)) d.set(e, true);
  }
  return d;
}

// F_A: flip on a vertex subset (indices into Λ̄).
inline SpinLayer spin_flip(const SpinLayer& s, const std::vector<int>& a) {
  SpinLayer t = s;
  for (int i : a) t.flip(i);
  return t;
}

inline std::vector<int> odd_sites(const Region& r) {
  std::vector<int> a;
  for (int i = 0; i < r.num_vertices(); ++i)
    if (r.parity(i) == 1) a.push_back(i);
  return a;
}

// Permutation (with signs) of (K, K', K'') induced by a change of variables:
// new[i] = sign[i] * old[source[i]].
struct CouplingPermutation {
  std::array<int, 3> source{0, 1, 2};
  std::array<int, 3> sign{+1, +1, +1};

  CouplingPermutation then(const CouplingPermutation& next) const {
    CouplingPermutation out;
    for (int i = 0; i < 3; ++i) {
      out.source[i] = source[next.source[i]];
      out.sign[i] = next.sign[i] * sign[next.source[i]];
    }
    return out;
  }
};

enum class ChangeOfVariables {
  kKeep,             // (s, s'), identity
  kProductSecond,    // (s, ss'), (K, K', K'') -> (K, K'', K')
  kProductFirstSwap  // (ss', s), (K, K', K'') -> (K'', K, K')
};

namespace detail {
inline BoundaryCondition bc_product(const Region& r, const BoundaryCondition& a, const BoundaryCondition& b) {
  if (a.kind == BoundaryCondition::kFree && b.kind == BoundaryCondition::kFree) return BoundaryCondition::free_bc();
  if (a.kind == BoundaryCondition::kFree || b.kind == BoundaryCondition::kFree)
    throw std::invalid_argument("change_of_variables: product of free with fixed boundary is undefined");
  std::vector<int8_t> v(r.num_vertices(), 1);
  for (int i = 0; i < r.num_vertices(); ++i) {
    if (!r.in_lambda(i)) v[i] = static_cast<int8_t>(a.forced(r, i) * b.forced(r, i));
  }
  return BoundaryCondition::explicit_bc(std::move(v));
}
}  // namespace detail

inline std::pair<SpinPair, CouplingPermutation> change_of_variables(const SpinPair& p, ChangeOfVariables mode) {
  const Region& r = *p.region;
  SpinPair out = p;
  CouplingPermutation perm;
  auto product_layer = [&]() {
    SpinLayer prod = p.s1;
    for (size_t w = 0; w < prod.words.size(); ++w) prod.words[w] = ~(p.s1.words[w] ^ p.s2.words[w]);
    return prod;  // +1 where layers agree
  };
  switch (mode) {
    case ChangeOfVariables::kKeep:
      break;
    case ChangeOfVariables::kProductSecond:
      out.s2 = product_layer();
      out.bc2 = detail::bc_product(r, p.bc1, p.bc2);
      perm.source = {0, 2, 1};
      break;
    case ChangeOfVariables::kProductFirstSwap:
      out.s1 = product_layer();
      out.s2 = p.s1;
      out.bc1 = detail::bc_product(r, p.bc1, p.bc2);
      out.bc2 = p.bc1;
      perm.source = {2, 0, 1};
      break;
  }
  return {out, perm};
}

// Flipping one layer on the odd sublattice negates its pair coupling and the
// four-spin coupling (bipartiteness).
inline std::pair<SpinPair, CouplingPermutation> flip_odd_layer(const SpinPair& p, int layer) {
  const Region& r = *p.region;
  auto odd = odd_sites(r);
  SpinPair out = p;
  CouplingPermutation perm;
  auto flip_bc = [&](const BoundaryCondition& bc) {
    if (bc.kind == BoundaryCondition::kFree) return bc;
    std::vector<int8_t> v(r.num_vertices(), 1);
    for (int i = 0; i < r.num_vertices(); ++i)
      if (!r.in_lambda(i)) v[i] = static_cast<int8_t>(bc.forced(r, i) * (r.parity(i) == 1 ? -1 : +1));
    // Recognize the common cases so downstream fill detection keeps working.
    bool all_plus = true, all_alt = true;
    for (int i = 0; i < r.num_vertices(); ++i) {
      if (r.in_lambda(i)) continue;
      if (v[i] != 1) all_plus = false;
      if (v[i] != (r.parity(i) == 0 ? 1 : -1)) all_alt = false;
    }
    if (all_plus) return BoundaryCondition::plus();
    if (all_alt) return BoundaryCondition::alternating();
    return BoundaryCondition::explicit_bc(std::move(v));
  };
  if (layer == 1) {
    out.s1 = spin_flip(p.s1, odd);
    out.bc1 = flip_bc(p.bc1);
    perm.sign = {-1, +1, -1};
  } else {
    out.s2 = spin_flip(p.s2, odd);
    out.bc2 = flip_bc(p.bc2);
    perm.sign = {+1, -1, -1};
  }
  return {out, perm};
}

}  // namespace atlab
