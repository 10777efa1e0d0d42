#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "atlab/lattice.hpp"
#include "atlab/spins.hpp"

namespace atlab {

struct HeightAssignment {
  std::vector<int> h_primal;  // over Λ̄
  std::vector<int> h_dual;    // over dual_all()
};

// Unique height function with gradients h_{x'} - h_x = σ•_x σ∘_{x'} across
// quads, pinned to `pinned_dual` on dual vertices outside Λ*. Throws if the
// gradients are inconsistent (ice rule violated) or some vertex is unreached.
// Validates both height-function axioms on every quad relation.
inline HeightAssignment heights_from_sigma(const Region& r, const DualGeometry& geom, const SpinLayer& sigma_bullet,
                                           const std::vector<int8_t>& sigma_circ, int pinned_dual) {
  const int NP = r.num_vertices(), ND = static_cast<int>(geom.dual_all().size());
  constexpr int kUnset = INT32_MIN;
  HeightAssignment out;
  out.h_primal.assign(NP, kUnset);
  out.h_dual.assign(ND, kUnset);

  std::vector<uint8_t> in_star(ND, 0);
  for (int e = 0; e < r.num_edges(); ++e) {
    const auto& q = geom.quad(e);
    for (int k = 0; k < 2; ++k)
      if (q.star[k] >= 0) in_star[q.all[k]] = 1;
  }
  for (int j = 0; j < ND; ++j)
    if (!in_star[j]) out.h_dual[j] = pinned_dual;

  bool progress = true;
  while (progress) {
    progress = false;
    for (int e = 0; e < r.num_edges(); ++e) {
      const auto& ed = r.edge(e);
      const auto& q = geom.quad(e);
      for (int pv : {ed.u, ed.v}) {
        int sb = sigma_bullet.get(pv);
        for (int k = 0; k < 2; ++k) {
          int dv = q.all[k];
          int inc = sb * sigma_circ[dv];  // h_dual - h_primal on this quad pair
          int& hp = out.h_primal[pv];
          int& hd = out.h_dual[dv];
          if (hd != kUnset && hp == kUnset) {
            hp = hd - inc;
            progress = true;
          } else if (hp != kUnset && hd == kUnset) {
            hd = hp + inc;
            progress = true;
          } else if (hp != kUnset && hd != kUnset && hd - hp != inc) {
            throw std::runtime_error("height construction: inconsistent gradients (ice rule violated)");
          }
        }
      }
    }
  }
  for (int i = 0; i < NP; ++i)
    if (out.h_primal[i] == kUnset) throw std::runtime_error("height construction: unreached primal vertex");
  for (int j = 0; j < ND; ++j)
    if (out.h_dual[j] == kUnset) throw std::runtime_error("height construction: unreached dual vertex");

  for (int i = 0; i < NP; ++i)
    if (((out.h_primal[i] % 2) + 2) % 2 == ((pinned_dual % 2) + 2) % 2)
      throw std::runtime_error("height axiom: primal value has the dual parity");
  for (int e = 0; e < r.num_edges(); ++e) {
    const auto& ed = r.edge(e);
    const auto& q = geom.quad(e);
    for (int pv : {ed.u, ed.v})
      for (int k = 0; k < 2; ++k)
        if (std::abs(out.h_primal[pv] - out.h_dual[q.all[k]]) != 1)
          throw std::runtime_error("height axiom: quad increment not ±1");
  }
  return out;
}

// Increments around a quad close up by construction; exposed for tests.
inline bool quad_increments_close(const Region& r, const DualGeometry& geom, const HeightAssignment& h) {
  for (int e = 0; e < r.num_edges(); ++e) {
    const auto& ed = r.edge(e);
    const auto& q = geom.quad(e);
    int a = h.h_dual[q.all[0]] - h.h_primal[ed.u];
    int b = h.h_primal[ed.v] - h.h_dual[q.all[0]];
    int c = h.h_dual[q.all[1]] - h.h_primal[ed.v];
    int d = h.h_primal[ed.u] - h.h_dual[q.all[1]];
    if (a + b + c + d != 0) return false;
  }
  return true;
}

}  // namespace atlab
