#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "atlab/spins.hpp"

namespace atlab {

// Coupling triple (K, K', K'') plus the (signed) permutation tying it back to
// the original roles (J, J', U): K_i = role_sign[i] * (J,J',U)[role_source[i]].
struct Couplings {
  double K = 0, Kp = 0, Kpp = 0;
  std::array<int, 3> role_source{0, 1, 2};
  std::array<int, 3> role_sign{+1, +1, +1};

  static Couplings jju(double J, double Jp, double U) { return {J, Jp, U, {0, 1, 2}, {1, 1, 1}}; }
  static Couplings iso(double J, double U) { return jju(J, J, U); }

  Couplings apply(const CouplingPermutation& perm) const {
    std::array<double, 3> old{K, Kp, Kpp};
    Couplings out = *this;
    std::array<double, 3> neu;
    for (int i = 0; i < 3; ++i) {
      neu[i] = perm.sign[i] * old[perm.source[i]];
      out.role_source[i] = role_source[perm.source[i]];
      out.role_sign[i] = perm.sign[i] * role_sign[perm.source[i]];
    }
    out.K = neu[0];
    out.Kp = neu[1];
    out.Kpp = neu[2];
    return out;
  }

  // Recover (J, J', U).
  std::array<double, 3> original_roles() const {
    std::array<double, 3> orig{};
    std::array<double, 3> cur{K, Kp, Kpp};
    for (int i = 0; i < 3; ++i) orig[role_source[i]] = role_sign[i] * cur[i];
    return orig;
  }
};

// Edge densities of the conditional sampling rule; need K >= |K''|.
struct EdgeDensities {
  double p1, p2;
};
inline EdgeDensities sampling_densities(const Couplings& c) {
  if (c.K < std::abs(c.Kpp)) throw std::invalid_argument("sampling densities: need K >= |K''|");
  return {-std::expm1(-2 * (c.K - c.Kpp)), -std::expm1(-2 * (c.K + c.Kpp))};
}

struct GatWeights {
  double w1, w2, w3;
  bool degenerate;  // K + K'' == 0: closed-form law uses its dedicated branch
  double log_w1, log_w2, log_w3;
};

inline GatWeights gat_weights(const Couplings& c) {
  if (c.K + c.Kpp < 0) throw std::invalid_argument("gat weights: need K + K'' >= 0");
  GatWeights w{};
  w.degenerate = (c.K + c.Kpp == 0.0);
  w.w1 = std::expm1(2 * (c.K + c.Kpp));
  w.w2 = std::exp(2 * (c.Kpp - c.Kp));
  w.log_w2 = 2 * (c.Kpp - c.Kp);
  if (w.degenerate) {
    w.w3 = 0.0;
    w.log_w1 = -std::numeric_limits<double>::infinity();
    w.log_w3 = -std::numeric_limits<double>::infinity();
    return w;
  }
  // w3 = e^{-2K'}(e^{2K} - e^{2K''}) / (e^{2(K+K'')} - 1), with e^{2K}-e^{2K''}
  // written through expm1 so K == K'' gives exactly 0.
  double num = -std::exp(2 * (c.K - c.Kp)) * std::expm1(2 * (c.Kpp - c.K));
  w.w3 = num / w.w1;
  w.log_w1 = 2 * (c.K + c.Kpp) + std::log1p(-std::exp(-2 * (c.K + c.Kpp)));
  w.log_w3 = w.w3 > 0 ? std::log(w.w3) : -std::numeric_limits<double>::infinity();
  return w;
}

struct AtrcWeights {
  double u1, u2, u3;
  double u3_hat;       // u3 / u1^2, NaN when undefined
  bool u3_hat_defined;  // false iff u1 == 0 (K == K'')
};

inline AtrcWeights atrc_weights(const Couplings& c) {
  AtrcWeights u{};
  u.u1 = std::expm1(2 * (c.K - c.Kpp));
  u.u2 = std::expm1(2 * (c.Kp - c.Kpp));
  u.u3 = std::exp(2 * (c.K + c.Kp)) - std::exp(2 * (c.K - c.Kpp)) - std::exp(2 * (c.Kp - c.Kpp)) + 1.0;
  u.u3_hat_defined = u.u1 != 0.0;
  u.u3_hat = u.u3_hat_defined ? u.u3 / (u.u1 * u.u1) : std::numeric_limits<double>::quiet_NaN();
  return u;
}

struct EightVertexWeights {
  double a, b, c, d;
};

inline EightVertexWeights eight_vertex_weights(const Couplings& c) {
  if (c.K < std::abs(c.Kpp)) throw std::invalid_argument("eight-vertex weights: need K >= |K''|");
  EightVertexWeights w{};
  w.a = std::expm1(2 * (c.K + c.Kpp));
  w.b = std::exp(-2 * c.Kp) * (std::exp(2 * c.K) + std::exp(2 * c.Kpp));
  w.c = w.a + 2.0;
  w.d = -std::exp(2 * (c.K - c.Kp)) * std::expm1(2 * (c.Kpp - c.K));
  return w;
}

// The same weights are non-staggered (a = b) exactly on the self-dual manifold.
inline bool non_staggered(const EightVertexWeights& w, double tol = 1e-10) {
  return std::abs(w.a - w.b) <= tol * std::max(1.0, std::max(std::abs(w.a), std::abs(w.b)));
}

struct RegimeFlags {
  bool af_fkg = false;       // min{J,J'} > 0 > U and tanh U >= -tanh J tanh J'
  bool gat_fkg = false;      // K >= K'', K > -K'', K' >= K'', tanh K'' >= -tanh K tanh K'
  bool iso_af_fkg = false;   // J = J' > 0 > U and cosh 2J >= e^{-2U}
  bool self_dual = false;    // J = J', |sinh 2J - e^{-2U}| <= 1e-10
  bool sampling_valid = false;  // K >= |K''|
};

inline RegimeFlags regime_predicates(const Couplings& c) {
  RegimeFlags f;
  auto [J, Jp, U] = c.original_roles();
  f.af_fkg = std::min(J, Jp) > 0 && U < 0 && std::tanh(U) >= -std::tanh(J) * std::tanh(Jp);
  f.gat_fkg = c.K >= c.Kpp && c.K > -c.Kpp && c.Kp >= c.Kpp &&
              std::tanh(c.Kpp) >= -std::tanh(c.K) * std::tanh(c.Kp);
  f.iso_af_fkg = (J == Jp) && J > 0 && U < 0 && std::cosh(2 * J) >= std::exp(-2 * U);
  f.self_dual = (J == Jp) && std::abs(std::sinh(2 * J) - std::exp(-2 * U)) <= 1e-10;
  f.sampling_valid = c.K >= std::abs(c.Kpp);
  return f;
}

// Everything in one place, mirroring the derived-weights record.
struct WeightSet {
  EdgeDensities p{};
  GatWeights w{};
  AtrcWeights u{};
  EightVertexWeights v{};
  RegimeFlags flags{};
};

inline WeightSet weight_set(const Couplings& c) {
  WeightSet s;
  s.flags = regime_predicates(c);
  if (s.flags.sampling_valid) {
    s.p = sampling_densities(c);
    s.v = eight_vertex_weights(c);
  } else {
    s.p = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    s.v = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
           std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  }
  if (c.K + c.Kpp >= 0) s.w = gat_weights(c);
  s.u = atrc_weights(c);
  return s;
}

}  // namespace atlab
