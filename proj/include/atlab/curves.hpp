#pragma once

#include <cmath>
#include <stdexcept>

#include "atlab/weights.hpp"

namespace atlab {

struct CurvePoint {
  double beta = 0;   // normalized coordinate in (0,1)
  double inner = 0;  // natural curve parameter (β̃, or t for the isotropic family)
  Couplings couplings;
  WeightSet weights;
};

// Curve family γ_{κ,κ'}: along it w2 ≡ κ and w3 ≡ κ', while w1 runs over
// (0,∞) as an increasing bijection of the normalized coordinate. The natural
// parameter β̃ lives on (β⁻, β⁺) with
//   γ̃(β̃) = ( ½ log((κ'-κ)/(κκ' e^{2β̃} - e^{-2β̃})), β̃, β̃ + ½ log κ ),
// and the normalized coordinate is β̃ = β⁺ - β (β⁺ - β⁻), which flips the
// orientation so that w1 increases in β.
class GammaCurve {
 public:
  GammaCurve(double kappa, double kappa_p) : kappa_(kappa), kappa_p_(kappa_p) {
    if (!(kappa > 0) || !(kappa < kappa_p) || !(kappa_p <= 1))
      throw std::invalid_argument("gamma curve: need 0 < kappa < kappa' <= 1");
  }

  double kappa() const { return kappa_; }
  double kappa_p() const { return kappa_p_; }
  double beta_minus() const { return -0.25 * std::log(kappa_ * kappa_p_); }
  double beta_plus() const { return -0.5 * std::log(kappa_); }
  double inner_from_unit(double beta) const {
    if (!(beta > 0) || !(beta < 1)) throw std::invalid_argument("gamma curve: beta must be in (0,1)");
    return beta_plus() - beta * (beta_plus() - beta_minus());
  }

  Couplings at_inner(double bt) const {
    if (!(bt > beta_minus()) || !(bt < beta_plus()))
      throw std::invalid_argument("gamma curve: inner coordinate out of (beta-, beta+)");
    double denom = kappa_ * kappa_p_ * std::exp(2 * bt) - std::exp(-2 * bt);
    Couplings c;
    c.K = 0.5 * std::log((kappa_p_ - kappa_) / denom);
    c.Kp = bt;
    c.Kpp = bt + 0.5 * std::log(kappa_);
    return c;
  }

  Couplings at(double beta) const { return at_inner(inner_from_unit(beta)); }

  CurvePoint point(double beta) const {
    CurvePoint p;
    p.beta = beta;
    p.inner = inner_from_unit(beta);
    p.couplings = at_inner(p.inner);
    p.weights = weight_set(p.couplings);
    return p;
  }

  // d/dβ log w1 in the normalized coordinate, by centered differences.
  double dlog_w1(double beta, double h = 1e-6) const {
    double lo = gat_weights(at(beta - h)).log_w1;
    double hi = gat_weights(at(beta + h)).log_w1;
    return (hi - lo) / (2 * h);
  }

 private:
  double kappa_, kappa_p_;
};

// Isotropic curve family ĝ_κ: û3 ≡ κ and u1 = t exactly, via
//   J = ¼ log(κ t² + 2t + 1),  U = J - ½ log(1+t),  (K,K',K'') = (J,J,U).
// J is strictly increasing and U strictly decreasing in t, and every point
// satisfies the isotropic AF-FKG condition (margin κt²/(2 e^{2J})).
class IsoCurve {
 public:
  explicit IsoCurve(double kappa) : kappa_(kappa) {
    if (!(kappa > 0) || !(kappa < 1)) throw std::invalid_argument("iso curve: need kappa in (0,1)");
  }

  double kappa() const { return kappa_; }

  Couplings at_t(double t) const {
    if (!(t > 0)) throw std::invalid_argument("iso curve: need t > 0");
    double J = 0.25 * std::log(kappa_ * t * t + 2 * t + 1);
    double U = J - 0.5 * std::log1p(t);
    return Couplings::iso(J, U);
  }

  // Increasing bijection (0,1) -> (0,∞) used as the normalized coordinate.
  static double t_from_unit(double beta) {
    if (!(beta > 0) || !(beta < 1)) throw std::invalid_argument("iso curve: beta must be in (0,1)");
    return beta / (1 - beta);
  }

  Couplings at(double beta) const { return at_t(t_from_unit(beta)); }

  CurvePoint point_t(double t) const {
    CurvePoint p;
    p.inner = t;
    p.beta = t / (1 + t);
    p.couplings = at_t(t);
    p.weights = weight_set(p.couplings);
    return p;
  }

 private:
  double kappa_;
};

}  // namespace atlab
