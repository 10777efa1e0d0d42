#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "atlab/curves.hpp"
#include "oracle_helpers.hpp"

using namespace atlab;
using Catch::Approx;

TEST_CASE("gamma curve endpoints and the worked point") {
  GammaCurve curve(0.25, 0.5);
  REQUIRE(curve.beta_minus() == Approx(0.75 * std::log(2.0)).epsilon(1e-14));
  REQUIRE(curve.beta_minus() == Approx(0.519860).margin(1e-6));
  REQUIRE(curve.beta_plus() == Approx(std::log(2.0)).epsilon(1e-14));
  Couplings c = curve.at_inner(0.6);
  REQUIRE(c.K == Approx(0.393420).margin(1e-6));
  REQUIRE(c.Kp == 0.6);
  REQUIRE(c.Kpp == Approx(0.6 + 0.5 * std::log(0.25)).epsilon(1e-14));
  REQUIRE(c.Kpp == Approx(-0.093147).margin(1e-6));
  GatWeights w = gat_weights(c);
  REQUIRE(w.w2 == Approx(0.25).epsilon(1e-14));
  REQUIRE(w.w3 == Approx(0.5).epsilon(1e-13));
  REQUIRE_THROWS_AS(GammaCurve(0.5, 0.25), std::invalid_argument);
  REQUIRE_THROWS_AS(GammaCurve(0.25, 1.5), std::invalid_argument);
  REQUIRE_THROWS_AS(curve.at(1.5), std::invalid_argument);
}

TEST_CASE("gamma curve contracts on a dense grid") {
  rng::Sequence seq{83, rng::kParamDraw, 0};
  int af_count = 0;
  for (int t = 0; t < 10000; ++t) {
    double kappa = seq.next(0.05, 0.9);
    double kappa_p = seq.next(kappa + 1e-3, 1.0);
    if (!(kappa < kappa_p && kappa_p <= 1)) continue;
    double beta = seq.next(0.02, 0.98);
    GammaCurve curve(kappa, kappa_p);
    CurvePoint p = curve.point(beta);
    REQUIRE(p.weights.w.w2 == Approx(kappa).epsilon(1e-12));
    REQUIRE(p.weights.w.w3 == Approx(kappa_p).epsilon(1e-12));
    if (p.weights.flags.af_fkg) ++af_count;
    REQUIRE(p.weights.flags.af_fkg);
  }
  REQUIRE(af_count > 0);
}

TEST_CASE("w1 increases along the normalized coordinate and covers (0, inf)") {
  GammaCurve curve(0.25, 0.5);
  double prev = 0;
  for (double beta = 0.02; beta < 1.0; beta += 0.02) {
    double w1 = gat_weights(curve.at(beta)).w1;
    REQUIRE(w1 > prev);
    prev = w1;
  }
  REQUIRE(gat_weights(curve.at(0.001)).w1 < 1e-2);
  REQUIRE(gat_weights(curve.at(0.999)).w1 > 1e2);
}

TEST_CASE("the log-derivative bound holds in the natural parameter") {
  // -d/dβ̃ log w1(γ̃(β̃)) > 4κ/(κ'-κ), checked by finite differences.
  for (auto [kappa, kappa_p] : std::vector<std::pair<double, double>>{{0.25, 0.5}, {0.1, 0.9}, {0.5, 0.55}}) {
    GammaCurve curve(kappa, kappa_p);
    double bound = 4 * kappa / (kappa_p - kappa);
    double lo = curve.beta_minus(), hi = curve.beta_plus();
    for (int i = 1; i < 40; ++i) {
      double bt = lo + (hi - lo) * i / 40.0;
      double h = (hi - lo) * 1e-6;
      double d = (gat_weights(curve.at_inner(bt + h)).log_w1 - gat_weights(curve.at_inner(bt - h)).log_w1) / (2 * h);
      REQUIRE(-d >= bound * (1 - 1e-6));
    }
  }
}

TEST_CASE("isotropic curve worked point and limits") {
  IsoCurve curve(0.5);
  Couplings c = curve.at_t(2.0);
  REQUIRE(c.K == Approx(0.25 * std::log(7.0)).epsilon(1e-14));
  REQUIRE(c.K == Approx(0.486481).margin(1e-5));
  REQUIRE(c.Kpp == Approx(0.25 * std::log(7.0) - 0.5 * std::log(3.0)).epsilon(1e-13));
  REQUIRE(c.Kpp == Approx(-0.062825).margin(1e-5));
  AtrcWeights u = atrc_weights(c);
  REQUIRE(u.u1 == Approx(2.0).epsilon(1e-12));
  REQUIRE(u.u3_hat == Approx(0.5).epsilon(1e-12));
  // t -> 0+ limit: (J, U) -> (0, 0).
  Couplings tiny = curve.at_t(1e-9);
  REQUIRE(std::abs(tiny.K) < 1e-8);
  REQUIRE(std::abs(tiny.Kpp) < 1e-8);
  REQUIRE_THROWS_AS(IsoCurve(1.2), std::invalid_argument);
  REQUIRE_THROWS_AS(curve.at_t(-1.0), std::invalid_argument);
}

TEST_CASE("isotropic curve contracts and regime membership on a grid") {
  rng::Sequence seq{89, rng::kParamDraw, 0};
  for (int t = 0; t < 10000; ++t) {
    double kappa = seq.next(0.05, 0.95);
    double tt = std::exp(seq.next(std::log(0.01), std::log(50.0)));
    IsoCurve curve(kappa);
    CurvePoint p = curve.point_t(tt);
    REQUIRE(p.weights.u.u1 == Approx(tt).epsilon(1e-12));
    REQUIRE(p.weights.u.u3_hat == Approx(kappa).epsilon(1e-12));
    REQUIRE(p.weights.flags.iso_af_fkg);
    // margin κt²/(2 e^{2J}) > 0
    double margin = std::cosh(2 * p.couplings.K) - std::exp(-2 * p.couplings.Kpp);
    REQUIRE(margin == Approx(kappa * tt * tt / (2 * std::exp(2 * p.couplings.K))).epsilon(1e-9).margin(1e-12));
  }
}

TEST_CASE("J increases and U decreases along the isotropic curves") {
  IsoCurve curve(0.3);
  double pj = 0, pu = 1;
  bool first = true;
  for (double t = 0.05; t < 20; t *= 1.4) {
    Couplings c = curve.at_t(t);
    if (!first) {
      REQUIRE(c.K > pj);
      REQUIRE(c.Kpp < pu);
    }
    pj = c.K;
    pu = c.Kpp;
    first = false;
  }
  // u1 along the curve is the identity in t: strictly increasing bijection.
  REQUIRE(atrc_weights(curve.at_t(1e-6)).u1 == Approx(1e-6).epsilon(1e-10));
  REQUIRE(atrc_weights(curve.at_t(1e6)).u1 == Approx(1e6).epsilon(1e-10));
  // normalized coordinate map
  REQUIRE(IsoCurve::t_from_unit(0.5) == Approx(1.0));
  REQUIRE(curve.point_t(2.0).beta == Approx(2.0 / 3.0).epsilon(1e-14));
}
