#include <catch2/catch_amalgamated.hpp>

#include "atlab/curves.hpp"
#include "atlab/dominance.hpp"
#include "atlab/enumerate.hpp"
#include "oracle_helpers.hpp"

using namespace atlab;

namespace {

EnumeratedMeasure point_mass(const std::string& space, uint64_t key) {
  EnumeratedMeasure m;
  m.space = space;
  m.keys = {key};
  m.prob = {1.0};
  m.log_z = 0;
  return m;
}

}  // namespace

TEST_CASE("Strassen certificate: trivial cases") {
  Region r = region_single_site();
  Oracle o(r);
  Couplings c = Couplings::jju(0.3, 0.1, 0.05);
  EnumeratedMeasure mu = gat_law(o, c, 1, BoundaryCondition::free_bc());
  REQUIRE(strassen_dominates(mu, mu));
  std::string space = omega_space(r, 1);
  EnumeratedMeasure empty = point_mass(space, 0);
  EnumeratedMeasure full = point_mass(space, (1ull << r.num_edges()) - 1);
  REQUIRE(strassen_dominates(empty, full));
  REQUIRE_FALSE(strassen_dominates(full, empty));
  REQUIRE_THROWS_AS(strassen_dominates(mu, point_mass("other", 0)), std::invalid_argument);
}

TEST_CASE("jump monotonicity along the isotropic curves, exact certificates") {
  IsoCurve curve(0.5);
  for (const Region& r : {region_single_site(), region_domino()}) {
    Oracle o(r);
    for (auto [t1, t2] : std::vector<std::pair<double, double>>{{0.4, 0.8}, {0.2, 0.5}, {1.0, 2.0}}) {
      REQUIRE(atrc_weights(curve.at_t(t1)).u1 <= curve.kappa() * atrc_weights(curve.at_t(t2)).u1 + 1e-12);
      EnumeratedMeasure mu = gat_law(o, curve.at_t(t1), 1, BoundaryCondition::free_bc());
      EnumeratedMeasure nu = gat_law(o, curve.at_t(t2), 1, BoundaryCondition::free_bc());
      REQUIRE(strassen_dominates(mu, nu));
    }
    // Reverse direction must fail: the laws are genuinely ordered.
    EnumeratedMeasure mu = gat_law(o, curve.at_t(0.4), 1, BoundaryCondition::free_bc());
    EnumeratedMeasure nu = gat_law(o, curve.at_t(2.0), 1, BoundaryCondition::free_bc());
    REQUIRE_FALSE(strassen_dominates(nu, mu));
  }
}

TEST_CASE("scalar Holley certificate for the jump condition") {
  IsoCurve curve(0.5);
  double kappa = curve.kappa();
  auto u = [&](double t) { return atrc_weights(curve.at_t(t)).u1; };
  // u1 = t along the curve, so the certificate reads t1 <= κ t2.
  REQUIRE(holley_weight_conditions(u(0.4), kappa, u(0.8), kappa) == HolleyVerdict::kCertified);
  REQUIRE(holley_weight_conditions(u(0.5), kappa, u(0.8), kappa) == HolleyVerdict::kInconclusive);
  REQUIRE(holley_weight_conditions(u(0.5), 1.2, u(0.6), 1.2) == HolleyVerdict::kCertified);  // û3 >= 1 side
}

TEST_CASE("pairwise Holley certifies what Strassen decides (sufficient only)") {
  Region r = region_single_site();
  Oracle o(r);
  IsoCurve curve(0.5);
  EnumeratedMeasure mu = gat_law(o, curve.at_t(0.4), 1, BoundaryCondition::free_bc());
  EnumeratedMeasure nu = gat_law(o, curve.at_t(2.0), 1, BoundaryCondition::free_bc());
  HolleyVerdict v = holley_pairwise(mu, nu);
  if (v == HolleyVerdict::kCertified) REQUIRE(strassen_dominates(mu, nu));
  REQUIRE(holley_pairwise(mu, mu) == HolleyVerdict::kCertified);
}

TEST_CASE("boundary maximality: conditioned laws are dominated by the small-region law") {
  GammaCurve curve(0.25, 0.5);
  Couplings c = curve.at(0.5);
  REQUIRE(regime_predicates(c).af_fkg);
  {
    Region big = region_block2x2();
    Region small = region_single_site();
    Oracle ob(big), os(small);
    MaximalityReport rep = maximality_check(ob, os, c, 256);
    REQUIRE(rep.unconditioned_ok);
    REQUIRE(rep.contexts_checked == 256);  // exhaustive over the 8 outer edges
    REQUIRE(rep.contexts_failed == 0);
  }
  {
    Region big = region_domino();
    Region small = region_single_site();
    Oracle ob(big), os(small);
    MaximalityReport rep = maximality_check(ob, os, c, 64);
    REQUIRE(rep.unconditioned_ok);
    REQUIRE(rep.contexts_checked == 8);
    REQUIRE(rep.contexts_failed == 0);
  }
}
