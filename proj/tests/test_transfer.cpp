#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "atlab/curves.hpp"
#include "atlab/enumerate.hpp"
#include "atlab/transfer.hpp"
#include "oracle_helpers.hpp"

using namespace atlab;
using Catch::Approx;

namespace {

double direct_log_z(Oracle& o, const Couplings& c, const BoundaryCondition& b1, const BoundaryCondition& b2) {
  const Region& r = o.region();
  const LayerTables& t1 = o.layer(b1);
  const LayerTables& t2 = o.layer(b2);
  double mx = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < t1.states(); ++i)
    for (size_t j = 0; j < t2.states(); ++j)
      mx = std::max(mx, at_log_weight(r, c, t1.spin_mask[i], t2.spin_mask[j]));
  KahanSum z;
  for (size_t i = 0; i < t1.states(); ++i)
    for (size_t j = 0; j < t2.states(); ++j)
      z.add(std::exp(at_log_weight(r, c, t1.spin_mask[i], t2.spin_mask[j]) - mx));
  return mx + std::log(z.value());
}

}  // namespace

TEST_CASE("window DP reproduces direct partition functions") {
  rng::Sequence seq{73, rng::kParamDraw, 0};
  {
    Region r = region_block2x2();
    Oracle o(r);
    for (int t = 0; t < 8; ++t) {
      Couplings c{seq.next(-0.7, 0.7), seq.next(-0.7, 0.7), seq.next(-0.7, 0.7), {0, 1, 2}, {1, 1, 1}};
      for (auto& [b1, b2] : std::vector<std::pair<BoundaryCondition, BoundaryCondition>>{
               {BoundaryCondition::plus(), BoundaryCondition::free_bc()},
               {BoundaryCondition::free_bc(), BoundaryCondition::free_bc()},
               {BoundaryCondition::plus(), BoundaryCondition::alternating()}}) {
        double dp = two_layer_log_partition(r, b1, b2, [&](int) { return at_edge_factor(c); });
        REQUIRE(dp == Approx(direct_log_z(o, c, b1, b2)).epsilon(1e-12));
      }
    }
  }
  {
    Region r = Region::box(2, 1);
    Oracle o(r);
    Couplings c = Couplings::jju(0.3, -0.2, 0.1);
    double dp = two_layer_log_partition(r, BoundaryCondition::plus(), BoundaryCondition::alternating(),
                                        [&](int) { return at_edge_factor(c); });
    REQUIRE(dp == Approx(direct_log_z(o, c, BoundaryCondition::plus(), BoundaryCondition::alternating()))
                      .epsilon(1e-12));
  }
}

TEST_CASE("edge probabilities via DP match enumeration on the 2x2 block") {
  Region r = region_block2x2();
  Oracle o(r);
  rng::Sequence seq{79, rng::kParamDraw, 0};
  for (int t = 0; t < 4; ++t) {
    Couplings c = testing_support::random_sampling_valid(seq);
    EnumeratedMeasure g = gat_law(o, c, 1, BoundaryCondition::free_bc());
    for (int e = 0; e < r.num_edges(); e += 5) {
      double direct = g.expectation([&](uint64_t k) { return static_cast<double>((k >> e) & 1); });
      double dp = gat_edge_open_probability(r, c, BoundaryCondition::plus(), BoundaryCondition::free_bc(), e);
      REQUIRE(dp == Approx(direct).epsilon(1e-11).margin(1e-13));
    }
    // all-closed probability on the four edges at a corner vertex of Λ
    std::vector<int> edges;
    int corner = r.vertex_index(Coord{0, 0});
    for (auto& [e, w] : r.incident(corner)) edges.push_back(e);
    uint64_t mask = 0;
    for (int e : edges) mask |= 1ull << e;
    double direct = g.expectation([&](uint64_t k) { return (k & mask) == 0 ? 1.0 : 0.0; });
    double dp = gat_edges_all_closed_probability(r, c, BoundaryCondition::plus(), BoundaryCondition::free_bc(), edges);
    REQUIRE(dp == Approx(direct).epsilon(1e-11).margin(1e-13));
  }
}

TEST_CASE("theta_1 is exact on B_2 and moves the right way") {
  GammaCurve curve(0.25, 0.5);
  double lo = theta1_exact(curve.at(0.15));
  double hi = theta1_exact(curve.at(0.85));
  REQUIRE(lo > 0.0);
  REQUIRE(hi < 1.0);
  REQUIRE(lo < hi);
}
