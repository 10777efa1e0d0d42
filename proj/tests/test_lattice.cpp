#include <catch2/catch_amalgamated.hpp>

#include "atlab/lattice.hpp"
#include "atlab/rng.hpp"
#include "oracle_helpers.hpp"

using namespace atlab;

TEST_CASE("box sizes and closure") {
  for (int d : {2, 3}) {
    for (int n : {0, 1, 2}) {
      Region r = Region::box(d, n);
      long long expect = 1;
      for (int i = 0; i < d; ++i) expect *= 2 * n + 1;
      REQUIRE(r.lambda_size() == expect);
      for (int e = 0; e < r.num_edges(); ++e) {
        const auto& ed = r.edge(e);
        REQUIRE((r.in_lambda(ed.u) || r.in_lambda(ed.v)));
      }
    }
  }
  Region b2 = Region::box(2, 2);
  REQUIRE(b2.num_vertices() == 25 + 20);
  REQUIRE(b2.num_edges() == 60);
}

TEST_CASE("canonical edge order depends on (d, n) only") {
  Region a = Region::box(2, 2);
  Region b = Region::box(2, 2);
  REQUIRE(a.num_edges() == b.num_edges());
  for (int e = 0; e < a.num_edges(); ++e) {
    REQUIRE(a.vertex(a.edge(e).u) == b.vertex(b.edge(e).u));
    REQUIRE(a.edge(e).axis == b.edge(e).axis);
  }
  // lexicographic on (smaller endpoint, axis)
  for (int e = 1; e < a.num_edges(); ++e) {
    auto ku = std::make_pair(a.vertex(a.edge(e - 1).u), a.edge(e - 1).axis);
    auto kv = std::make_pair(a.vertex(a.edge(e).u), a.edge(e).axis);
    REQUIRE(ku < kv);
  }
}

TEST_CASE("bipartite parity across every edge") {
  for (int d : {2, 3}) {
    Region r = Region::box(d, 1);
    for (int e = 0; e < r.num_edges(); ++e) REQUIRE(r.parity(r.edge(e).u) != r.parity(r.edge(e).v));
  }
}

TEST_CASE("cluster count, empty and full on the 2x2 block") {
  Region r = region_block2x2();
  REQUIRE(r.num_vertices() == 12);
  REQUIRE(r.num_edges() == 12);
  EdgeConfig empty = EdgeConfig::make(r.num_edges(), 0);
  REQUIRE(r.cluster_count(empty) == 12);
  EdgeConfig full = EdgeConfig::make(r.num_edges(), 1);
  for (int e = 0; e < 12; ++e) full.set(e, true);
  REQUIRE(r.cluster_count(full) == 1);
}

TEST_CASE("cluster count agrees with an independent BFS recount") {
  rng::Sequence seq{2024, rng::kParamDraw, 0};
  for (const Region& r : {Region::box(2, 1), Region::box(2, 2), Region::box(3, 1)}) {
    int trials = r.num_edges() <= 24 ? 3000 : 1000;
    for (int t = 0; t < trials; ++t) {
      int fill = seq.next() < 0.5 ? 0 : 1;
      EdgeConfig om = EdgeConfig::make(r.num_edges(), fill);
      for (int e = 0; e < r.num_edges(); ++e) om.set(e, seq.next() < 0.45);
      REQUIRE(r.cluster_count(om) == testing_support::bfs_cluster_count(r, om));
    }
  }
  // 10^4 configurations in total across regions, plus the domino.
  Region dom = region_domino();
  for (int t = 0; t < 3000; ++t) {
    int fill = seq.next() < 0.5 ? 0 : 1;
    EdgeConfig om = EdgeConfig::make(dom.num_edges(), fill);
    for (int e = 0; e < dom.num_edges(); ++e) om.set(e, seq.next() < 0.5);
    REQUIRE(dom.cluster_count(om) == testing_support::bfs_cluster_count(dom, om));
  }
}

TEST_CASE("dual geometry of boxes and the domain check") {
  Region b1 = Region::box(2, 1);
  DualGeometry g = DualGeometry::build(b1);
  REQUIRE(g.is_domain());
  REQUIRE(g.star_size() == 4);  // B_1* is 2x2
  Region b2 = Region::box(2, 2);
  REQUIRE(DualGeometry::build(b2).star_size() == 16);
  // A 2x2 block has a single bounded face.
  REQUIRE(DualGeometry::build(region_block2x2()).star_size() == 1);
  // The domino is a domain with an empty dual.
  REQUIRE(DualGeometry::build(region_domino()).is_domain());
  REQUIRE(DualGeometry::build(region_domino()).star_size() == 0);
  // An 8-cell ring around a hole is not a domain: the bounded face at the
  // center is a unit square, but the hole vertex makes the face count differ.
  std::vector<Coord> ring;
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y)
      if (!(x == 1 && y == 1)) ring.push_back(Coord{x, y});
  Region ring_region = Region::from_vertices(2, ring);
  DualGeometry rg = DualGeometry::build(ring_region);
  REQUIRE(rg.is_domain());  // all bounded faces are unit squares (the hole is a single vertex)
  // The L-tromino is a domain too.
  Region ltro = Region::from_vertices(2, {Coord{0, 0}, Coord{1, 0}, Coord{0, 1}});
  REQUIRE(DualGeometry::build(ltro).is_domain());
}

TEST_CASE("dual configuration flips and is an involution") {
  Region r = region_block2x2();
  DualGeometry g = DualGeometry::build(r);
  EdgeConfig om = EdgeConfig::make(r.num_edges(), 0);
  om.set(3, true);
  om.set(7, true);
  EdgeConfig dual = g.dual_config(om);
  REQUIRE(dual.fill == 1);
  REQUIRE(dual.dual);
  for (int e = 0; e < r.num_edges(); ++e) REQUIRE(dual.get(e) == !om.get(e));
  EdgeConfig back = g.dual_config(dual);
  REQUIRE(back.fill == om.fill);
  for (int e = 0; e < r.num_edges(); ++e) REQUIRE(back.get(e) == om.get(e));
  REQUIRE_THROWS_AS(DualGeometry::build(Region::box(3, 1)), std::invalid_argument);
}

TEST_CASE("Euler identity on the 2x2 block, worked examples") {
  Region r = region_block2x2();
  DualGeometry g = DualGeometry::build(r);
  EdgeConfig empty = EdgeConfig::make(r.num_edges(), 0);
  // 12 = 12 - 0 + 1 - 1
  REQUIRE(r.cluster_count(empty) == 12);
  REQUIRE(g.dual_cluster_count(empty) == 1);
  REQUIRE(euler_identity_check(g, empty));
  // all 4 interior edges open: k = 9, |ω| = 4, k* = 2
  EdgeConfig inner = EdgeConfig::make(r.num_edges(), 0);
  int set_count = 0;
  for (int e = 0; e < r.num_edges(); ++e) {
    const auto& ed = r.edge(e);
    if (r.in_lambda(ed.u) && r.in_lambda(ed.v)) {
      inner.set(e, true);
      ++set_count;
    }
  }
  REQUIRE(set_count == 4);
  REQUIRE(r.cluster_count(inner) == 9);
  REQUIRE(g.dual_cluster_count(inner) == 2);
  REQUIRE(euler_identity_check(g, inner));
  EdgeConfig filled = EdgeConfig::make(r.num_edges(), 1);
  REQUIRE_THROWS_AS(euler_identity_check(g, filled), std::invalid_argument);
}

TEST_CASE("Euler identity holds for 1000 random configurations on B_2") {
  Region r = Region::box(2, 2);
  DualGeometry g = DualGeometry::build(r);
  rng::Sequence seq{7, rng::kParamDraw, 0};
  for (int t = 0; t < 1000; ++t) {
    EdgeConfig om = EdgeConfig::make(r.num_edges(), 0);
    double p = seq.next();
    for (int e = 0; e < r.num_edges(); ++e) om.set(e, seq.next() < p);
    REQUIRE(euler_identity_check(g, om));
  }
}

TEST_CASE("Euler identity on non-box domains") {
  rng::Sequence seq{11, rng::kParamDraw, 0};
  std::vector<Region> domains;
  domains.push_back(Region::from_vertices(2, {Coord{0, 0}, Coord{1, 0}, Coord{0, 1}}));
  std::vector<Coord> ring;
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y)
      if (!(x == 1 && y == 1)) ring.push_back(Coord{x, y});
  domains.push_back(Region::from_vertices(2, ring));
  for (const Region& r : domains) {
    DualGeometry g = DualGeometry::build(r);
    REQUIRE(g.is_domain());
    for (int t = 0; t < 400; ++t) {
      EdgeConfig om = EdgeConfig::make(r.num_edges(), 0);
      for (int e = 0; e < r.num_edges(); ++e) om.set(e, seq.next() < 0.5);
      REQUIRE(euler_identity_check(g, om));
    }
  }
}
