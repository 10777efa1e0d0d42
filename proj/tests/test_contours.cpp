#include <catch2/catch_amalgamated.hpp>
#include <queue>
#include <set>

#include "atlab/contours.hpp"

using namespace atlab;

TEST_CASE("contour edge sets of small cell sets") {
  // Single cell in d=2: the four incident edges.
  EdgeSet f = contour_edges(2, {Coord{0, 0}});
  REQUIRE(f.size() == 4);
  // Horizontal domino: six edges.
  REQUIRE(contour_edges(2, {Coord{0, 0}, Coord{1, 0}}).size() == 6);
  // Single cell in d=3: six incident edges.
  REQUIRE(contour_edges(3, {Coord{0, 0, 0}}).size() == 6);
  REQUIRE_THROWS_AS(contour_edges(2, {Coord{0, 0}, Coord{2, 0}}), std::invalid_argument);
  REQUIRE_THROWS_AS(contour_edges(2, {}), std::invalid_argument);
}

TEST_CASE("cavity edges are excluded from the outer contour") {
  // Ring of 8 cells: E(C) is the outer dozen, the same as the full 3x3 block.
  std::vector<Coord> ring, block;
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y) {
      block.push_back(Coord{x, y});
      if (!(x == 1 && y == 1)) ring.push_back(Coord{x, y});
    }
  EdgeSet fr = contour_edges(2, ring);
  EdgeSet fb = contour_edges(2, block);
  REQUIRE(fr == fb);
  REQUIRE(fr.size() == 12);
}

TEST_CASE("fixed-root connected-set counts match the polyomino sequence") {
  // Sets of size m containing a fixed cell: m * (number of fixed m-ominoes),
  // with fixed counts 1, 2, 6, 19, 63.
  detail::CellBox box;
  box.dim = 2;
  for (int i = 0; i < 2; ++i) {
    box.lo[i] = -6;
    box.hi[i] = 6;
  }
  std::array<long long, 6> count{};
  detail::enumerate_connected_sets(2, Coord{0, 0}, box, 5, [&](const std::vector<Coord>& c) {
    count[c.size()] += 1;
  });
  REQUIRE(count[1] == 1);
  REQUIRE(count[2] == 2 * 2);
  REQUIRE(count[3] == 3 * 6);
  REQUIRE(count[4] == 4 * 19);
  REQUIRE(count[5] == 5 * 63);
}

TEST_CASE("blocking counts around a vertex: k = 4, 5, 6") {
  REQUIRE(enumerate_blocking(Coord{0, 0}, 4, 2).size() == 1);
  REQUIRE(enumerate_blocking(Coord{0, 0}, 5, 2).size() == 0);
  REQUIRE(enumerate_blocking(Coord{0, 0}, 6, 2).size() == 4);
  // Every size must be even in d=2, and at least 2d.
  for (int k = 1; k < 4; ++k) REQUIRE(enumerate_blocking(Coord{0, 0}, k, 2).empty());
  REQUIRE(enumerate_blocking(Coord{0, 0}, 7, 2).empty());
  for (auto& f : enumerate_blocking(Coord{0, 0}, 8, 2)) REQUIRE(f.size() % 2 == 0);
  REQUIRE_THROWS_AS(enumerate_blocking(Coord{0, 0}, 14, 2), CapExceeded);
  // d=3: the smallest blocking set is the six edges at the vertex.
  REQUIRE(enumerate_blocking(Coord{0, 0, 0}, 6, 3).size() == 1);
  REQUIRE(enumerate_blocking(Coord{0, 0, 0}, 10, 3).size() == 6);  // dominoes through the origin
}

TEST_CASE("blocking sets separate their witness from infinity") {
  for (int k : {4, 6, 8}) {
    for (const EdgeSet& f : enumerate_blocking(Coord{0, 0}, k, 2)) {
      // BFS from the origin avoiding edges of F must stay in a bounded set.
      std::set<std::pair<Coord, int>> blocked;
      for (auto& e : f) blocked.insert({e.a, e.axis});
      std::set<Coord> seen{Coord{0, 0}};
      std::queue<Coord> q;
      q.push(Coord{0, 0});
      bool escaped = false;
      while (!q.empty() && !escaped) {
        Coord v = q.front();
        q.pop();
        for (int a = 0; a < 2; ++a) {
          for (int s : {-1, 1}) {
            Coord nb = v;
            nb[a] += s;
            Coord lo = s > 0 ? v : nb;
            if (blocked.count({lo, a})) continue;
            if (std::abs(nb[0]) > 8 || std::abs(nb[1]) > 8) {
              escaped = true;
              break;
            }
            if (!seen.count(nb)) {
              seen.insert(nb);
              q.push(nb);
            }
          }
        }
      }
      REQUIRE_FALSE(escaped);
    }
  }
}

TEST_CASE("blocking counts in a box are monotone in the ambient edge set") {
  Region b2 = Region::box(2, 2);
  Region b3 = Region::box(2, 3);
  for (int k : {4, 6, 8}) {
    BlockingCount small = count_blocking_in_box(b2, k);
    BlockingCount large = count_blocking_in_box(b3, k);
    REQUIRE(small.exact <= large.exact);
  }
}

TEST_CASE("counts stay below the crude bound on B_3") {
  Region b3 = Region::box(2, 3);
  auto counts = count_blocking_in_box_upto(b3, 10);
  for (int k = 1; k <= 10; ++k) {
    REQUIRE(std::log(std::max(1.0, double(counts.at(k)))) <= log_blocking_bound(b3.num_edges(), 2, k));
    if (k < 4 || k % 2 == 1) REQUIRE(counts.at(k) == 0);
  }
  REQUIRE(counts.at(4) == 49);  // one blocking quadruple per cell of B_3
  // Bound evaluates in log space for any k.
  REQUIRE(log_blocking_bound(60, 2, 40) > 0);
}

TEST_CASE("plaquette adjacency has max degree 6(d-1)") {
  REQUIRE(max_plaquette_degree(Region::box(2, 2)) == 6);
  REQUIRE(max_plaquette_degree(Region::box(3, 1)) <= 12);
  REQUIRE(max_plaquette_degree(Region::box(3, 1)) == 12);
}
