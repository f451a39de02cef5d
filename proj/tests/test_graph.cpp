#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "sgidla/errors.hpp"
#include "sgidla/graph.hpp"

using namespace sgidla;

namespace {

constexpr GraphFamily kSg2 = GraphFamily::GasketTwoSided;
constexpr GraphFamily kSg1 = GraphFamily::GasketOneSided;
constexpr GraphFamily kCarpet = GraphFamily::CarpetQuadrant;

using Edge = std::pair<Vertex, Vertex>;

// Finite gasket of side 2^level grown by the triangle recursion: level 0 is
// the unit triangle, level m+1 glues translates by (2^m, 0) and (0, 2^m).
std::set<Edge> recursive_gasket_edges(int level) {
  std::set<Edge> edges;
  auto add = [&](Vertex a, Vertex b) {
    if (b < a) std::swap(a, b);
    edges.insert({a, b});
  };
  add({0, 0}, {1, 0});
  add({0, 0}, {0, 1});
  add({1, 0}, {0, 1});
  for (int m = 0; m < level; ++m) {
    const std::int64_t s = std::int64_t{1} << m;
    std::set<Edge> copy = edges;
    for (const auto& [a, b] : copy) {
      add(a + Vertex{s, 0}, b + Vertex{s, 0});
      add(a + Vertex{0, s}, b + Vertex{0, s});
    }
  }
  return edges;
}

std::map<Vertex, std::set<Vertex>> adjacency(const std::set<Edge>& edges) {
  std::map<Vertex, std::set<Vertex>> adj;
  for (const auto& [a, b] : edges) {
    adj[a].insert(b);
    adj[b].insert(a);
  }
  return adj;
}

std::set<Vertex> as_set(const NeighborList& list) { return {list.begin(), list.end()}; }

}  // namespace

TEST_CASE("membership examples") {
  CHECK(sg_contains(kSg2, {0, 0}));
  CHECK(sg_contains(kSg2, {1, 1}));
  CHECK_FALSE(sg_contains(kSg2, {1, -1}));
  CHECK(sg_contains(kSg2, {-1, -1}));
  CHECK_FALSE(sg_contains(kSg1, {-1, 0}));
  CHECK(sg_contains(kCarpet, {2, 0}));
  CHECK_FALSE(sg_contains(kCarpet, {1, 1}));
  CHECK_FALSE(sg_contains(kCarpet, {4, 4}));
  CHECK(sg_contains(kCarpet, {2, 4}));
  CHECK_FALSE(sg_contains(kCarpet, {3, 4}));
}

TEST_CASE("neighbor examples") {
  CHECK(as_set(neighbors(kSg2, {0, 0})) == std::set<Vertex>{{1, 0}, {0, 1}, {-1, 0}, {0, -1}});
  CHECK(as_set(neighbors(kSg1, {0, 0})) == std::set<Vertex>{{1, 0}, {0, 1}});
  CHECK(as_set(neighbors(kSg2, {1, 0})) == std::set<Vertex>{{0, 0}, {0, 1}, {2, 0}, {1, 1}});
  CHECK(as_set(neighbors(kCarpet, {0, 0})) == std::set<Vertex>{{1, 0}, {0, 1}});
  CHECK_THROWS_AS(neighbors(kSg2, {1, -1}), InvalidVertexError);
}

TEST_CASE("bitwise adjacency agrees with the triangle recursion") {
  const int level = 6;
  const std::int64_t side = std::int64_t{1} << level;
  auto adj = adjacency(recursive_gasket_edges(level));
  // Point reflection gives the second copy; the copies share only o.
  std::map<Vertex, std::set<Vertex>> two_sided = adj;
  for (const auto& [x, nbrs] : adj) {
    for (const Vertex& y : nbrs) two_sided[-x].insert(-y);
  }
  const std::set<Vertex> corners{{side, 0}, {0, side}, {-side, 0}, {0, -side}};
  std::size_t checked = 0;
  for (const auto& [x, nbrs] : two_sided) {
    if (corners.contains(x)) continue;
    REQUIRE(sg_contains(kSg2, x));
    CHECK(as_set(neighbors(kSg2, x)) == nbrs);
    ++checked;
  }
  // |V_m| = (3^{m+1} + 3) / 2 per copy.
  const std::size_t per_copy = (static_cast<std::size_t>(std::llround(std::pow(3.0, level + 1))) + 3) / 2;
  CHECK(checked == 2 * per_copy - 1 - corners.size());
  for (const auto& [x, nbrs] : adj) {
    if (x == Vertex{side, 0} || x == Vertex{0, side}) continue;
    CHECK(as_set(neighbors(kSg1, x)) == nbrs);
  }
}

TEST_CASE("gasket degrees, symmetry and point reflection") {
  const Ball b = ball(kSg2, kOrigin, 64);
  for (const Vertex& x : b.interior) {
    const auto nx = neighbors(kSg2, x);
    CHECK(nx.size() == 4);
    CHECK(as_set(neighbors(kSg2, -x)) == as_set([&] {
            NeighborList r;
            for (const Vertex& y : nx) r.push_back(-y);
            return r;
          }()));
    for (const Vertex& y : nx) CHECK(neighbors(kSg2, y).contains(x));
  }
  for (const Vertex& x : ball(kSg1, kOrigin, 32).interior) {
    CHECK(degree(kSg1, x) == (x == kOrigin ? 2u : 4u));
  }
  for (const Vertex& x : ball(kCarpet, kOrigin, 27).interior) {
    for (const Vertex& y : neighbors(kCarpet, x)) CHECK(neighbors(kCarpet, y).contains(x));
  }
}

TEST_CASE("balls") {
  const Ball b1 = ball(kSg2, kOrigin, 1);
  CHECK(b1.interior == std::vector<Vertex>{kOrigin});
  CHECK(b1.boundary.size() == 4);
  CHECK(ball(kSg2, kOrigin, 2).size() == 5);
  CHECK(ball(kSg2, kOrigin, 3).size() == 11);
  CHECK(ball_size(kSg2, kOrigin, 1) == 1);
  CHECK(ball_size(kCarpet, kOrigin, 2) == 3);
  for (int k = 1; k <= 8; ++k) {
    const auto three = static_cast<std::size_t>(std::llround(std::pow(3.0, k + 1)));
    CHECK(ball_size(kSg2, kOrigin, (1 << k) + 1) == three + 2);
  }
  const auto profile = ball_size_profile(kSg2, kOrigin, 40);
  for (int r = 1; r <= 40; ++r) CHECK(profile[static_cast<std::size_t>(r)] == ball_size(kSg2, kOrigin, r));
  // Volume doubling: b_{2r} <= C b_r with C well below 4.
  for (int r = 2; r <= 20; ++r) {
    const double ratio = static_cast<double>(profile[static_cast<std::size_t>(2 * r)]) /
                         static_cast<double>(profile[static_cast<std::size_t>(r)]);
    CHECK(ratio <= 4.0);
    CHECK(ratio >= 2.0);
  }
}

TEST_CASE("ball layers match graph distance") {
  const Ball b = ball(kSg2, {3, 1}, 9);
  for (const Vertex& x : b.interior) {
    const auto d = graph_distance(kSg2, {3, 1}, x, 20);
    REQUIRE(d.has_value());
    CHECK(*d < 9);
  }
  for (const Vertex& x : b.boundary) CHECK(graph_distance(kSg2, {3, 1}, x, 20) == 9);
}

TEST_CASE("graph distance examples") {
  CHECK(graph_distance(kSg2, kOrigin, {1, 0}, 10) == 1);
  CHECK(graph_distance(kSg2, {1, 0}, {-1, 0}, 10) == 2);
  CHECK(graph_distance(kSg2, kOrigin, {4, 0}, 10) == 4);
  CHECK_FALSE(graph_distance(kSg2, kOrigin, {16, 0}, 10).has_value());
  CHECK(graph_distance(kSg2, {5, 2}, {5, 2}, 0) == 0);
}

TEST_CASE("annulus bound") {
  CHECK(annulus_bound_check(8, 0.5).holds);
  CHECK(annulus_bound_check(16, 0.25).holds);
  CHECK(annulus_bound_check(2, 0.9).holds);
  CHECK_THROWS_AS(annulus_bound_check(8, 0.1), DomainError);
  CHECK_THROWS_AS(annulus_bound_check(8, 1.0), DomainError);
  const AnnulusBound a = annulus_bound_check(16, 0.25);
  CHECK(a.inner_radius == 12);
  CHECK(a.lhs == doctest::Approx(static_cast<double>(ball_size(kSg2, kOrigin, 16) -
                                                     ball_size(kSg2, kOrigin, 12))));
}

TEST_CASE("local graph ids are stable") {
  LocalGraph g(kSg2);
  const auto o = g.id_of(kOrigin);
  CHECK(g.degree(o) == 4);
  const auto n0 = g.neighbor(o, 0);
  CHECK(g.vertex(n0) == Vertex{1, 0});
  CHECK(g.id_of({1, 0}) == n0);
  CHECK(g.find({1, 0}) == n0);
  CHECK_FALSE(g.find({7, 7}).has_value());
}

TEST_CASE("family names") {
  CHECK(parse_graph_family("sg2") == kSg2);
  CHECK(parse_graph_family("carpet") == kCarpet);
  CHECK(to_string(kSg1) == "sg1");
  CHECK_THROWS_AS(parse_graph_family("torus"), DomainError);
}
