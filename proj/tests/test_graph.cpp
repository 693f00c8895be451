#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>
#include <vector>

#include "healsim/errors.hpp"
#include "healsim/graph.hpp"
#include "healsim/rng.hpp"

using namespace healsim;

namespace {

/// Independent all-pairs oracle on the undirected closure.
int floyd_warshall_diameter(const DirectedGraph& g) {
  const auto ids = g.nodes();
  const std::size_t n = ids.size();
  if (n < 2) return 0;
  const int inf = 1 << 20;
  std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (NodeId v : g.out(ids[i])) {
      const std::size_t j = static_cast<std::size_t>(
          std::lower_bound(ids.begin(), ids.end(), v) - ids.begin());
      d[i][j] = 1;
      d[j][i] = 1;
    }
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  int best = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (d[i][j] >= inf) return kUnreachable;
      best = std::max(best, d[i][j]);
    }
  return best;
}

DirectedGraph random_graph(Rng& rng, std::size_t n, double edge_prob) {
  DirectedGraph g;
  for (std::size_t i = 0; i < n; ++i) g.add_node(i);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && rng.uniform() < edge_prob) g.add_edge(i, j);
  return g;
}

}  // namespace

TEST_CASE("graph mutation keeps the structure consistent") {
  DirectedGraph g;
  g.add_node(1);
  g.add_node(2);
  g.add_node(3);
  g.add_edge(1, 2);
  g.add_edge(3, 2);
  CHECK(g.size() == 3);
  CHECK(g.edge_count() == 2);
  CHECK(g.has_edge(1, 2));
  CHECK_FALSE(g.has_edge(2, 1));
  CHECK(g.out(1) == std::vector<NodeId>{2});
  CHECK(g.in_degrees().at(2) == 2);

  g.remove_node(2);  // takes incoming and outgoing edges with it
  CHECK(g.size() == 2);
  CHECK(g.edge_count() == 0);
  CHECK_FALSE(g.has_node(2));

  CHECK_THROWS_AS(g.add_edge(1, 1), PreconditionError);
  CHECK_THROWS_AS(g.add_edge(1, 99), PreconditionError);
  CHECK_THROWS_AS(g.out(99), PreconditionError);
}

TEST_CASE("to_undirected closes edges symmetrically") {
  DirectedGraph g;
  g.add_node(0);
  g.add_node(1);
  g.add_edge(0, 1);
  const DirectedGraph u = to_undirected(g);
  CHECK(u.has_edge(0, 1));
  CHECK(u.has_edge(1, 0));
}

TEST_CASE("diameter handles the canonical hand cases") {
  DirectedGraph path;
  for (NodeId i = 0; i < 4; ++i) path.add_node(i);
  path.add_edge(0, 1);
  path.add_edge(1, 2);
  path.add_edge(2, 3);
  CHECK(graph_diameter(path) == 3);

  CHECK(graph_diameter(gen_star(10)) == 2);
  CHECK(graph_diameter(gen_complete(5)) == 1);

  DirectedGraph single;
  single.add_node(7);
  CHECK(graph_diameter(single) == 0);

  DirectedGraph split;
  split.add_node(0);
  split.add_node(1);
  CHECK(graph_diameter(split) == kUnreachable);
  CHECK_FALSE(is_connected(split));
}

TEST_CASE("diameter agrees with a Floyd-Warshall oracle on random graphs") {
  Rng rng(404);
  for (int c = 0; c < 200; ++c) {
    const std::size_t n = 2 + rng.below(29);
    const double p = 0.03 + 0.25 * rng.uniform();
    const DirectedGraph g = random_graph(rng, n, p);
    const int expected = floyd_warshall_diameter(g);
    CHECK(graph_diameter(g) == expected);
    CHECK(is_connected(g) == (expected != kUnreachable));
  }
}

TEST_CASE("detect_hubs matches a brute-force scan, ordered correctly") {
  Rng rng(7);
  for (int c = 0; c < 200; ++c) {
    const std::size_t n = 2 + rng.below(20);
    const DirectedGraph g = random_graph(rng, n, 0.5);
    const double fraction = 0.3 + 0.5 * rng.uniform();

    const auto in = g.in_degrees();
    std::vector<std::pair<std::size_t, NodeId>> expect;
    for (const auto& [id, deg] : in)
      if (static_cast<double>(deg) >= fraction * static_cast<double>(n - 1))
        expect.emplace_back(deg, id);
    std::sort(expect.begin(), expect.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    std::vector<NodeId> expect_ids;
    for (const auto& [deg, id] : expect) expect_ids.push_back(id);

    CHECK(detect_hubs(g, fraction) == expect_ids);
  }
}

TEST_CASE("star topology has one hub: the center") {
  const DirectedGraph g = gen_star(20);
  CHECK(detect_hubs(g) == std::vector<NodeId>{0});
  for (NodeId i = 1; i < 20; ++i) {
    CHECK(g.has_edge(0, i));
    CHECK(g.has_edge(i, 0));
  }
  CHECK_THROWS_AS(gen_star(1), ConfigError);
}

TEST_CASE("multistar wires servers completely and workers round-robin") {
  const DirectedGraph g = gen_multistar(11, 3);
  for (NodeId a = 0; a < 3; ++a)
    for (NodeId b = 0; b < 3; ++b)
      if (a != b) CHECK(g.has_edge(a, b));
  for (NodeId w = 3; w < 11; ++w) {
    const NodeId server = (w - 3) % 3;
    CHECK(g.has_edge(w, server));
    CHECK(g.has_edge(server, w));
    CHECK(g.out(w).size() == 1);
  }
  CHECK_THROWS_AS(gen_multistar(3, 3), ConfigError);
}

TEST_CASE("ring links every node to exactly two neighbors") {
  const DirectedGraph g = gen_ring(7);
  for (NodeId i = 0; i < 7; ++i) {
    const auto out = g.out(i);
    CHECK(out.size() == 2);
    CHECK(g.has_edge(i, (i + 1) % 7));
    CHECK(g.has_edge(i, (i + 6) % 7));
  }
  CHECK(graph_diameter(g) == 3);
  CHECK_THROWS_AS(gen_ring(2), ConfigError);
}

TEST_CASE("chord adds power-of-two fingers symmetrically") {
  const DirectedGraph g = gen_chord(8);
  // node 0 reaches +1, +2, +4 and is reached from 7 (+1), 6 (+2), 4 (+4)
  CHECK(g.out(0) == std::vector<NodeId>{1, 2, 4, 6, 7});
  for (NodeId u = 0; u < 8; ++u)
    for (NodeId v : g.out(u)) CHECK(g.has_edge(v, u));
  CHECK_THROWS_AS(gen_chord(2), ConfigError);
}

TEST_CASE("k-regular graphs are exactly k-regular, symmetric, connected") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const DirectedGraph g = gen_kregular(30, 7, seed);
    CHECK(g.size() == 30);
    const auto in = g.in_degrees();
    for (NodeId i = 0; i < 30; ++i) {
      CHECK(g.out(i).size() == 7);
      CHECK(in.at(i) == 7);
      for (NodeId v : g.out(i)) CHECK(g.has_edge(v, i));
    }
    CHECK(is_connected(g));
  }

  const DirectedGraph a = gen_kregular(40, 6, 9);
  const DirectedGraph b = gen_kregular(40, 6, 9);
  CHECK(a.adjacency() == b.adjacency());

  CHECK_THROWS_AS(gen_kregular(9, 3, 1), ConfigError);    // odd n*k
  CHECK_THROWS_AS(gen_kregular(10, 10, 1), ConfigError);  // k >= n
}

TEST_CASE("edge list export is sorted and exact") {
  DirectedGraph g;
  g.add_node(2);
  g.add_node(0);
  g.add_node(1);
  g.add_edge(2, 0);
  g.add_edge(0, 2);
  g.add_edge(0, 1);
  std::ostringstream out;
  write_edge_list(out, g);
  CHECK(out.str() == "0 1\n0 2\n2 0\n");
}
