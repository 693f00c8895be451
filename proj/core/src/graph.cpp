#include "healsim/graph.hpp"

#include <algorithm>
#include <deque>
#include <ostream>
#include <string>
#include <utility>

#include "healsim/errors.hpp"
#include "healsim/rng.hpp"

namespace healsim {

void DirectedGraph::add_node(NodeId id) { adj_.try_emplace(id); }

void DirectedGraph::remove_node(NodeId id) {
  adj_.erase(id);
  for (auto& [u, targets] : adj_) targets.erase(id);
}

void DirectedGraph::add_edge(NodeId from, NodeId to) {
  if (from == to) throw PreconditionError("graph: self-loop on node " + std::to_string(from));
  auto it = adj_.find(from);
  if (it == adj_.end() || adj_.count(to) == 0)
    throw PreconditionError("graph: edge endpoint not present");
  it->second.insert(to);
}

bool DirectedGraph::has_edge(NodeId from, NodeId to) const {
  auto it = adj_.find(from);
  return it != adj_.end() && it->second.count(to) != 0;
}

std::size_t DirectedGraph::edge_count() const {
  std::size_t total = 0;
  for (const auto& [u, targets] : adj_) total += targets.size();
  return total;
}

std::vector<NodeId> DirectedGraph::out(NodeId id) const {
  auto it = adj_.find(id);
  if (it == adj_.end()) throw PreconditionError("graph: unknown node " + std::to_string(id));
  return {it->second.begin(), it->second.end()};
}

std::vector<NodeId> DirectedGraph::nodes() const {
  std::vector<NodeId> out;
  out.reserve(adj_.size());
  for (const auto& [u, targets] : adj_) out.push_back(u);
  return out;
}

std::map<NodeId, std::size_t> DirectedGraph::in_degrees() const {
  std::map<NodeId, std::size_t> deg;
  for (const auto& [u, targets] : adj_) deg.emplace(u, 0);
  for (const auto& [u, targets] : adj_)
    for (NodeId v : targets) ++deg.at(v);
  return deg;
}

DirectedGraph to_undirected(const DirectedGraph& g) {
  DirectedGraph out;
  for (const auto& [u, targets] : g.adjacency()) out.add_node(u);
  for (const auto& [u, targets] : g.adjacency()) {
    for (NodeId v : targets) {
      out.add_edge(u, v);
      out.add_edge(v, u);
    }
  }
  return out;
}

namespace {

// BFS eccentricity of src on the undirected closure; kUnreachable when some
// node is not reached.
int eccentricity(const std::map<NodeId, std::set<NodeId>>& und, NodeId src) {
  std::map<NodeId, int> dist;
  dist[src] = 0;
  std::deque<NodeId> queue{src};
  int far = 0;
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    const int d = dist[u];
    far = std::max(far, d);
    for (NodeId v : und.at(u)) {
      if (dist.emplace(v, d + 1).second) queue.push_back(v);
    }
  }
  if (dist.size() != und.size()) return kUnreachable;
  return far;
}

}  // namespace

int graph_diameter(const DirectedGraph& g) {
  if (g.size() < 2) return 0;
  const DirectedGraph und = to_undirected(g);
  int diameter = 0;
  for (const auto& [u, targets] : und.adjacency()) {
    const int ecc = eccentricity(und.adjacency(), u);
    if (ecc == kUnreachable) return kUnreachable;
    diameter = std::max(diameter, ecc);
  }
  return diameter;
}

bool is_connected(const DirectedGraph& g) {
  if (g.size() < 2) return true;
  const DirectedGraph und = to_undirected(g);
  return eccentricity(und.adjacency(), und.adjacency().begin()->first) != kUnreachable;
}

std::vector<NodeId> detect_hubs(const DirectedGraph& g, double min_indegree_fraction) {
  if (g.size() == 0) return {};
  const double threshold = min_indegree_fraction * static_cast<double>(g.size() - 1);
  std::vector<std::pair<NodeId, std::size_t>> qualifying;
  for (const auto& [id, deg] : g.in_degrees())
    if (static_cast<double>(deg) >= threshold) qualifying.emplace_back(id, deg);
  std::sort(qualifying.begin(), qualifying.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<NodeId> hubs;
  hubs.reserve(qualifying.size());
  for (const auto& [id, deg] : qualifying) hubs.push_back(id);
  return hubs;
}

namespace {

DirectedGraph empty_graph(std::size_t n) {
  DirectedGraph g;
  for (std::size_t i = 0; i < n; ++i) g.add_node(static_cast<NodeId>(i));
  return g;
}

void add_sym(DirectedGraph& g, NodeId u, NodeId v) {
  g.add_edge(u, v);
  g.add_edge(v, u);
}

}  // namespace

DirectedGraph gen_star(std::size_t n) {
  if (n < 2) throw ConfigError("gen_star: need n >= 2");
  DirectedGraph g = empty_graph(n);
  for (std::size_t i = 1; i < n; ++i) add_sym(g, 0, static_cast<NodeId>(i));
  return g;
}

DirectedGraph gen_multistar(std::size_t n, std::size_t s) {
  if (s < 1 || n <= s) throw ConfigError("gen_multistar: need 1 <= servers < n");
  DirectedGraph g = empty_graph(n);
  for (std::size_t a = 0; a < s; ++a)
    for (std::size_t b = a + 1; b < s; ++b) add_sym(g, static_cast<NodeId>(a), static_cast<NodeId>(b));
  for (std::size_t i = s; i < n; ++i)
    add_sym(g, static_cast<NodeId>(i), static_cast<NodeId>((i - s) % s));
  return g;
}

DirectedGraph gen_ring(std::size_t n) {
  if (n < 3) throw ConfigError("gen_ring: need n >= 3");
  DirectedGraph g = empty_graph(n);
  for (std::size_t i = 0; i < n; ++i)
    add_sym(g, static_cast<NodeId>(i), static_cast<NodeId>((i + 1) % n));
  return g;
}

DirectedGraph gen_kregular(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 1 || k >= n) throw ConfigError("gen_kregular: need 1 <= k < n");
  if ((n * k) % 2 != 0) throw ConfigError("gen_kregular: n * k must be even");

  // Stub matching: pair off degree stubs at random, keep only suitable pairs
  // (no loop, no duplicate edge), recycle the rest. Restart when stuck or the
  // result is disconnected.
  Rng rng(derive_seed(seed, {seed_tag::kTopology}));
  constexpr int kMaxAttempts = 300;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    DirectedGraph g = empty_graph(n);
    std::set<std::pair<NodeId, NodeId>> edges;
    std::vector<NodeId> stubs;
    stubs.reserve(n * k);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < k; ++j) stubs.push_back(static_cast<NodeId>(i));

    bool stuck = false;
    while (!stubs.empty()) {
      rng.shuffle(stubs);
      std::vector<NodeId> leftover;
      bool progress = false;
      for (std::size_t p = 0; p + 1 < stubs.size(); p += 2) {
        NodeId u = stubs[p], v = stubs[p + 1];
        if (u > v) std::swap(u, v);
        if (u == v || edges.count({u, v}) != 0) {
          leftover.push_back(stubs[p]);
          leftover.push_back(stubs[p + 1]);
        } else {
          edges.insert({u, v});
          progress = true;
        }
      }
      if (!progress) {
        stuck = true;
        break;
      }
      stubs = std::move(leftover);
    }
    if (stuck) continue;
    for (const auto& [u, v] : edges) add_sym(g, u, v);
    if (is_connected(g)) return g;
  }
  throw ConfigError("gen_kregular: no connected " + std::to_string(k) + "-regular graph on " +
                    std::to_string(n) + " nodes after " + std::to_string(kMaxAttempts) +
                    " attempts");
}

DirectedGraph gen_chord(std::size_t n) {
  if (n < 3) throw ConfigError("gen_chord: need n >= 3");
  DirectedGraph g = empty_graph(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t step = 1; step < n; step *= 2)
      add_sym(g, static_cast<NodeId>(i), static_cast<NodeId>((i + step) % n));
  return g;
}

DirectedGraph gen_complete(std::size_t n) {
  if (n < 2) throw ConfigError("gen_complete: need n >= 2");
  DirectedGraph g = empty_graph(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) add_sym(g, static_cast<NodeId>(a), static_cast<NodeId>(b));
  return g;
}

void write_edge_list(std::ostream& out, const DirectedGraph& g) {
  for (const auto& [u, targets] : g.adjacency())
    for (NodeId v : targets) out << u << ' ' << v << '\n';
}

}  // namespace healsim
