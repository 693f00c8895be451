#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <vector>

#include "healsim/types.hpp"

namespace healsim {

/// Directed overlay graph. An edge u -> v means v sits in u's cache.
/// Node iteration is always ascending by id.
class DirectedGraph {
 public:
  void add_node(NodeId id);
  void remove_node(NodeId id);  // drops the node and every edge touching it
  void add_edge(NodeId from, NodeId to);

  bool has_node(NodeId id) const { return adj_.count(id) != 0; }
  bool has_edge(NodeId from, NodeId to) const;
  std::size_t size() const { return adj_.size(); }
  std::size_t edge_count() const;

  /// Out-neighbors of id, ascending.
  std::vector<NodeId> out(NodeId id) const;
  std::vector<NodeId> nodes() const;
  std::map<NodeId, std::size_t> in_degrees() const;

  const std::map<NodeId, std::set<NodeId>>& adjacency() const { return adj_; }

 private:
  std::map<NodeId, std::set<NodeId>> adj_;
};

/// Symmetric closure: (u,v) present iff u->v or v->u in the input.
DirectedGraph to_undirected(const DirectedGraph& g);

inline constexpr int kUnreachable = -1;

/// Longest shortest path on the undirected closure (BFS from every node).
/// Returns kUnreachable for a disconnected graph, 0 for fewer than 2 nodes.
int graph_diameter(const DirectedGraph& g);

/// True when the undirected closure has a single connected component.
bool is_connected(const DirectedGraph& g);

/// Nodes with in-degree >= fraction * (n - 1), ordered by in-degree
/// descending, then id ascending.
std::vector<NodeId> detect_hubs(const DirectedGraph& g, double min_indegree_fraction = 0.9);

// Static topology generators. All emit symmetric edge sets over ids 0..n-1.
DirectedGraph gen_star(std::size_t n);
DirectedGraph gen_multistar(std::size_t n, std::size_t s);
DirectedGraph gen_ring(std::size_t n);
DirectedGraph gen_kregular(std::size_t n, std::size_t k, std::uint64_t seed);
DirectedGraph gen_chord(std::size_t n);
DirectedGraph gen_complete(std::size_t n);

/// Plain edge list, one "u v" line per directed edge, u ascending then v.
void write_edge_list(std::ostream& out, const DirectedGraph& g);

}  // namespace healsim
