#pragma once

#include <map>
#include <set>
#include <vector>

#include "healsim/dataset.hpp"
#include "healsim/elevator.hpp"
#include "healsim/graph.hpp"
#include "healsim/message.hpp"
#include "healsim/model.hpp"
#include "healsim/types.hpp"

namespace healsim {

struct NodeState {
  ModelParams model;
  DataShard shard;
};

/// All mutable state of one repetition. The engine owns it; protocol steps
/// mutate it one cycle at a time.
struct World {
  std::uint64_t rep_seed = 0;
  std::uint64_t cycle = 0;  // 1-based; 0 before the first cycle
  Hyperparams hyper;
  std::map<NodeId, NodeState> nodes;  // live nodes only
  MessageBus bus;

  bool dynamic = false;
  ElevatorOverlay overlay;     // used when dynamic
  DirectedGraph static_graph;  // used otherwise

  // Refreshed by the engine before every protocol step.
  DirectedGraph current_graph;
  std::vector<NodeId> current_hubs;

  bool live(NodeId id) const { return nodes.count(id) != 0; }

  std::set<NodeId> live_set() const {
    std::set<NodeId> out;
    for (const auto& [id, st] : nodes) out.insert(id);
    return out;
  }

  std::vector<NodeId> live_ids() const {
    std::vector<NodeId> out;
    out.reserve(nodes.size());
    for (const auto& [id, st] : nodes) out.push_back(id);
    return out;
  }

  /// Where this node believes the hubs are. Dynamic overlays give each node
  /// its own (possibly stale) view; static topologies share the true set.
  std::vector<NodeId> hub_view(NodeId id) const {
    return dynamic ? overlay.hub_view(id) : current_hubs;
  }

  void refresh_graph() {
    current_graph = dynamic ? overlay.graph() : static_graph;
    current_hubs = detect_hubs(current_graph);
  }

  /// Crash-stop removal: node state, overlay/topology entry, and any
  /// messages addressed to it all go away.
  void kill(NodeId id) {
    nodes.erase(id);
    if (dynamic) {
      overlay.kill(id);
    } else {
      static_graph.remove_node(id);
    }
    bus.discard_for(id);
  }
};

}  // namespace healsim
