#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "healsim/world.hpp"

namespace healsim {

enum class Role { Hub, Client };

/// A node is a hub exactly when the current graph says so.
Role role_assignment(NodeId node, const DirectedGraph& graph,
                     double min_indegree_fraction = 0.9);

/// One learning protocol advanced cycle by cycle. step() is called once per
/// cycle after the engine has refreshed the world's graph and hub set.
class Protocol {
 public:
  virtual ~Protocol() = default;
  virtual void step(World& w) = 0;
};

struct HealOptions {
  std::size_t s = 1;  // clients send their model to s distinct hubs
  bool weighted_hub_average = false;
};

/// Hub-based learning on whatever hub set the world reports. Per cycle:
/// every node folds in globals received last cycle; clients train and send
/// to s hubs from their own hub view; hubs collect for one cycle window,
/// exchange aggregates, and return the unweighted average of aggregates to
/// the clients that sent this cycle. Hubs do not train.
class HealProtocol : public Protocol {
 public:
  explicit HealProtocol(HealOptions opt) : opt_(opt) {}
  void step(World& w) override;

  /// Global model each hub computed in the last step; hubs that collected
  /// nothing are absent.
  const std::map<NodeId, ModelParams>& last_globals() const { return last_globals_; }

 private:
  HealOptions opt_;
  std::map<NodeId, ModelParams> last_globals_;
};

/// Centralized baseline: all clients train and send to one fixed server,
/// which broadcasts the average back. A crashed server halts the protocol
/// permanently (nothing trains afterwards).
class FedAvgProtocol : public Protocol {
 public:
  explicit FedAvgProtocol(NodeId server) : server_(server) {}
  void step(World& w) override;

  bool halted() const { return halted_; }
  const std::optional<ModelParams>& last_global() const { return last_global_; }

 private:
  NodeId server_;
  bool halted_ = false;
  std::optional<ModelParams> last_global_;
};

/// Multi-star baseline: statically assigned servers aggregate their own
/// workers, exchange aggregates all-to-all, and distribute. A crashed server
/// orphans its workers (they keep training locally, their sends drop).
class GaiaProtocol : public Protocol {
 public:
  GaiaProtocol(std::vector<NodeId> servers, std::map<NodeId, NodeId> worker_to_server)
      : servers_(std::move(servers)), assignment_(std::move(worker_to_server)) {}
  void step(World& w) override;

 private:
  std::vector<NodeId> servers_;
  std::map<NodeId, NodeId> assignment_;
};

/// Every node trains, then pushes its model to one uniformly chosen live
/// neighbor; receivers merge by pairwise mean, in sender order.
class GossipProtocol : public Protocol {
 public:
  void step(World& w) override;
};

/// Every node trains, then pushes to all live neighbors; at cycle end each
/// node replaces its model with the mean of its own and everything received.
class EpidemicProtocol : public Protocol {
 public:
  void step(World& w) override;
};

}  // namespace healsim
