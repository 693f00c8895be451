#include "healsim/protocols.hpp"

#include <algorithm>
#include <utility>

#include "healsim/errors.hpp"
#include "healsim/rng.hpp"

namespace healsim {

Role role_assignment(NodeId node, const DirectedGraph& graph, double min_indegree_fraction) {
  for (NodeId h : detect_hubs(graph, min_indegree_fraction))
    if (h == node) return Role::Hub;
  return Role::Client;
}

namespace {

// Folds any GlobalModel messages waiting in a node's inbox into its model.
// Everything else in the inbox was addressed to a role the node no longer
// holds (or never held) and is discarded as lost.
void merge_received_globals(World& w) {
  for (auto& [u, st] : w.nodes) {
    ModelAverager avg;
    for (Message& m : w.bus.take_inbox(u))
      if (m.kind == MsgKind::GlobalModel) avg.add(m.payload);
    if (!avg.empty()) st.model = avg.finish();
  }
}

ModelParams client_train(World& w, NodeId u, NodeState& st) {
  if (st.shard.indices.empty()) return st.model;  // data-less joiner keeps its model
  Rng rng(derive_seed(w.rep_seed, {seed_tag::kTrain, w.cycle, u}));
  st.model = train_step(st.model, st.shard, w.hyper, rng);
  return st.model;
}

// What one aggregator gathered in its collect window.
struct Collected {
  ModelParams aggregate;
  std::uint64_t weight = 0;            // number of client models averaged
  std::vector<NodeId> backwards_list;  // senders, ascending
};

// Drains an aggregator's inbox of ClientModel messages; inbox order (sender
// ascending) fixes the summation order, so every aggregator sums the same
// multiset in the same order.
std::optional<Collected> collect_client_models(World& w, NodeId hub) {
  ModelAverager avg;
  Collected col;
  for (Message& m : w.bus.take_inbox(hub)) {
    if (m.kind != MsgKind::ClientModel) continue;
    avg.add(m.payload);
    col.backwards_list.push_back(m.from);
  }
  if (avg.empty()) return std::nullopt;
  col.aggregate = avg.finish();
  col.weight = avg.count();
  return col;
}

// Average of the aggregates keyed by origin hub id: ascending-id order makes
// every hub compute bitwise the same global from the same aggregate set.
ModelParams combine_aggregates(const std::map<NodeId, std::pair<ModelParams, std::uint64_t>>& by_origin,
                               bool weighted) {
  if (!weighted) {
    ModelAverager avg;
    for (const auto& [id, entry] : by_origin) avg.add(entry.first);
    return avg.finish();
  }
  ModelParams out;
  double total = 0.0;
  for (const auto& [id, entry] : by_origin) {
    const auto& [model, weight] = entry;
    if (out.values.empty()) {
      out.spec = model.spec;
      out.values.assign(model.values.size(), 0.0);
    }
    for (std::size_t j = 0; j < out.values.size(); ++j)
      out.values[j] += static_cast<double>(weight) * model.values[j];
    total += static_cast<double>(weight);
  }
  for (double& v : out.values) v /= total;
  return out;
}

}  // namespace

void HealProtocol::step(World& w) {
  const std::set<NodeId> live = w.live_set();
  last_globals_.clear();

  w.bus.deliver(live);
  merge_received_globals(w);

  const std::set<NodeId> hub_set(w.current_hubs.begin(), w.current_hubs.end());

  // Clients train and send to s distinct hubs from their own hub view; an
  // empty view means the node trains but skips sending this cycle.
  for (auto& [u, st] : w.nodes) {
    if (hub_set.count(u) != 0) continue;
    ModelParams trained = client_train(w, u, st);
    std::vector<NodeId> view = w.hub_view(u);
    if (view.empty()) continue;
    Rng rng(derive_seed(w.rep_seed, {seed_tag::kChooseHubs, w.cycle, u}));
    const std::size_t k = std::min(opt_.s, view.size());
    for (NodeId hub : rng.sample_without_replacement(std::move(view), k))
      w.bus.send({MsgKind::ClientModel, u, hub, trained, w.cycle});
  }
  w.bus.deliver(live);

  // Collect window: each hub averages what arrived and announces the
  // aggregate to the other hubs it knows of. A hub with no clients this
  // cycle contributes nothing.
  std::map<NodeId, Collected> collected;
  for (NodeId hub : w.current_hubs) {
    if (!w.live(hub)) continue;
    auto col = collect_client_models(w, hub);
    if (!col) continue;
    std::vector<NodeId> peers = w.hub_view(hub);
    for (NodeId other : peers) {
      if (other == hub) continue;
      w.bus.send({MsgKind::HubAggregate, hub, other, col->aggregate, w.cycle, col->weight});
    }
    collected.emplace(hub, std::move(*col));
  }
  w.bus.deliver(live);

  // Every contributing hub combines its own aggregate with whatever arrived
  // within the cycle window and answers the clients that sent to it.
  for (NodeId hub : w.current_hubs) {
    if (!w.live(hub)) continue;
    std::map<NodeId, std::pair<ModelParams, std::uint64_t>> by_origin;
    for (Message& m : w.bus.take_inbox(hub)) {
      if (m.kind != MsgKind::HubAggregate) continue;
      by_origin.emplace(m.from, std::make_pair(std::move(m.payload), m.weight));
    }
    auto own = collected.find(hub);
    if (own == collected.end()) continue;
    by_origin.emplace(hub, std::make_pair(std::move(own->second.aggregate), own->second.weight));

    ModelParams global = combine_aggregates(by_origin, opt_.weighted_hub_average);
    w.nodes.at(hub).model = global;
    for (NodeId client : own->second.backwards_list)
      w.bus.send({MsgKind::GlobalModel, hub, client, global, w.cycle});
    last_globals_.emplace(hub, std::move(global));
  }
}

void FedAvgProtocol::step(World& w) {
  const std::set<NodeId> live = w.live_set();
  w.bus.deliver(live);

  if (!w.live(server_)) halted_ = true;
  if (halted_) {
    // Single point of failure: with the server gone the protocol is over.
    // Nothing trains, so the accuracy series freezes.
    for (auto& [u, st] : w.nodes) w.bus.take_inbox(u);
    return;
  }

  merge_received_globals(w);

  for (auto& [u, st] : w.nodes) {
    if (u == server_) continue;
    ModelParams trained = client_train(w, u, st);
    w.bus.send({MsgKind::ClientModel, u, server_, std::move(trained), w.cycle});
  }
  w.bus.deliver(live);

  auto col = collect_client_models(w, server_);
  if (!col) return;
  std::map<NodeId, std::pair<ModelParams, std::uint64_t>> by_origin;
  by_origin.emplace(server_, std::make_pair(std::move(col->aggregate), col->weight));
  ModelParams global = combine_aggregates(by_origin, false);
  w.nodes.at(server_).model = global;
  for (NodeId client : col->backwards_list)
    w.bus.send({MsgKind::GlobalModel, server_, client, global, w.cycle});
  last_global_ = std::move(global);
}

void GaiaProtocol::step(World& w) {
  const std::set<NodeId> live = w.live_set();
  w.bus.deliver(live);
  merge_received_globals(w);

  const std::set<NodeId> server_set(servers_.begin(), servers_.end());

  // Workers train every cycle; a worker whose server crashed keeps training
  // locally, its sends just drop.
  for (auto& [u, st] : w.nodes) {
    if (server_set.count(u) != 0) continue;
    ModelParams trained = client_train(w, u, st);
    auto it = assignment_.find(u);
    if (it == assignment_.end()) continue;
    w.bus.send({MsgKind::ClientModel, u, it->second, std::move(trained), w.cycle});
  }
  w.bus.deliver(live);

  std::map<NodeId, Collected> collected;
  for (NodeId srv : servers_) {
    if (!w.live(srv)) continue;
    auto col = collect_client_models(w, srv);
    if (!col) continue;
    for (NodeId other : servers_) {
      if (other == srv || !w.live(other)) continue;
      w.bus.send({MsgKind::HubAggregate, srv, other, col->aggregate, w.cycle, col->weight});
    }
    collected.emplace(srv, std::move(*col));
  }
  w.bus.deliver(live);

  for (NodeId srv : servers_) {
    if (!w.live(srv)) continue;
    std::map<NodeId, std::pair<ModelParams, std::uint64_t>> by_origin;
    for (Message& m : w.bus.take_inbox(srv)) {
      if (m.kind != MsgKind::HubAggregate) continue;
      by_origin.emplace(m.from, std::make_pair(std::move(m.payload), m.weight));
    }
    auto own = collected.find(srv);
    if (own == collected.end()) continue;
    by_origin.emplace(srv, std::make_pair(std::move(own->second.aggregate), own->second.weight));

    ModelParams global = combine_aggregates(by_origin, false);
    w.nodes.at(srv).model = global;
    for (NodeId worker : own->second.backwards_list)
      w.bus.send({MsgKind::GlobalModel, srv, worker, global, w.cycle});
  }
}

void GossipProtocol::step(World& w) {
  const std::set<NodeId> live = w.live_set();

  for (auto& [u, st] : w.nodes) {
    ModelParams trained = client_train(w, u, st);
    std::vector<NodeId> neighbors;
    for (NodeId v : w.current_graph.out(u))
      if (w.live(v)) neighbors.push_back(v);
    if (neighbors.empty()) continue;
    Rng rng(derive_seed(w.rep_seed, {seed_tag::kGossipPeer, w.cycle, u}));
    const NodeId peer = neighbors[rng.below(neighbors.size())];
    w.bus.send({MsgKind::GossipPush, u, peer, std::move(trained), w.cycle});
  }
  w.bus.deliver(live);

  for (auto& [u, st] : w.nodes) {
    for (Message& m : w.bus.take_inbox(u)) {
      if (m.kind != MsgKind::GossipPush) continue;
      ModelAverager avg;
      avg.add(st.model);
      avg.add(m.payload);
      st.model = avg.finish();
    }
  }
}

void EpidemicProtocol::step(World& w) {
  const std::set<NodeId> live = w.live_set();

  for (auto& [u, st] : w.nodes) {
    ModelParams trained = client_train(w, u, st);
    for (NodeId v : w.current_graph.out(u)) {
      if (!w.live(v)) continue;
      w.bus.send({MsgKind::GossipPush, u, v, trained, w.cycle});
    }
  }
  w.bus.deliver(live);

  for (auto& [u, st] : w.nodes) {
    ModelAverager avg;
    avg.add(st.model);
    for (Message& m : w.bus.take_inbox(u)) {
      if (m.kind != MsgKind::GossipPush) continue;
      avg.add(m.payload);
    }
    st.model = avg.finish();
  }
}

}  // namespace healsim
