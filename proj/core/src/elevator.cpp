#include "healsim/elevator.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>

#include "healsim/errors.hpp"

namespace healsim {

FrequencyMap build_frequency_map(const std::vector<std::vector<NodeId>>& neighbor_lists,
                                 NodeId self) {
  std::unordered_map<NodeId, std::uint32_t> counts;
  for (const auto& list : neighbor_lists)
    for (NodeId id : list)
      if (id != self) ++counts[id];

  FrequencyMap freq;
  freq.entries.assign(counts.begin(), counts.end());
  std::sort(freq.entries.begin(), freq.entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return freq;
}

std::vector<NodeId> select_preferred(const FrequencyMap& freq, std::size_t c) {
  const std::size_t take = std::min(c, freq.entries.size());
  std::vector<NodeId> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(freq.entries[i].first);
  return out;
}

std::vector<std::vector<NodeId>> collect_two_hop(NodeId node, const DirectedGraph& g) {
  std::vector<std::vector<NodeId>> lists;
  for (NodeId v : g.out(node))
    if (g.has_node(v)) lists.push_back(g.out(v));
  return lists;
}

std::vector<NodeId> refill_cache(const FrequencyMap& freq, const std::vector<NodeId>& backward_pool,
                                 NodeId self, std::size_t h, std::size_t c, Rng& rng) {
  if (h > c) throw PreconditionError("refill_cache: h > c");

  std::vector<NodeId> cache = select_preferred(freq, h);

  // The pooled backward lists form a multiset; draws stay
  // multiplicity-weighted, one element consumed per draw, duplicates of an
  // already-chosen id simply burn the copy.
  std::set<NodeId> chosen(cache.begin(), cache.end());
  chosen.insert(self);
  std::vector<NodeId> pool;
  for (NodeId id : backward_pool)
    if (chosen.count(id) == 0) pool.push_back(id);

  std::size_t want = c - h;
  while (want > 0 && !pool.empty()) {
    const std::size_t at = rng.below(pool.size());
    const NodeId id = pool[at];
    pool[at] = pool.back();
    pool.pop_back();
    if (chosen.insert(id).second) {
      cache.push_back(id);
      --want;
    }
  }
  return cache;
}

ElevatorOverlay::ElevatorOverlay(std::size_t h, std::size_t c, std::uint64_t seed)
    : h_(h), c_(c), seed_(seed) {
  if (h > c) throw ConfigError("elevator: h must not exceed c");
  if (c == 0) throw ConfigError("elevator: c must be positive");
}

void ElevatorOverlay::bootstrap(const DirectedGraph& g) {
  states_.clear();
  for (NodeId id : g.nodes()) {
    OverlayState st;
    st.cache = g.out(id);
    if (st.cache.size() > c_)
      throw PreconditionError("elevator: bootstrap degree exceeds cache size c");
    states_.emplace(id, std::move(st));
  }
}

void ElevatorOverlay::add_node(NodeId id, std::vector<NodeId> initial_cache) {
  if (contains(id)) throw PreconditionError("elevator: node id already present");
  if (initial_cache.size() > c_) initial_cache.resize(c_);
  OverlayState st;
  st.cache = std::move(initial_cache);
  states_.emplace(id, std::move(st));
}

void ElevatorOverlay::kill(NodeId id) { states_.erase(id); }

std::vector<NodeId> ElevatorOverlay::live_ids() const {
  std::vector<NodeId> out;
  out.reserve(states_.size());
  for (const auto& [id, st] : states_) out.push_back(id);
  return out;
}

const OverlayState& ElevatorOverlay::state(NodeId id) const {
  auto it = states_.find(id);
  if (it == states_.end())
    throw PreconditionError("elevator: unknown node " + std::to_string(id));
  return it->second;
}

std::vector<NodeId> ElevatorOverlay::hub_view(NodeId id) const {
  return select_preferred(state(id).last_freq, h_);
}

DirectedGraph ElevatorOverlay::graph() const {
  DirectedGraph g;
  for (const auto& [id, st] : states_) g.add_node(id);
  for (const auto& [id, st] : states_)
    for (NodeId v : st.cache)
      if (contains(v)) g.add_edge(id, v);
  return g;
}

void ElevatorOverlay::run_cycle() {
  ++cycle_;

  // Nodes take their steps one after another in ascending id order, reading
  // whatever state the network holds at that moment. A node processed later
  // in the cycle therefore sees the refreshed caches of earlier nodes, which
  // is what lets a consensus on the hub set ripple through the whole network
  // within a cycle or two instead of one rank per cycle.
  std::vector<NodeId> order;
  order.reserve(states_.size());
  for (const auto& [id, st] : states_) order.push_back(id);

  for (NodeId u : order) {
    auto su = states_.find(u);
    if (su == states_.end()) continue;

    // Two-hop collection: live cache members answer with their own cache
    // contents (which may still name crashed peers); dead members time out.
    std::vector<std::vector<NodeId>> lists;
    for (NodeId v : su->second.cache)
      if (auto it = states_.find(v); it != states_.end())
        lists.push_back(it->second.cache);

    FrequencyMap freq = build_frequency_map(lists, u);
    const std::vector<NodeId> preferred = select_preferred(freq, c_);

    // Contact the preferred peers. Live ones reply with their backward list
    // and remember the contact; crashed ones time out, which is also how the
    // node learns not to re-admit them to its cache.
    std::set<NodeId> responders;
    std::vector<NodeId> pool;
    for (NodeId p : preferred) {
      auto it = states_.find(p);
      if (it == states_.end()) continue;
      responders.insert(p);
      pool.insert(pool.end(), it->second.backward_list.begin(),
                  it->second.backward_list.end());
      it->second.backward_list.insert(u);
    }

    if (responders.empty()) {
      // Every contact timed out (or there was nothing to contact); keep the
      // live part of the old cache and retry next cycle rather than
      // orphaning the node.
      std::vector<NodeId> kept;
      for (NodeId v : su->second.cache)
        if (states_.count(v) != 0) kept.push_back(v);
      su->second.cache = std::move(kept);
      su->second.last_freq = std::move(freq);
      continue;
    }

    FrequencyMap live_freq;
    for (const auto& e : freq.entries)
      if (responders.count(e.first) != 0) live_freq.entries.push_back(e);

    std::vector<NodeId> live_pool;
    for (NodeId id : pool)
      if (states_.count(id) != 0) live_pool.push_back(id);

    Rng rng(derive_seed(seed_, {seed_tag::kElevator, cycle_, u}));
    su->second.cache = refill_cache(live_freq, live_pool, u, h_, c_, rng);
    su->second.last_freq = std::move(freq);
  }
}

}  // namespace healsim
