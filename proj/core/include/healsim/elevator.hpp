#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "healsim/graph.hpp"
#include "healsim/rng.hpp"
#include "healsim/types.hpp"

namespace healsim {

/// Peer occurrence counts, ordered by (count descending, id ascending).
struct FrequencyMap {
  std::vector<std::pair<NodeId, std::uint32_t>> entries;

  bool empty() const { return entries.empty(); }
};

/// Counts occurrences over the concatenated lists, excluding self.
FrequencyMap build_frequency_map(const std::vector<std::vector<NodeId>>& neighbor_lists,
                                 NodeId self);

/// First min(c, |freq|) ids.
std::vector<NodeId> select_preferred(const FrequencyMap& freq, std::size_t c);

/// Caches of the node's live out-neighbors, in cache order. Crashed
/// neighbors contribute nothing.
std::vector<std::vector<NodeId>> collect_two_hop(NodeId node, const DirectedGraph& g);

/// New cache: top-h of freq, then c-h ids sampled uniformly without
/// replacement from the distinct pool (minus self and the ids already
/// chosen). A short pool yields a short cache.
std::vector<NodeId> refill_cache(const FrequencyMap& freq, const std::vector<NodeId>& backward_pool,
                                 NodeId self, std::size_t h, std::size_t c, Rng& rng);

/// One node's view in the peer-sampling layer.
struct OverlayState {
  std::vector<NodeId> cache;       // out-neighbors, |cache| <= c, never self
  std::set<NodeId> backward_list;  // peers that contacted this node; never cleared
  FrequencyMap last_freq;          // from the most recent cycle; top-h is the node's hub view
};

/// The Elevator overlay: every cycle each node counts its two-hop neighbors,
/// contacts the c most frequent ("preferred"), collects their backward lists,
/// and rebuilds its cache from the h most frequent responders plus c-h random
/// picks from the pooled backward lists. Nodes step in ascending id order and
/// read live state, so later nodes see the caches earlier nodes just rebuilt;
/// the order is fixed, which keeps a cycle fully replayable.
class ElevatorOverlay {
 public:
  ElevatorOverlay() = default;
  ElevatorOverlay(std::size_t h, std::size_t c, std::uint64_t seed);

  /// Initial caches = out-neighbors in the bootstrap graph.
  void bootstrap(const DirectedGraph& g);

  void add_node(NodeId id, std::vector<NodeId> initial_cache);
  void kill(NodeId id);
  bool contains(NodeId id) const { return states_.count(id) != 0; }
  std::size_t size() const { return states_.size(); }
  std::vector<NodeId> live_ids() const;

  void run_cycle();
  std::uint64_t cycles_run() const { return cycle_; }

  /// Live-filtered cache graph: edge u -> v iff v is live and in u's cache.
  DirectedGraph graph() const;

  /// The node's current hubs_list: top-h of its latest frequency map. Empty
  /// until the node has run a cycle. May transiently name crashed or demoted
  /// peers; the learning layer treats sends to those as lost.
  std::vector<NodeId> hub_view(NodeId id) const;

  const OverlayState& state(NodeId id) const;
  std::size_t h() const { return h_; }
  std::size_t c() const { return c_; }

 private:
  std::size_t h_ = 0;
  std::size_t c_ = 0;
  std::uint64_t seed_ = 0;
  std::uint64_t cycle_ = 0;
  std::map<NodeId, OverlayState> states_;
};

}  // namespace healsim
