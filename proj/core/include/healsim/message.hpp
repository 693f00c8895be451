#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "healsim/model.hpp"
#include "healsim/types.hpp"

namespace healsim {

enum class MsgKind { ClientModel, HubAggregate, GlobalModel, GossipPush };

struct Message {
  MsgKind kind = MsgKind::ClientModel;
  NodeId from = 0;
  NodeId to = 0;
  ModelParams payload;
  std::uint64_t cycle_sent = 0;
  std::uint64_t weight = 1;  // HubAggregate: how many client models it averages
};

/// Buffered message transport. send() queues into the outbox; deliver() moves
/// everything queued so far into per-recipient inboxes, dropping (and
/// counting) messages whose recipient is not in the live set. A message is
/// never readable in the delivery window it was sent in.
class MessageBus {
 public:
  void send(Message m);

  /// Inbox order is (sender id ascending, emission order).
  void deliver(const std::set<NodeId>& live);

  std::vector<Message> take_inbox(NodeId id);

  /// Discards queued and delivered messages addressed to id, counting them
  /// as dropped. Used when a node crashes.
  void discard_for(NodeId id);

  std::uint64_t total_sent() const { return sent_; }
  std::uint64_t total_dropped() const { return dropped_; }
  std::size_t pending() const { return outbox_.size(); }

 private:
  std::vector<Message> outbox_;
  std::map<NodeId, std::vector<Message>> inboxes_;
  std::uint64_t seq_ = 0;
  std::uint64_t sent_ = 0;
  std::uint64_t dropped_ = 0;
  std::vector<std::uint64_t> outbox_seq_;
};

}  // namespace healsim
