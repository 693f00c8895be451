#include "healsim/message.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

namespace healsim {

void MessageBus::send(Message m) {
  outbox_.push_back(std::move(m));
  outbox_seq_.push_back(seq_++);
  ++sent_;
}

void MessageBus::deliver(const std::set<NodeId>& live) {
  std::vector<std::size_t> order(outbox_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
    if (outbox_[a].from != outbox_[b].from) return outbox_[a].from < outbox_[b].from;
    return outbox_seq_[a] < outbox_seq_[b];
  });
  for (std::size_t i : order) {
    Message& m = outbox_[i];
    if (live.count(m.to) != 0) {
      inboxes_[m.to].push_back(std::move(m));
    } else {
      ++dropped_;
    }
  }
  outbox_.clear();
  outbox_seq_.clear();
}

std::vector<Message> MessageBus::take_inbox(NodeId id) {
  auto it = inboxes_.find(id);
  if (it == inboxes_.end()) return {};
  std::vector<Message> out = std::move(it->second);
  inboxes_.erase(it);
  return out;
}

void MessageBus::discard_for(NodeId id) {
  if (auto it = inboxes_.find(id); it != inboxes_.end()) {
    dropped_ += it->second.size();
    inboxes_.erase(it);
  }
  std::size_t kept = 0;
  for (std::size_t i = 0; i < outbox_.size(); ++i) {
    if (outbox_[i].to == id) {
      ++dropped_;
    } else {
      if (kept != i) {
        outbox_[kept] = std::move(outbox_[i]);
        outbox_seq_[kept] = outbox_seq_[i];
      }
      ++kept;
    }
  }
  outbox_.resize(kept);
  outbox_seq_.resize(kept);
}

}  // namespace healsim
