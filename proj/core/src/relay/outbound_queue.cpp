#include "molsync/relay/outbound_queue.hpp"

#include <algorithm>

namespace molsync::relay {

bool OutboundQueue::push(QueuedFrame frame) {
  if (frames_.size() >= capacity_) {
    auto victim = std::find_if(frames_.begin(), frames_.end(),
                               [](const QueuedFrame& f) { return is_snapshot(f.kind); });
    if (victim != frames_.end()) {
      frames_.erase(victim);
      ++dropped_;
    } else if (is_snapshot(frame.kind)) {
      ++dropped_;
      return false;
    }
  }
  frames_.push_back(std::move(frame));
  return true;
}

std::optional<QueuedFrame> OutboundQueue::pop() {
  if (frames_.empty()) return std::nullopt;
  QueuedFrame f = std::move(frames_.front());
  frames_.pop_front();
  return f;
}

}  // namespace molsync::relay
