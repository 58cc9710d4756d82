#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>

#include "molsync/protocol/envelope.hpp"

namespace molsync::relay {

inline constexpr std::size_t kDefaultQueueCapacity = 256;

struct QueuedFrame {
  std::string text;
  Kind kind = Kind::error;
};

// Per-connection write queue for slow consumers. At capacity, rotation/state
// frames are shed (oldest queued first, else the incoming one); other kinds are
// never dropped and may push the queue past capacity.
class OutboundQueue {
 public:
  explicit OutboundQueue(std::size_t capacity = kDefaultQueueCapacity) : capacity_(capacity) {}

  // False when the pushed frame itself was dropped.
  bool push(QueuedFrame frame);
  std::optional<QueuedFrame> pop();
  const QueuedFrame* front() const { return frames_.empty() ? nullptr : &frames_.front(); }

  std::size_t size() const noexcept { return frames_.size(); }
  bool empty() const noexcept { return frames_.empty(); }
  std::size_t capacity() const noexcept { return capacity_; }
  std::uint64_t dropped() const noexcept { return dropped_; }

 private:
  std::size_t capacity_;
  std::deque<QueuedFrame> frames_;
  std::uint64_t dropped_ = 0;
};

}  // namespace molsync::relay
