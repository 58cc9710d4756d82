#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>

#include "molsync/protocol/camera.hpp"

namespace molsync {

inline constexpr double kDefaultMaxRate = 20.0;  // updates per second

inline double throttle_interval_ms(double max_rate) {
  if (!(max_rate > 0.0) || !std::isfinite(max_rate)) {
    throw std::invalid_argument("max_rate must be positive and finite");
  }
  return 1000.0 / max_rate;
}

// Emits the newest pending snapshot if at least 1000/max_rate ms passed since
// `last_emit_ms` (or nothing was emitted yet). Older entries are dropped.
template <class T>
std::optional<T> coalesce(std::span<const T> pending, double max_rate, std::int64_t now_ms,
                          std::optional<std::int64_t> last_emit_ms) {
  const double interval = throttle_interval_ms(max_rate);
  if (pending.empty()) return std::nullopt;
  if (last_emit_ms && static_cast<double>(now_ms - *last_emit_ms) < interval) {
    return std::nullopt;
  }
  return pending.back();
}

inline std::optional<ViewState> coalesce(std::span<const ViewState> pending, double max_rate,
                                         std::int64_t now_ms,
                                         std::optional<std::int64_t> last_emit_ms = {}) {
  return coalesce<ViewState>(pending, max_rate, now_ms, last_emit_ms);
}

// Stateful throttle for one snapshot stream. At most one value is held; a new
// offer replaces it.
template <class T>
class Coalescer {
 public:
  explicit Coalescer(double max_rate = kDefaultMaxRate)
      : interval_ms_(throttle_interval_ms(max_rate)), max_rate_(max_rate) {}

  // Returns the value if it may go out now, otherwise keeps it pending.
  std::optional<T> offer(T value, std::int64_t now_ms) {
    pending_ = std::move(value);
    return poll(now_ms);
  }

  // Releases the pending value once the interval has elapsed.
  std::optional<T> poll(std::int64_t now_ms) {
    if (!pending_) return std::nullopt;
    auto out = coalesce<T>(std::span<const T>(&*pending_, 1), max_rate_, now_ms, last_emit_ms_);
    if (out) {
      last_emit_ms_ = now_ms;
      pending_.reset();
    }
    return out;
  }

  // Earliest time poll() will release the pending value.
  std::optional<std::int64_t> deadline() const {
    if (!pending_) return std::nullopt;
    if (!last_emit_ms_) return std::int64_t{0};
    return *last_emit_ms_ + static_cast<std::int64_t>(std::ceil(interval_ms_));
  }

  bool has_pending() const noexcept { return pending_.has_value(); }
  void clear() noexcept { pending_.reset(); }

 private:
  double interval_ms_;
  double max_rate_;
  std::optional<std::int64_t> last_emit_ms_;
  std::optional<T> pending_;
};

}  // namespace molsync
