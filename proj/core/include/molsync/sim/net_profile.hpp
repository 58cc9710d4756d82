#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "molsync/protocol/result.hpp"

namespace molsync::sim {

// Link model applied independently to every peer<->relay hop.
struct NetProfile {
  double latency_ms = 0.0;  // mean one-way delay
  double jitter_ms = 0.0;   // uniform half-width around the mean
  double loss_rate = 0.0;   // in [0, 1)
  bool reorder = false;     // snapshot frames may overtake each other
  bool uniform_loss = false;  // loss also hits command/chat/file/control frames
  std::uint64_t seed = 0;

  // "lat=100,jit=20,loss=0.05,seed=7,reorder=1,uniform_loss=0"; omitted keys
  // keep the values of `base`.
  static Result<NetProfile, std::string> parse(std::string_view text, const NetProfile& base);
  static Result<NetProfile, std::string> parse(std::string_view text) { return parse(text, NetProfile{}); }

  std::string to_string() const;
  std::string validate() const;  // empty when valid

  bool operator==(const NetProfile&) const = default;
};

}  // namespace molsync::sim
