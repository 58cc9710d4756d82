#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <string_view>

namespace molsync {

// Seedable source for identifiers. mt19937_64 is fully specified by the
// standard, so a given seed yields the same IDs on every platform.
using IdRng = std::mt19937_64;

// Session identity handed out by the relay: exactly 16 ASCII alphanumerics.
class PeerId {
 public:
  static constexpr std::size_t kLength = 16;

  static bool is_valid(std::string_view text) noexcept;
  static std::optional<PeerId> parse(std::string_view text);

  const std::string& str() const noexcept { return value_; }

  auto operator<=>(const PeerId&) const = default;
  bool operator==(const PeerId&) const = default;

 private:
  explicit PeerId(std::string value) : value_(std::move(value)) {}
  std::string value_;
};

std::ostream& operator<<(std::ostream& os, const PeerId& id);

// Uniform draw over [A-Za-z0-9]^length using rejection sampling on the raw
// 64-bit generator output (no std::uniform_int_distribution, whose mapping is
// implementation-defined).
std::string random_token(IdRng& rng, std::size_t length);

PeerId new_peer_id(IdRng& rng);

}  // namespace molsync
