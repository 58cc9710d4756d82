#include "molsync/protocol/peer_id.hpp"

#include <algorithm>
#include <limits>

namespace molsync {
namespace {

constexpr std::string_view kAlphabet =
    "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";

bool is_alnum_ascii(char c) noexcept {
  return (c >= '0' && c <= '9') || (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z');
}

}  // namespace

bool PeerId::is_valid(std::string_view text) noexcept {
  return text.size() == kLength && std::all_of(text.begin(), text.end(), is_alnum_ascii);
}

std::optional<PeerId> PeerId::parse(std::string_view text) {
  if (!is_valid(text)) return std::nullopt;
  return PeerId(std::string(text));
}

std::ostream& operator<<(std::ostream& os, const PeerId& id) { return os << id.str(); }

std::string random_token(IdRng& rng, std::size_t length) {
  constexpr std::uint64_t n = kAlphabet.size();
  constexpr std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  // 2^64 mod n: the top `excess` draws are rejected so the rest split evenly.
  constexpr std::uint64_t excess = (max % n + 1) % n;
  std::string out;
  out.reserve(length);
  while (out.size() < length) {
    const std::uint64_t draw = rng();
    if (excess != 0 && draw > max - excess) continue;
    out.push_back(kAlphabet[draw % n]);
  }
  return out;
}

PeerId new_peer_id(IdRng& rng) { return *PeerId::parse(random_token(rng, PeerId::kLength)); }

}  // namespace molsync
