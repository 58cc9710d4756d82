#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "molsync/protocol/envelope.hpp"
#include "molsync/protocol/result.hpp"

namespace molsync {

enum class DecodeErrorCode {
  malformed,            // not structured text, wrong shape or missing field
  unknown_kind,         // `kind` is not one of the protocol's kinds
  unsupported_version,  // `v` is not kProtocolVersion
  field_out_of_range,   // well-typed but violates a field invariant
};

std::string_view decode_error_name(DecodeErrorCode code) noexcept;

struct DecodeError {
  DecodeErrorCode code = DecodeErrorCode::malformed;
  std::string detail;
};

// Compact JSON, keys in lexicographic order, quaternion components at
// kWireDigits significant digits. Identical envelopes give identical bytes.
std::string encode_envelope(const Envelope& e);

// Accepts arbitrary bytes. Never throws.
Result<Envelope, DecodeError> decode_envelope(std::string_view bytes);

// Checks the field invariants decode enforces, without a round trip.
std::optional<DecodeError> validate_envelope(const Envelope& e);

bool is_valid_utf8(std::string_view text) noexcept;

}  // namespace molsync
