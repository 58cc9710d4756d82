#pragma once

#include <cstdint>

#include "molsync/protocol/peer_id.hpp"
#include "molsync/protocol/quaternion.hpp"

namespace molsync {

inline constexpr double kDefaultZoom = 100.0;

// Absolute camera snapshot. zoom is percent of the default view, center is in
// model coordinates (Angstrom).
struct Camera {
  Quaternion orientation;
  double zoom = kDefaultZoom;
  Vec3 center;

  bool operator==(const Camera&) const = default;
};

// Throws std::invalid_argument unless zoom > 0, all fields finite and the
// orientation is non-degenerate. Returns the camera with a unit orientation.
Camera validated(Camera camera);

// A sequenced snapshot from one origin, as queued for coalescing.
struct ViewState {
  Camera camera;
  std::uint64_t seq = 0;
  PeerId origin;

  bool operator==(const ViewState&) const = default;
};

}  // namespace molsync
