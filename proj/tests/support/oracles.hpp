#pragma once

// Reference models that the library code is checked against. They share no
// code with the implementation.

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "molsync/protocol/envelope.hpp"

namespace molsync::testing {

using Mat3 = std::array<std::array<double, 3>, 3>;

// Rotation matrix of a unit quaternion (w, x, y, z).
inline Mat3 to_matrix(double w, double x, double y, double z) {
  return {{{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
           {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
           {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}}};
}

inline Mat3 multiply(const Mat3& a, const Mat3& b) {
  Mat3 out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) out[i][j] += a[i][k] * b[k][j];
  return out;
}

inline double max_abs_diff(const Mat3& a, const Mat3& b) {
  double d = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) d = std::max(d, std::abs(a[i][j] - b[i][j]));
  return d;
}

// Last-writer-wins reference for a set of state envelopes delivered in some
// order: per origin only the highest sequence number survives; across origins
// the camera is whichever surviving snapshot arrived last.
struct LwwOracle {
  struct Winner {
    std::uint64_t seq = 0;
    Camera camera;
  };

  static Camera expected_camera(const std::vector<Envelope>& delivery_order) {
    std::map<std::string, Winner> best;
    for (const Envelope& e : delivery_order) {
      const auto& s = std::get<State>(e.payload);
      Winner& w = best[e.from.peer().str()];
      if (e.seq > w.seq) w = Winner{e.seq, s.camera};
    }
    Camera camera;
    std::map<std::string, std::uint64_t> applied;
    for (const Envelope& e : delivery_order) {
      const std::string origin = e.from.peer().str();
      auto& last = applied[origin];
      if (e.seq <= last) continue;
      last = e.seq;
      // A frame that is not the origin's final winner is overwritten later
      // by that winner, so only winners decide the final camera.
      if (e.seq == best[origin].seq) camera = best[origin].camera;
    }
    return camera;
  }

  static std::map<std::string, std::uint64_t> expected_sequences(const std::vector<Envelope>& es) {
    std::map<std::string, std::uint64_t> out;
    for (const Envelope& e : es) {
      auto& s = out[e.from.peer().str()];
      s = std::max(s, e.seq);
    }
    return out;
  }
};

}  // namespace molsync::testing
