#pragma once

#include <array>

namespace molsync {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  bool operator==(const Vec3&) const = default;
};

// Orientation carrier, Hamilton convention, scalar first.
struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static constexpr Quaternion identity() noexcept { return {}; }

  double norm_squared() const noexcept { return w * w + x * x + y * y + z * z; }
  double norm() const noexcept;
  Quaternion normalized() const;  // throws std::domain_error on zero/non-finite
  Quaternion conjugate() const noexcept { return {w, -x, -y, -z}; }
  bool is_finite() const noexcept;

  bool operator==(const Quaternion&) const = default;
};

inline constexpr double kUnitTolerance = 1e-9;

// Hamilton product a*b (rotate by b, then by a).
Quaternion operator*(const Quaternion& a, const Quaternion& b) noexcept;

bool is_unit(const Quaternion& q, double tolerance = kUnitTolerance) noexcept;

// Rotation that applies `first` and then `second`: normalize(second * first).
// Both inputs must be unit within kUnitTolerance, otherwise std::domain_error.
Quaternion compose_rotation(const Quaternion& first, const Quaternion& second);

// Unit quaternion for a right-handed rotation of `radians` about `axis`.
Quaternion from_axis_angle(const std::array<double, 3>& axis, double radians);

// Rounds to `digits` significant decimal digits (printf %.*g semantics).
double round_significant(double value, int digits);

inline constexpr int kWireDigits = 9;

// Nearest quaternion whose components have at most kWireDigits significant
// digits and whose norm is 1 within kUnitTolerance. Idempotent: values that
// already satisfy both are returned unchanged. This is the exact orientation
// that travels on the wire and that every peer stores.
Quaternion to_wire_precision(const Quaternion& q);

}  // namespace molsync
