#include "molsync/protocol/quaternion.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

#include "molsync/protocol/camera.hpp"

namespace molsync {

double Quaternion::norm() const noexcept { return std::sqrt(norm_squared()); }

bool Quaternion::is_finite() const noexcept {
  return std::isfinite(w) && std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
}

Quaternion Quaternion::normalized() const {
  const double n = norm();
  if (!is_finite() || !(n > 0.0) || !std::isfinite(n)) {
    throw std::domain_error("cannot normalize a zero or non-finite quaternion");
  }
  return {w / n, x / n, y / n, z / n};
}

Quaternion operator*(const Quaternion& a, const Quaternion& b) noexcept {
  return {
      a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
      a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
      a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
      a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
  };
}

bool is_unit(const Quaternion& q, double tolerance) noexcept {
  return q.is_finite() && std::abs(q.norm_squared() - 1.0) <= tolerance;
}

Quaternion compose_rotation(const Quaternion& first, const Quaternion& second) {
  if (!is_unit(first) || !is_unit(second)) {
    throw std::domain_error("compose_rotation requires unit quaternions");
  }
  return (second * first).normalized();
}

Quaternion from_axis_angle(const std::array<double, 3>& axis, double radians) {
  const double len = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
  if (!(len > 0.0) || !std::isfinite(len) || !std::isfinite(radians)) {
    throw std::domain_error("rotation axis must be non-zero and finite");
  }
  const double s = std::sin(radians / 2.0) / len;
  return Quaternion{std::cos(radians / 2.0), axis[0] * s, axis[1] * s, axis[2] * s}.normalized();
}

double round_significant(double value, int digits) {
  if (!std::isfinite(value) || value == 0.0) return value;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, value);
  return std::strtod(buf, nullptr);
}

namespace {

bool on_wire_grid(const Quaternion& q) {
  return round_significant(q.w, kWireDigits) == q.w && round_significant(q.x, kWireDigits) == q.x &&
         round_significant(q.y, kWireDigits) == q.y && round_significant(q.z, kWireDigits) == q.z;
}

// Unit of the last kept significant digit of `v`.
double last_digit_step(double v) {
  return std::pow(10.0, std::floor(std::log10(std::abs(v))) - (kWireDigits - 1));
}

}  // namespace

Quaternion to_wire_precision(const Quaternion& q) {
  if (is_unit(q) && on_wire_grid(q)) return q;
  const Quaternion n = q.normalized();
  Quaternion r{round_significant(n.w, kWireDigits), round_significant(n.x, kWireDigits),
               round_significant(n.y, kWireDigits), round_significant(n.z, kWireDigits)};
  // Rounding can leave |r|^2 up to ~2e-9 from 1. Step the largest component
  // by one unit in its last digit while that brings the norm closer.
  double* largest = &r.w;
  for (double* c : {&r.x, &r.y, &r.z}) {
    if (std::abs(*c) > std::abs(*largest)) largest = c;
  }
  for (int i = 0; i < 4 && !is_unit(r); ++i) {
    const double step = last_digit_step(*largest);
    const double original = *largest;
    double best = original;
    double best_err = std::abs(r.norm_squared() - 1.0);
    for (double candidate : {original + step, original - step}) {
      *largest = round_significant(candidate, kWireDigits);
      const double err = std::abs(r.norm_squared() - 1.0);
      if (err < best_err) {
        best = *largest;
        best_err = err;
      }
    }
    *largest = best;
    if (best == original) break;
  }
  return r;
}

Camera validated(Camera camera) {
  if (!(camera.zoom > 0.0) || !std::isfinite(camera.zoom)) {
    throw std::invalid_argument("zoom must be positive and finite");
  }
  if (!std::isfinite(camera.center.x) || !std::isfinite(camera.center.y) ||
      !std::isfinite(camera.center.z)) {
    throw std::invalid_argument("center must be finite");
  }
  if (!is_unit(camera.orientation)) {
    try {
      camera.orientation = camera.orientation.normalized();
    } catch (const std::domain_error& e) {
      throw std::invalid_argument(e.what());
    }
  }
  return camera;
}

}  // namespace molsync
