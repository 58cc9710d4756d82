#include "molsync/protocol/viewer_model.hpp"

#include <algorithm>

namespace molsync {
namespace {

// Canonical wire values are kept bit-exact so that all peers agree.
Quaternion unit_or_normalized(const Quaternion& q) { return is_unit(q) ? q : q.normalized(); }

}  // namespace

std::uint64_t ViewerModel::Sequences::latest() const noexcept {
  return std::max({orientation, framing, command});
}

std::uint64_t ViewerModel::last_applied_seq(const PeerId& origin) const {
  auto it = sequences_.find(origin);
  return it == sequences_.end() ? 0 : it->second.latest();
}

bool ViewerModel::apply(const Envelope& e, const Policy& policy) {
  const Kind kind = e.kind();
  if (!is_view_update(kind) || !gate_inbound(kind, policy)) return false;
  const auto key = update_key(e);
  if (!key) return false;

  Sequences current;
  if (auto it = sequences_.find(key->origin); it != sequences_.end()) current = it->second;

  if (const auto* r = e.get_if<Rotation>()) {
    if (key->seq <= current.orientation) return false;
    camera_.orientation = unit_or_normalized(r->q);
    sequences_[key->origin].orientation = key->seq;
    return true;
  }
  if (const auto* s = e.get_if<State>()) {
    const bool newer_orientation = key->seq > current.orientation;
    const bool newer_framing = key->seq > current.framing;
    if (!newer_orientation && !newer_framing) return false;
    Sequences& seqs = sequences_[key->origin];
    if (newer_orientation) {
      camera_.orientation = unit_or_normalized(s->camera.orientation);
      seqs.orientation = key->seq;
    }
    if (newer_framing) {
      camera_.zoom = s->camera.zoom;
      camera_.center = s->camera.center;
      seqs.framing = key->seq;
    }
    return true;
  }
  const auto& c = std::get<Command>(e.payload);
  if (key->seq <= current.command) return false;
  command_log_.push_back(c.script);
  sequences_[key->origin].command = key->seq;
  return true;
}

void ViewerModel::set_orientation(const Quaternion& q) { camera_.orientation = unit_or_normalized(q); }

void ViewerModel::set_zoom(double zoom) {
  Camera c = camera_;
  c.zoom = zoom;
  camera_ = validated(c);
}

void ViewerModel::set_camera(const Camera& camera) { camera_ = validated(camera); }

void ViewerModel::append_command(std::string script) { command_log_.push_back(std::move(script)); }

ApplyOutcome apply_update(ViewerModel model, const Envelope& e, const Policy& policy) {
  const bool applied = model.apply(e, policy);
  return {std::move(model), applied};
}

}  // namespace molsync
