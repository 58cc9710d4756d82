#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "molsync/protocol/camera.hpp"
#include "molsync/protocol/envelope.hpp"
#include "molsync/protocol/policy.hpp"

namespace molsync {

// The local visualization a peer drives: camera plus the replayed command log.
//
// Incoming updates are last-writer-wins per origin. Sequence numbers are kept
// per stream: orientation (written by rotation and state), framing (zoom and
// center, written by state) and commands. With in-order delivery this is the
// same as a single per-origin counter; under reordering an older frame can
// never overwrite a register a newer frame already wrote.
class ViewerModel {
 public:
  struct Sequences {
    std::uint64_t orientation = 0;
    std::uint64_t framing = 0;
    std::uint64_t command = 0;

    std::uint64_t latest() const noexcept;
    bool operator==(const Sequences&) const = default;
  };

  const Camera& camera() const noexcept { return camera_; }
  const std::vector<std::string>& command_log() const noexcept { return command_log_; }
  const std::map<PeerId, Sequences>& sequences() const noexcept { return sequences_; }

  // Highest sequence applied from `origin`, 0 if none.
  std::uint64_t last_applied_seq(const PeerId& origin) const;

  // Applies a rotation, state or command envelope in place. Returns false and
  // leaves the model untouched when gated, stale, or not a view update.
  bool apply(const Envelope& e, const Policy& policy);

  // Local edits. These never touch the per-origin sequences.
  void set_orientation(const Quaternion& q);
  void set_zoom(double zoom);
  void set_camera(const Camera& camera);
  void append_command(std::string script);

  bool operator==(const ViewerModel&) const = default;

 private:
  Camera camera_;
  std::map<PeerId, Sequences> sequences_;
  std::vector<std::string> command_log_;
};

struct ApplyOutcome {
  ViewerModel model;
  bool applied = false;
};

// Value form of ViewerModel::apply.
ApplyOutcome apply_update(ViewerModel model, const Envelope& e, const Policy& policy);

}  // namespace molsync
