#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "molsync/protocol/codec.hpp"
#include "molsync/protocol/coalescer.hpp"
#include "molsync/protocol/envelope.hpp"
#include "molsync/protocol/file_transfer.hpp"
#include "molsync/protocol/policy.hpp"
#include "molsync/protocol/result.hpp"
#include "molsync/protocol/viewer_model.hpp"

namespace molsync::peer {

// An envelope the session wants on the wire, with its encoding.
struct Outgoing {
  Envelope envelope;
  std::string frame;
};

struct KindCounter {
  std::uint64_t frames = 0;
  std::uint64_t bytes = 0;
};

struct Stats {
  std::array<KindCounter, kKindCount> sent{};
  std::array<KindCounter, kKindCount> received{};
  std::uint64_t decode_errors = 0;
  std::uint64_t applied = 0;
  std::uint64_t rejected = 0;  // stale or gated view updates
  std::uint64_t re_shared = 0;

  const KindCounter& sent_of(Kind k) const { return sent[static_cast<std::size_t>(k)]; }
  const KindCounter& received_of(Kind k) const { return received[static_cast<std::size_t>(k)]; }
};

struct ChatMessage {
  PeerId from;
  std::string text;
  std::int64_t at_ms = 0;
};

struct ReceivedFile {
  PeerId from;
  FileManifest manifest;
  Bytes content;
  std::optional<std::filesystem::path> stored_at;
};

enum class SessionErrorCode {
  not_connected,   // no ID assigned yet
  oversize_command,
  invalid_text,    // not UTF-8
  peer_not_found,
  transport,
  io,
};

std::string_view session_error_name(SessionErrorCode code) noexcept;

struct SessionError {
  SessionErrorCode code = SessionErrorCode::transport;
  std::string detail;
};

struct SessionOptions {
  Policy policy;
  bool hub = false;
  double max_rate = kDefaultMaxRate;
  // Completed incoming files are written here when set; kept in memory always.
  std::filesystem::path staging_dir;
  // Seed for file_id tokens; unset draws from std::random_device.
  std::optional<std::uint64_t> token_seed;
};

struct ReceiveOutcome {
  bool applied = false;
  std::vector<Outgoing> out;  // hub re-shares and file acks
  std::optional<Error> error;
  std::optional<DecodeError> decode_error;
};

// Headless peer: the protocol state of one participant, with no I/O. Every
// call takes the current time and returns the frames to send; drivers (a
// websocket client, the simulator, tests) own transport and clock.
//
// Sending and applying are independent: local edits always reach the local
// model, and the policy decides what leaves and what is applied.
class PeerSession {
 public:
  explicit PeerSession(SessionOptions options = {});

  Outgoing hello(std::int64_t now_ms);
  Result<Outgoing, SessionError> request_connect(const PeerId& target, std::int64_t now_ms);

  ReceiveOutcome on_frame(std::string_view frame, std::int64_t now_ms);
  ReceiveOutcome on_receive(const Envelope& e, std::int64_t now_ms, std::size_t wire_bytes = 0);

  std::vector<Outgoing> local_drag(const Quaternion& orientation, std::int64_t now_ms);
  std::vector<Outgoing> set_zoom(double zoom, std::int64_t now_ms);
  std::vector<Outgoing> set_view(const Camera& camera, std::int64_t now_ms);

  Result<std::vector<Outgoing>, SessionError> send_command(std::string script, std::int64_t now_ms);
  Result<std::vector<Outgoing>, SessionError> send_chat(std::string text, std::int64_t now_ms);
  Result<std::vector<Outgoing>, SessionError> send_file(std::span<const std::uint8_t> bytes,
                                                        std::string name, std::int64_t now_ms);

  // Releases throttled snapshots whose interval has elapsed.
  std::vector<Outgoing> poll(std::int64_t now_ms);
  std::optional<std::int64_t> next_deadline() const;

  // Returns a hello re-announcing the policy when connected.
  std::optional<Outgoing> set_policy(const Policy& policy, std::int64_t now_ms);
  void on_disconnected();

  const std::optional<PeerId>& id() const noexcept { return id_; }
  bool connected() const noexcept { return id_.has_value(); }
  const Policy& policy() const noexcept { return options_.policy; }
  bool hub() const noexcept { return options_.hub; }
  const ViewerModel& model() const noexcept { return model_; }
  const std::set<PeerId>& links() const noexcept { return links_; }
  const Stats& stats() const noexcept { return stats_; }
  const std::vector<ChatMessage>& chat_log() const noexcept { return chat_log_; }
  const std::vector<ReceivedFile>& received_files() const noexcept { return files_; }
  const std::vector<FileAck>& file_acks() const noexcept { return acks_; }
  const std::optional<Error>& last_error() const noexcept { return last_error_; }

 private:
  Outgoing emit(Address to, Payload payload, std::int64_t now_ms);
  std::optional<Outgoing> emit_rotation(const Quaternion& q, std::int64_t now_ms);
  std::optional<Outgoing> emit_state(const Camera& camera, std::int64_t now_ms);
  void offer_state(std::vector<Outgoing>& out, std::int64_t now_ms);
  std::vector<Outgoing> re_share(const Envelope& e, std::int64_t now_ms);
  void on_file_chunk(const Envelope& e, ReceiveOutcome& outcome, std::int64_t now_ms);
  void finish_file(const PeerId& from, const FileAssembler& assembler, ReceiveOutcome& outcome,
                   std::int64_t now_ms);

  SessionOptions options_;
  IdRng token_rng_;
  std::optional<PeerId> id_;
  std::uint64_t seq_ = 0;
  ViewerModel model_;
  std::set<PeerId> links_;
  Coalescer<Quaternion> rotations_;
  Coalescer<Camera> states_;
  Stats stats_;
  std::vector<ChatMessage> chat_log_;
  std::map<std::pair<PeerId, std::string>, FileAssembler> transfers_;
  std::vector<ReceivedFile> files_;
  std::vector<FileAck> acks_;
  std::optional<Error> last_error_;
};

}  // namespace molsync::peer
