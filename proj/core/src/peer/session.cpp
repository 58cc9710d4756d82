#include "molsync/peer/session.hpp"

#include <algorithm>
#include <fstream>
#include <random>

namespace molsync::peer {
namespace {

std::uint64_t token_seed(const SessionOptions& options) {
  if (options.token_seed) return *options.token_seed;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::string safe_file_name(std::string_view name) {
  std::string out;
  for (char c : name) {
    const bool keep = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
                      c == '.' || c == '_' || c == '-';
    out.push_back(keep ? c : '_');
  }
  if (out.empty() || out.front() == '.') out.insert(out.begin(), '_');
  return out;
}

void count(std::array<KindCounter, kKindCount>& counters, Kind kind, std::size_t bytes) {
  auto& c = counters[static_cast<std::size_t>(kind)];
  ++c.frames;
  c.bytes += bytes;
}

// Copy of a view-update payload marked as re-shared by a hub.
Payload with_via(const Payload& payload, Forwarded via) {
  Payload out = payload;
  if (auto* r = std::get_if<Rotation>(&out)) r->via = std::move(via);
  else if (auto* s = std::get_if<State>(&out)) s->via = std::move(via);
  else if (auto* c = std::get_if<Command>(&out)) c->via = std::move(via);
  return out;
}

}  // namespace

std::string_view session_error_name(SessionErrorCode code) noexcept {
  switch (code) {
    case SessionErrorCode::not_connected: return "not_connected";
    case SessionErrorCode::oversize_command: return "oversize_command";
    case SessionErrorCode::invalid_text: return "invalid_text";
    case SessionErrorCode::peer_not_found: return "peer_not_found";
    case SessionErrorCode::transport: return "transport";
    case SessionErrorCode::io: return "io";
  }
  return "transport";
}

PeerSession::PeerSession(SessionOptions options)
    : options_(std::move(options)),
      token_rng_(token_seed(options_)),
      rotations_(options_.max_rate),
      states_(options_.max_rate) {}

Outgoing PeerSession::emit(Address to, Payload payload, std::int64_t now_ms) {
  Envelope e;
  e.from = id_ ? Address(*id_) : Address::relay();
  e.to = std::move(to);
  e.seq = ++seq_;
  e.ts = now_ms;
  e.payload = std::move(payload);
  std::string frame = encode_envelope(e);
  count(stats_.sent, e.kind(), frame.size());
  return Outgoing{std::move(e), std::move(frame)};
}

Outgoing PeerSession::hello(std::int64_t now_ms) {
  return emit(Address::relay(), Hello{options_.policy.to_string()}, now_ms);
}

Result<Outgoing, SessionError> PeerSession::request_connect(const PeerId& target,
                                                            std::int64_t now_ms) {
  if (!id_) return SessionError{SessionErrorCode::not_connected, "no peer id yet"};
  return emit(target, Connect{}, now_ms);
}

std::optional<Outgoing> PeerSession::emit_rotation(const Quaternion& q, std::int64_t now_ms) {
  if (!id_ || links_.empty() || !gate_outbound(Kind::rotation, options_.policy)) return std::nullopt;
  // A pending drag reasserts the local view over any update applied since.
  model_.set_orientation(q);
  return emit(Address::broadcast(), Rotation{q, std::nullopt}, now_ms);
}

std::optional<Outgoing> PeerSession::emit_state(const Camera&, std::int64_t now_ms) {
  if (!id_ || links_.empty() || !gate_outbound(Kind::state, options_.policy)) return std::nullopt;
  return emit(Address::broadcast(), State::of(model_.camera()), now_ms);
}

std::vector<Outgoing> PeerSession::local_drag(const Quaternion& orientation, std::int64_t now_ms) {
  const Quaternion q = to_wire_precision(orientation);
  model_.set_orientation(q);
  std::vector<Outgoing> out;
  if (!id_ || links_.empty() || !gate_outbound(Kind::rotation, options_.policy)) return out;
  if (auto ready = rotations_.offer(q, now_ms)) {
    if (auto o = emit_rotation(*ready, now_ms)) out.push_back(std::move(*o));
  }
  return out;
}

void PeerSession::offer_state(std::vector<Outgoing>& out, std::int64_t now_ms) {
  if (!id_ || links_.empty() || !gate_outbound(Kind::state, options_.policy)) return;
  if (auto ready = states_.offer(model_.camera(), now_ms)) {
    if (auto o = emit_state(*ready, now_ms)) out.push_back(std::move(*o));
  }
}

std::vector<Outgoing> PeerSession::set_zoom(double zoom, std::int64_t now_ms) {
  model_.set_zoom(zoom);
  std::vector<Outgoing> out;
  offer_state(out, now_ms);
  return out;
}

std::vector<Outgoing> PeerSession::set_view(const Camera& camera, std::int64_t now_ms) {
  model_.set_camera(State::of(camera).camera);
  std::vector<Outgoing> out;
  offer_state(out, now_ms);
  return out;
}

Result<std::vector<Outgoing>, SessionError> PeerSession::send_command(std::string script,
                                                                      std::int64_t now_ms) {
  if (script.size() > kMaxScriptBytes) {
    return SessionError{SessionErrorCode::oversize_command,
                        "command is " + std::to_string(script.size()) + " bytes, limit 65536"};
  }
  if (!is_valid_utf8(script)) return SessionError{SessionErrorCode::invalid_text, "command is not UTF-8"};
  model_.append_command(script);
  std::vector<Outgoing> out;
  if (id_ && !links_.empty() && gate_outbound(Kind::command, options_.policy)) {
    out.push_back(emit(Address::broadcast(), Command{std::move(script), std::nullopt}, now_ms));
  }
  return out;
}

Result<std::vector<Outgoing>, SessionError> PeerSession::send_chat(std::string text,
                                                                   std::int64_t now_ms) {
  if (!id_) return SessionError{SessionErrorCode::not_connected, "no peer id yet"};
  if (!is_valid_utf8(text)) return SessionError{SessionErrorCode::invalid_text, "chat is not UTF-8"};
  chat_log_.push_back(ChatMessage{*id_, text, now_ms});
  std::vector<Outgoing> out;
  if (!links_.empty()) out.push_back(emit(Address::broadcast(), Chat{std::move(text)}, now_ms));
  return out;
}

Result<std::vector<Outgoing>, SessionError> PeerSession::send_file(std::span<const std::uint8_t> bytes,
                                                                   std::string name,
                                                                   std::int64_t now_ms) {
  if (!id_) return SessionError{SessionErrorCode::not_connected, "no peer id yet"};
  if (!is_valid_utf8(name)) return SessionError{SessionErrorCode::invalid_text, "file name is not UTF-8"};
  std::vector<Outgoing> out;
  if (links_.empty()) return out;
  ChunkedFile file = chunk_file(bytes, random_token(token_rng_, kFileIdLength), std::move(name));
  out.reserve(file.chunks.size() + 1);
  out.push_back(emit(Address::broadcast(), std::move(file.manifest), now_ms));
  for (FileChunk& chunk : file.chunks) {
    out.push_back(emit(Address::broadcast(), std::move(chunk), now_ms));
  }
  return out;
}

std::vector<Outgoing> PeerSession::poll(std::int64_t now_ms) {
  std::vector<Outgoing> out;
  if (auto q = rotations_.poll(now_ms)) {
    if (auto o = emit_rotation(*q, now_ms)) out.push_back(std::move(*o));
  }
  if (auto c = states_.poll(now_ms)) {
    if (auto o = emit_state(*c, now_ms)) out.push_back(std::move(*o));
  }
  return out;
}

std::optional<std::int64_t> PeerSession::next_deadline() const {
  auto a = rotations_.deadline();
  auto b = states_.deadline();
  if (a && b) return std::min(*a, *b);
  return a ? a : b;
}

std::optional<Outgoing> PeerSession::set_policy(const Policy& policy, std::int64_t now_ms) {
  options_.policy = policy;
  if (!id_) return std::nullopt;
  return hello(now_ms);
}

void PeerSession::on_disconnected() {
  id_.reset();
  links_.clear();
  rotations_.clear();
  states_.clear();
}

ReceiveOutcome PeerSession::on_frame(std::string_view frame, std::int64_t now_ms) {
  auto decoded = decode_envelope(frame);
  if (!decoded) {
    ++stats_.decode_errors;
    ReceiveOutcome outcome;
    outcome.decode_error = decoded.error();
    return outcome;
  }
  return on_receive(decoded.value(), now_ms, frame.size());
}

std::vector<Outgoing> PeerSession::re_share(const Envelope& e, std::int64_t now_ms) {
  std::vector<Outgoing> out;
  const PeerId& sender = e.from.peer();
  const Forwarded via{sender, e.seq};
  for (const PeerId& link : links_) {
    if (link == sender) continue;
    out.push_back(emit(link, with_via(e.payload, via), now_ms));
    ++stats_.re_shared;
  }
  return out;
}

ReceiveOutcome PeerSession::on_receive(const Envelope& e, std::int64_t now_ms,
                                       std::size_t wire_bytes) {
  ReceiveOutcome outcome;
  count(stats_.received, e.kind(), wire_bytes != 0 ? wire_bytes : encode_envelope(e).size());

  switch (e.kind()) {
    case Kind::welcome:
      id_ = std::get<Welcome>(e.payload).id;
      break;
    case Kind::connect_ok:
      links_.insert(std::get<ConnectOk>(e.payload).peer);
      break;
    case Kind::peer_joined:
      links_.insert(std::get<PeerJoined>(e.payload).peer);
      break;
    case Kind::peer_left:
      links_.erase(std::get<PeerLeft>(e.payload).peer);
      break;
    case Kind::error:
      last_error_ = std::get<Error>(e.payload);
      outcome.error = last_error_;
      break;
    case Kind::rotation:
    case Kind::state:
    case Kind::command:
      outcome.applied = model_.apply(e, options_.policy);
      if (!outcome.applied) {
        ++stats_.rejected;
        break;
      }
      ++stats_.applied;
      if (options_.hub && forwarded(e) == nullptr && e.from.is_peer() &&
          gate_outbound(e.kind(), options_.policy)) {
        outcome.out = re_share(e, now_ms);
      }
      break;
    case Kind::chat:
      if (e.from.is_peer()) {
        chat_log_.push_back(ChatMessage{e.from.peer(), std::get<Chat>(e.payload).text, now_ms});
      }
      break;
    case Kind::file_manifest: {
      if (!e.from.is_peer()) break;
      const auto& manifest = std::get<FileManifest>(e.payload);
      auto key = std::pair{e.from.peer(), manifest.file_id};
      auto [it, inserted] = transfers_.insert_or_assign(key, FileAssembler(manifest));
      if (it->second.complete()) {
        finish_file(e.from.peer(), it->second, outcome, now_ms);
        transfers_.erase(it);
      }
      break;
    }
    case Kind::file_chunk:
      on_file_chunk(e, outcome, now_ms);
      break;
    case Kind::file_ack:
      acks_.push_back(std::get<FileAck>(e.payload));
      break;
    case Kind::hello:
    case Kind::connect:
      break;
  }
  return outcome;
}

void PeerSession::on_file_chunk(const Envelope& e, ReceiveOutcome& outcome, std::int64_t now_ms) {
  if (!e.from.is_peer()) return;
  const auto& chunk = std::get<FileChunk>(e.payload);
  auto it = transfers_.find(std::pair{e.from.peer(), chunk.file_id});
  if (it == transfers_.end()) {
    // Completed transfers are forgotten; late duplicates land here too.
    bool known = std::any_of(files_.begin(), files_.end(), [&](const ReceivedFile& f) {
      return f.from == e.from.peer() && f.manifest.file_id == chunk.file_id;
    });
    if (!known) {
      outcome.out.push_back(emit(e.from, FileAck{chunk.file_id, false,
                                                 std::string(file_error_name(FileErrorCode::unknown_file_id))},
                                 now_ms));
    }
    return;
  }
  it->second.add(chunk);
  if (it->second.complete()) {
    finish_file(e.from.peer(), it->second, outcome, now_ms);
    transfers_.erase(it);
  }
}

void PeerSession::finish_file(const PeerId& from, const FileAssembler& assembler,
                              ReceiveOutcome& outcome, std::int64_t now_ms) {
  const FileManifest& manifest = assembler.manifest();
  auto result = assembler.finish();
  if (!result) {
    outcome.out.push_back(emit(from,
                               FileAck{manifest.file_id, false,
                                       std::string(file_error_name(result.error().code))},
                               now_ms));
    return;
  }
  ReceivedFile file{from, manifest, std::move(result).value(), std::nullopt};
  std::string reason;
  bool ok = true;
  if (!options_.staging_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(options_.staging_dir, ec);
    const auto path = options_.staging_dir / (manifest.file_id + "_" + safe_file_name(manifest.name));
    std::ofstream os(path, std::ios::binary);
    os.write(reinterpret_cast<const char*>(file.content.data()),
             static_cast<std::streamsize>(file.content.size()));
    if (os) {
      file.stored_at = path;
    } else {
      ok = false;
      reason = "io";
    }
  }
  files_.push_back(std::move(file));
  outcome.out.push_back(emit(from, FileAck{manifest.file_id, ok, reason}, now_ms));
}

}  // namespace molsync::peer
