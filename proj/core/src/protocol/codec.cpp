#include "molsync/protocol/codec.hpp"

#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>

#include "molsync/protocol/file_transfer.hpp"
#include "molsync/protocol/policy.hpp"

namespace molsync {
namespace {

using json = nlohmann::json;

constexpr int kMaxNesting = 16;
constexpr double kDecodeUnitTolerance = 1e-6;
constexpr std::size_t kMaxChunkBytes = 1 << 20;

struct Failure {
  DecodeError error;
};

[[noreturn]] void fail(DecodeErrorCode code, std::string detail) {
  throw Failure{DecodeError{code, std::move(detail)}};
}

// Rejects inputs nested deeper than any valid envelope before they reach the
// JSON parser.
bool nesting_within_limit(std::string_view text) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (char c : text) {
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '[' || c == '{') {
      if (++depth > kMaxNesting) return false;
    } else if (c == ']' || c == '}') {
      --depth;
    }
  }
  return true;
}

// ---- encoding -------------------------------------------------------------

json wire_quaternion(const Quaternion& q) {
  return json::array({round_significant(q.w, kWireDigits), round_significant(q.x, kWireDigits),
                      round_significant(q.y, kWireDigits), round_significant(q.z, kWireDigits)});
}

void put_hop(json& j, const std::optional<Forwarded>& via) {
  j["hop"] = via ? 1 : 0;
  if (via) {
    j["origin"] = via->origin.str();
    j["oseq"] = via->origin_seq;
  }
}

struct PayloadEncoder {
  json operator()(const Hello& p) const {
    json j = json::object();
    if (p.policy) j["policy"] = *p.policy;
    return j;
  }
  json operator()(const Welcome& p) const { return {{"id", p.id.str()}}; }
  json operator()(const Connect&) const { return json::object(); }
  json operator()(const ConnectOk& p) const { return {{"peer", p.peer.str()}}; }
  json operator()(const PeerJoined& p) const { return {{"peer", p.peer.str()}}; }
  json operator()(const PeerLeft& p) const { return {{"peer", p.peer.str()}}; }
  json operator()(const Rotation& p) const {
    json j = {{"q", wire_quaternion(p.q)}};
    put_hop(j, p.via);
    return j;
  }
  json operator()(const State& p) const {
    const Camera& c = p.camera;
    json j = {{"q", wire_quaternion(c.orientation)},
              {"zoom", c.zoom},
              {"center", json::array({c.center.x, c.center.y, c.center.z})}};
    put_hop(j, p.via);
    return j;
  }
  json operator()(const Command& p) const {
    json j = {{"script", p.script}};
    put_hop(j, p.via);
    return j;
  }
  json operator()(const Chat& p) const { return {{"text", p.text}}; }
  json operator()(const FileManifest& p) const {
    return {{"file_id", p.file_id},         {"name", p.name},
            {"total_bytes", p.total_bytes}, {"chunk_size", p.chunk_size},
            {"chunk_count", p.chunk_count}, {"digest", p.digest}};
  }
  json operator()(const FileChunk& p) const {
    return {{"file_id", p.file_id}, {"index", p.index}, {"data", base64_encode(p.data)}};
  }
  json operator()(const FileAck& p) const {
    return {{"file_id", p.file_id}, {"ok", p.ok}, {"reason", p.reason}};
  }
  json operator()(const Error& p) const { return {{"code", p.code}, {"message", p.message}}; }
};

// ---- decoding -------------------------------------------------------------

const json& field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(DecodeErrorCode::malformed, std::string("missing field '") + key + "'");
  return *it;
}

std::string get_string(const json& obj, const char* key) {
  const json& v = field(obj, key);
  if (!v.is_string()) fail(DecodeErrorCode::malformed, std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

std::uint64_t get_u64(const json& obj, const char* key) {
  const json& v = field(obj, key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    fail(DecodeErrorCode::field_out_of_range, std::string("'") + key + "' must be non-negative");
  }
  fail(DecodeErrorCode::malformed, std::string("'") + key + "' must be an integer");
}

std::int64_t get_i64(const json& obj, const char* key) {
  const json& v = field(obj, key);
  if (v.is_number_unsigned()) {
    const auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
      fail(DecodeErrorCode::field_out_of_range, std::string("'") + key + "' overflows");
    }
    return static_cast<std::int64_t>(u);
  }
  if (v.is_number_integer()) return v.get<std::int64_t>();
  fail(DecodeErrorCode::malformed, std::string("'") + key + "' must be an integer");
}

double as_double(const json& v, const char* what) {
  if (!v.is_number()) fail(DecodeErrorCode::malformed, std::string(what) + " must be a number");
  return v.get<double>();
}

bool get_bool(const json& obj, const char* key) {
  const json& v = field(obj, key);
  if (!v.is_boolean()) fail(DecodeErrorCode::malformed, std::string("'") + key + "' must be a boolean");
  return v.get<bool>();
}

PeerId get_peer(const json& obj, const char* key) {
  auto id = PeerId::parse(get_string(obj, key));
  if (!id) fail(DecodeErrorCode::field_out_of_range, std::string("'") + key + "' is not a peer id");
  return *id;
}

std::vector<double> get_numbers(const json& obj, const char* key, std::size_t n) {
  const json& v = field(obj, key);
  if (!v.is_array() || v.size() != n) {
    fail(DecodeErrorCode::malformed,
         std::string("'") + key + "' must be an array of " + std::to_string(n) + " numbers");
  }
  std::vector<double> out;
  out.reserve(n);
  for (const json& x : v) out.push_back(as_double(x, key));
  return out;
}

Quaternion get_quaternion(const json& obj) {
  auto v = get_numbers(obj, "q", 4);
  return {v[0], v[1], v[2], v[3]};
}

std::optional<Forwarded> get_hop(const json& obj) {
  const std::uint64_t hop = get_u64(obj, "hop");
  if (hop > 1) fail(DecodeErrorCode::field_out_of_range, "'hop' must be 0 or 1");
  if (hop == 0) return std::nullopt;
  return Forwarded{get_peer(obj, "origin"), get_u64(obj, "oseq")};
}

Payload decode_payload(Kind kind, const json& p) {
  switch (kind) {
    case Kind::hello: {
      Hello h;
      if (p.contains("policy")) h.policy = get_string(p, "policy");
      return h;
    }
    case Kind::welcome: return Welcome{get_peer(p, "id")};
    case Kind::connect: return Connect{};
    case Kind::connect_ok: return ConnectOk{get_peer(p, "peer")};
    case Kind::peer_joined: return PeerJoined{get_peer(p, "peer")};
    case Kind::peer_left: return PeerLeft{get_peer(p, "peer")};
    case Kind::rotation: return Rotation{get_quaternion(p), get_hop(p)};
    case Kind::state: {
      Camera c;
      c.orientation = get_quaternion(p);
      c.zoom = as_double(field(p, "zoom"), "zoom");
      auto center = get_numbers(p, "center", 3);
      c.center = {center[0], center[1], center[2]};
      return State{c, get_hop(p)};
    }
    case Kind::command: return Command{get_string(p, "script"), get_hop(p)};
    case Kind::chat: return Chat{get_string(p, "text")};
    case Kind::file_manifest:
      return FileManifest{get_string(p, "file_id"),     get_string(p, "name"),
                          get_u64(p, "total_bytes"),    get_u64(p, "chunk_size"),
                          get_u64(p, "chunk_count"),    get_string(p, "digest")};
    case Kind::file_chunk: {
      FileChunk c{get_string(p, "file_id"), get_u64(p, "index"), {}};
      auto data = base64_decode(get_string(p, "data"));
      if (!data) fail(DecodeErrorCode::field_out_of_range, "'data' is not valid base64");
      c.data = std::move(*data);
      return c;
    }
    case Kind::file_ack:
      return FileAck{get_string(p, "file_id"), get_bool(p, "ok"), get_string(p, "reason")};
    case Kind::error: return Error{get_string(p, "code"), get_string(p, "message")};
  }
  fail(DecodeErrorCode::unknown_kind, "unhandled kind");
}

// ---- invariants -------------------------------------------------------------

bool finite(const Vec3& v) { return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z); }

bool is_token(std::string_view s) { return PeerId::is_valid(s); }

bool is_hex_digest(std::string_view s) {
  if (s.size() != 64) return false;
  for (char c : s) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

std::optional<DecodeError> out_of_range(std::string detail) {
  return DecodeError{DecodeErrorCode::field_out_of_range, std::move(detail)};
}

struct PayloadChecker {
  std::optional<DecodeError> operator()(const Hello& p) const {
    if (p.policy && !Policy::parse(*p.policy)) return out_of_range("hello policy is not r,s,c/r,s,c");
    return std::nullopt;
  }
  std::optional<DecodeError> operator()(const Rotation& p) const {
    if (!is_unit(p.q, kDecodeUnitTolerance)) return out_of_range("rotation quaternion is not unit");
    return std::nullopt;
  }
  std::optional<DecodeError> operator()(const State& p) const {
    if (!is_unit(p.camera.orientation, kDecodeUnitTolerance)) {
      return out_of_range("state quaternion is not unit");
    }
    if (!(p.camera.zoom > 0.0) || !std::isfinite(p.camera.zoom)) {
      return out_of_range("zoom must be positive and finite");
    }
    if (!finite(p.camera.center)) return out_of_range("center must be finite");
    return std::nullopt;
  }
  std::optional<DecodeError> operator()(const Command& p) const {
    if (p.script.size() > kMaxScriptBytes) return out_of_range("command script exceeds 65536 bytes");
    if (!is_valid_utf8(p.script)) return out_of_range("command script is not UTF-8");
    return std::nullopt;
  }
  std::optional<DecodeError> operator()(const Chat& p) const {
    if (!is_valid_utf8(p.text)) return out_of_range("chat text is not UTF-8");
    return std::nullopt;
  }
  std::optional<DecodeError> operator()(const FileManifest& p) const {
    if (!is_token(p.file_id)) return out_of_range("file_id must be 16 alphanumerics");
    if (p.chunk_size == 0) return out_of_range("chunk_size must be >= 1");
    const std::uint64_t expected = p.total_bytes / p.chunk_size + (p.total_bytes % p.chunk_size != 0);
    if (p.chunk_count != expected) return out_of_range("chunk_count != ceil(total_bytes / chunk_size)");
    if (!is_hex_digest(p.digest)) return out_of_range("digest must be 64 lowercase hex digits");
    if (!is_valid_utf8(p.name)) return out_of_range("file name is not UTF-8");
    return std::nullopt;
  }
  std::optional<DecodeError> operator()(const FileChunk& p) const {
    if (!is_token(p.file_id)) return out_of_range("file_id must be 16 alphanumerics");
    if (p.data.size() > kMaxChunkBytes) return out_of_range("chunk data exceeds 1 MiB");
    return std::nullopt;
  }
  std::optional<DecodeError> operator()(const FileAck& p) const {
    if (!is_token(p.file_id)) return out_of_range("file_id must be 16 alphanumerics");
    return std::nullopt;
  }
  template <class T>
  std::optional<DecodeError> operator()(const T&) const {
    return std::nullopt;
  }
};

}  // namespace

std::string_view decode_error_name(DecodeErrorCode code) noexcept {
  switch (code) {
    case DecodeErrorCode::malformed: return "malformed";
    case DecodeErrorCode::unknown_kind: return "unknown_kind";
    case DecodeErrorCode::unsupported_version: return "unsupported_version";
    case DecodeErrorCode::field_out_of_range: return "field_out_of_range";
  }
  return "malformed";
}

bool is_valid_utf8(std::string_view text) noexcept {
  std::size_t i = 0;
  const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
  while (i < text.size()) {
    const unsigned char c = byte(i);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > text.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      if ((byte(i + k) & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (byte(i + k) & 0x3F);
    }
    // Overlong forms, surrogates and values past U+10FFFF.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += len;
  }
  return true;
}

std::optional<DecodeError> validate_envelope(const Envelope& e) {
  if (e.version != kProtocolVersion) {
    return DecodeError{DecodeErrorCode::unsupported_version, "unsupported protocol version"};
  }
  return std::visit(PayloadChecker{}, e.payload);
}

std::string encode_envelope(const Envelope& e) {
  json j;
  j["v"] = e.version;
  j["kind"] = kind_name(e.kind());
  j["from"] = e.from.wire();
  j["to"] = e.to.wire();
  j["seq"] = e.seq;
  j["ts"] = e.ts;
  j["payload"] = std::visit(PayloadEncoder{}, e.payload);
  return j.dump();
}

Result<Envelope, DecodeError> decode_envelope(std::string_view bytes) {
  if (!nesting_within_limit(bytes)) {
    return DecodeError{DecodeErrorCode::malformed, "nesting too deep"};
  }
  json j = json::parse(bytes.begin(), bytes.end(), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) return DecodeError{DecodeErrorCode::malformed, "not structured text"};
  if (!j.is_object()) return DecodeError{DecodeErrorCode::malformed, "envelope must be an object"};

  try {
    const json& v = field(j, "v");
    if (!v.is_number_integer()) fail(DecodeErrorCode::malformed, "'v' must be an integer");
    if (v.get<std::int64_t>() != kProtocolVersion) {
      fail(DecodeErrorCode::unsupported_version, "version " + v.dump() + " is not supported");
    }
    const std::string kind_text = get_string(j, "kind");
    const auto kind = parse_kind(kind_text);
    if (!kind) fail(DecodeErrorCode::unknown_kind, "unknown kind '" + kind_text + "'");

    Envelope e;
    auto from = Address::parse(get_string(j, "from"));
    if (!from) fail(DecodeErrorCode::field_out_of_range, "'from' is not an address");
    auto to = Address::parse(get_string(j, "to"));
    if (!to) fail(DecodeErrorCode::field_out_of_range, "'to' is not an address");
    e.from = std::move(*from);
    e.to = std::move(*to);
    e.seq = get_u64(j, "seq");
    e.ts = get_i64(j, "ts");

    const json& payload = field(j, "payload");
    if (!payload.is_object()) fail(DecodeErrorCode::malformed, "'payload' must be an object");
    e.payload = decode_payload(*kind, payload);

    if (auto err = validate_envelope(e)) return std::move(*err);
    // Accepted quaternions are stored as the exact value that re-encodes to
    // the same text, so decode(encode(decode(x))) == decode(x).
    if (auto* r = std::get_if<Rotation>(&e.payload)) r->q = to_wire_precision(r->q);
    if (auto* st = std::get_if<State>(&e.payload)) st->camera.orientation = to_wire_precision(st->camera.orientation);
    return e;
  } catch (const Failure& f) {
    return f.error;
  } catch (const json::exception& ex) {
    return DecodeError{DecodeErrorCode::malformed, ex.what()};
  }
}

}  // namespace molsync
