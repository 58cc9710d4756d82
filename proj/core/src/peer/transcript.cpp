#include "molsync/peer/transcript.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>

namespace molsync::peer {

std::string_view transcript_event_name(TranscriptEvent e) noexcept {
  switch (e) {
    case TranscriptEvent::sent: return "sent";
    case TranscriptEvent::received: return "received";
    case TranscriptEvent::action: return "action";
    case TranscriptEvent::error: return "error";
  }
  return "action";
}

void Transcript::sent(std::int64_t t_ms, const Envelope& e, std::size_t bytes) {
  entries_.push_back({t_ms, TranscriptEvent::sent, std::string(kind_name(e.kind())), e.from.wire(),
                      e.to.wire(), e.seq, bytes, {}});
}

void Transcript::received(std::int64_t t_ms, const Envelope& e, std::size_t bytes, std::string detail) {
  entries_.push_back({t_ms, TranscriptEvent::received, std::string(kind_name(e.kind())),
                      e.from.wire(), e.to.wire(), e.seq, bytes, std::move(detail)});
}

void Transcript::action(std::int64_t t_ms, std::string_view verb, std::string detail) {
  entries_.push_back({t_ms, TranscriptEvent::action, std::string(verb), {}, {}, 0, 0, std::move(detail)});
}

void Transcript::error(std::int64_t t_ms, std::string_view what, std::string detail) {
  entries_.push_back({t_ms, TranscriptEvent::error, std::string(what), {}, {}, 0, 0, std::move(detail)});
}

std::size_t Transcript::count(TranscriptEvent event, Kind kind) const {
  const std::string_view name = kind_name(kind);
  return static_cast<std::size_t>(std::count_if(entries_.begin(), entries_.end(), [&](const auto& e) {
    return e.event == event && e.kind == name;
  }));
}

std::string Transcript::to_json(const TranscriptEntry& entry) {
  nlohmann::json j = {{"t", entry.t_ms},
                      {"event", transcript_event_name(entry.event)},
                      {"kind", entry.kind}};
  if (entry.event == TranscriptEvent::sent || entry.event == TranscriptEvent::received) {
    j["from"] = entry.from;
    j["to"] = entry.to;
    j["seq"] = entry.seq;
    j["bytes"] = entry.bytes;
  }
  if (!entry.detail.empty()) j["detail"] = entry.detail;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

void Transcript::write_jsonl(std::ostream& os) const {
  for (const auto& e : entries_) os << to_json(e) << '\n';
}

}  // namespace molsync::peer
