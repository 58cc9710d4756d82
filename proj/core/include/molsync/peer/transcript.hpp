#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "molsync/protocol/envelope.hpp"

namespace molsync::peer {

enum class TranscriptEvent { sent, received, action, error };

std::string_view transcript_event_name(TranscriptEvent e) noexcept;

struct TranscriptEntry {
  std::int64_t t_ms = 0;
  TranscriptEvent event = TranscriptEvent::action;
  std::string kind;  // envelope kind, or the action verb
  std::string from;
  std::string to;
  std::uint64_t seq = 0;
  std::uint64_t bytes = 0;
  std::string detail;
};

class Transcript {
 public:
  void sent(std::int64_t t_ms, const Envelope& e, std::size_t bytes);
  void received(std::int64_t t_ms, const Envelope& e, std::size_t bytes, std::string detail = {});
  void action(std::int64_t t_ms, std::string_view verb, std::string detail = {});
  void error(std::int64_t t_ms, std::string_view what, std::string detail);

  const std::vector<TranscriptEntry>& entries() const noexcept { return entries_; }
  std::size_t count(TranscriptEvent event, Kind kind) const;

  // One JSON object per line.
  void write_jsonl(std::ostream& os) const;
  static std::string to_json(const TranscriptEntry& entry);

 private:
  std::vector<TranscriptEntry> entries_;
};

}  // namespace molsync::peer
