#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace eprqkd {

using Json = nlohmann::ordered_json;

/// One line of a protocol transcript.
struct TranscriptEvent {
  std::uint64_t trial = 0;
  int step = 0;  // protocol step 1..7
  std::string actor;
  std::string event;
  Json payload;
};

/// Ordered event log of one or more protocol runs.
///
/// A disabled transcript drops every event so callers can record
/// unconditionally. Serialized as one JSON object per line with the keys
/// trial, step, actor, event, payload in that order.
class Transcript {
 public:
  explicit Transcript(bool enabled = true, std::uint64_t trial = 0)
      : enabled_(enabled), trial_(trial) {}

  [[nodiscard]] bool enabled() const { return enabled_; }
  [[nodiscard]] std::uint64_t trial() const { return trial_; }

  void record(int step, std::string actor, std::string event, Json payload = Json::object());

  [[nodiscard]] const std::vector<TranscriptEvent>& events() const { return events_; }

  void write_jsonl(std::ostream& out) const;
  [[nodiscard]] std::string to_jsonl() const;

 private:
  bool enabled_;
  std::uint64_t trial_;
  std::vector<TranscriptEvent> events_;
};

/// Parses one transcript line. Throws ValidationError on malformed input.
TranscriptEvent parse_transcript_line(const std::string& line);

}  // namespace eprqkd
