#include "eprqkd/transcript.hpp"

#include <ostream>
#include <sstream>

#include "eprqkd/errors.hpp"

namespace eprqkd {

void Transcript::record(int step, std::string actor, std::string event, Json payload) {
  if (!enabled_) return;
  events_.push_back({trial_, step, std::move(actor), std::move(event), std::move(payload)});
}

void Transcript::write_jsonl(std::ostream& out) const {
  for (const auto& e : events_) {
    Json line;
    line["trial"] = e.trial;
    line["step"] = e.step;
    line["actor"] = e.actor;
    line["event"] = e.event;
    line["payload"] = e.payload;
    out << line.dump() << '\n';
  }
}

std::string Transcript::to_jsonl() const {
  std::ostringstream out;
  write_jsonl(out);
  return out.str();
}

TranscriptEvent parse_transcript_line(const std::string& line) {
  try {
    const auto j = Json::parse(line);
    return {j.at("trial").get<std::uint64_t>(), j.at("step").get<int>(),
            j.at("actor").get<std::string>(), j.at("event").get<std::string>(), j.at("payload")};
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed transcript line: ") + e.what());
  }
}

}  // namespace eprqkd
