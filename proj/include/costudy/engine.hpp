#pragma once

#include "costudy/json.hpp"
#include "costudy/session.hpp"

#include <istream>
#include <memory>
#include <string_view>
#include <vector>

namespace costudy {

struct IngestResult {
    // Seq of the perceive event the input was recorded as.
    std::uint64_t seq = 0;
    std::vector<SessionEvent> events;
};

// Validates a wire event {"kind", "data"} and applies it at now_ms. Elapsed
// scheduler segments and idle triggers are processed first. Throws
// ValidationError naming the offending field; nothing is logged in that case.
IngestResult ingest(Session& session, const Json& wire, std::int64_t now_ms);

// Runs scheduler segments, idle triggers and due agent-to-agent forwards up
// to now_ms. When anything happens a scheduler_tick marker is logged first
// and becomes the cause of what follows.
std::vector<SessionEvent> advance(Session& session, std::int64_t now_ms);

std::vector<SessionEvent> read_log(std::istream& in);
std::vector<SessionEvent> read_log(std::string_view text);

// Rebuilds a session by re-ingesting the perceive events of a log and
// advancing at its scheduler_tick markers.
Session replay(SessionConfig config, std::string_view transcript_text, std::shared_ptr<Provider> provider,
               const std::vector<SessionEvent>& log, std::string session_id = "session");

} // namespace costudy
