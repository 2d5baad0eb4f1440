#pragma once

#include "costudy/json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace costudy {

enum class EventKind {
    // perceive: user input
    user_chat,
    user_audio,
    brush_query,
    notes_edit,
    code_edit,
    activity_ping,
    video_position,
    persona_change,
    feature_view,
    // act: agent and system output
    agent_chat,
    agent_audio,
    action_change,
    shared_screen_control,
    notes_update,
    profile_update,
    trigger_fired,
    usage_increment,
    transcription,
    system_notice,
    // internal
    scheduler_tick,
    gated,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> event_kind_from_string(std::string_view name);

bool is_perceive(EventKind kind);

// Kinds that carry AI-generated output and are suppressed in baseline mode.
// action_change counts only for active actions (phase present).
bool is_agent_authored(EventKind kind, const Json& data);

struct SessionEvent {
    std::uint64_t seq = 0;
    std::int64_t at_ms = 0;
    EventKind kind = EventKind::gated;
    std::optional<std::uint64_t> cause;
    Json data = Json::object();

    bool operator==(const SessionEvent&) const = default;
};

// {"seq":..,"at_ms":..,"kind":..,"cause":..|null,"data":{..}}
Json to_json(const SessionEvent& event);
SessionEvent event_from_json(const Json& j);

// One JSONL line without the trailing newline.
std::string to_jsonl(const SessionEvent& event);

} // namespace costudy
