#include "costudy/event.hpp"

#include "costudy/errors.hpp"

#include <array>
#include <utility>

namespace costudy {

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 21> kKindNames{{
    {EventKind::user_chat, "user_chat"},
    {EventKind::user_audio, "user_audio"},
    {EventKind::brush_query, "brush_query"},
    {EventKind::notes_edit, "notes_edit"},
    {EventKind::code_edit, "code_edit"},
    {EventKind::activity_ping, "activity_ping"},
    {EventKind::video_position, "video_position"},
    {EventKind::persona_change, "persona_change"},
    {EventKind::feature_view, "feature_view"},
    {EventKind::agent_chat, "agent_chat"},
    {EventKind::agent_audio, "agent_audio"},
    {EventKind::action_change, "action_change"},
    {EventKind::shared_screen_control, "shared_screen_control"},
    {EventKind::notes_update, "notes_update"},
    {EventKind::profile_update, "profile_update"},
    {EventKind::trigger_fired, "trigger_fired"},
    {EventKind::usage_increment, "usage_increment"},
    {EventKind::transcription, "transcription"},
    {EventKind::system_notice, "system_notice"},
    {EventKind::scheduler_tick, "scheduler_tick"},
    {EventKind::gated, "gated"},
}};

} // namespace

std::string_view to_string(EventKind kind) {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) return name;
    }
    return "unknown";
}

std::optional<EventKind> event_kind_from_string(std::string_view name) {
    for (const auto& [k, n] : kKindNames) {
        if (n == name) return k;
    }
    return std::nullopt;
}

bool is_perceive(EventKind kind) {
    return kind <= EventKind::feature_view;
}

bool is_agent_authored(EventKind kind, const Json& data) {
    switch (kind) {
    case EventKind::agent_chat:
    case EventKind::agent_audio:
    case EventKind::notes_update:
    case EventKind::profile_update:
    case EventKind::trigger_fired:
        return true;
    case EventKind::action_change: {
        const auto it = data.find("phase");
        return it != data.end() && !it->is_null();
    }
    default:
        return false;
    }
}

Json to_json(const SessionEvent& event) {
    Json j = Json::object();
    j["seq"] = event.seq;
    j["at_ms"] = event.at_ms;
    j["kind"] = to_string(event.kind);
    j["cause"] = event.cause ? Json(*event.cause) : Json(nullptr);
    j["data"] = event.data;
    return j;
}

SessionEvent event_from_json(const Json& j) {
    if (!j.is_object()) throw ValidationError("", "event must be a JSON object");
    SessionEvent ev;
    try {
        ev.seq = j.at("seq").get<std::uint64_t>();
        ev.at_ms = j.at("at_ms").get<std::int64_t>();
        const auto kind = event_kind_from_string(j.at("kind").get<std::string>());
        if (!kind) throw ValidationError("kind", "unknown event kind");
        ev.kind = *kind;
        const auto& cause = j.at("cause");
        if (!cause.is_null()) ev.cause = cause.get<std::uint64_t>();
        ev.data = j.at("data");
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("", std::string("malformed event: ") + e.what());
    }
    return ev;
}

std::string to_jsonl(const SessionEvent& event) {
    return to_json(event).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

} // namespace costudy
