#include "costudy/engine.hpp"

#include "costudy/encoding.hpp"
#include "costudy/errors.hpp"
#include "costudy/router.hpp"

#include <sstream>

namespace costudy {

namespace {

const Json& field(const Json& data, const char* name) {
    const auto it = data.find(name);
    if (it == data.end()) throw ValidationError(name, "is required");
    return *it;
}

std::string string_field(const Json& data, const char* name) {
    const Json& v = field(data, name);
    if (!v.is_string()) throw ValidationError(name, "must be a string");
    return v.get<std::string>();
}

std::int64_t int_field(const Json& data, const char* name) {
    const Json& v = field(data, name);
    if (!v.is_number_integer()) throw ValidationError(name, "must be an integer");
    return v.get<std::int64_t>();
}

std::string bytes_field(const Json& data, const char* name) {
    auto bytes = base64_decode(string_field(data, name));
    if (!bytes) throw ValidationError(name, "is not valid base64");
    return std::move(*bytes);
}

PersonaChanges parse_changes(const Json& v) {
    if (!v.is_object()) throw ValidationError("changes", "must be an object");
    PersonaChanges c;
    for (auto it = v.begin(); it != v.end(); ++it) {
        if (!it.value().is_string()) throw ValidationError("changes." + it.key(), "must be a string");
        std::string value = it.value().get<std::string>();
        if (it.key() == "name") c.name = std::move(value);
        else if (it.key() == "tone") c.tone = std::move(value);
        else if (it.key() == "interaction_style") c.interaction_style = std::move(value);
        else if (it.key() == "characteristic") c.characteristic = std::move(value);
        else throw ValidationError("changes." + it.key(), "is not a persona attribute");
    }
    return c;
}

std::vector<SessionEvent> since(const Session& session, std::uint64_t seq) {
    const auto& log = session.log();
    return {log.begin() + static_cast<std::ptrdiff_t>(seq), log.end()};
}

std::uint64_t first_perceive(const std::vector<SessionEvent>& events) {
    for (const auto& ev : events) {
        if (is_perceive(ev.kind)) return ev.seq;
    }
    return 0;
}

SessionEvent log_input(Session& session, EventKind kind, Json data, std::optional<Channel> channel) {
    if (channel) observe(session.activity(), *channel, session.clock());
    return session.append_event(kind, std::move(data), std::nullopt);
}

void handle_persona_change(Session& session, const std::string& agent_id, const PersonaChanges& changes,
                           const Json& data) {
    CoLearner& agent = session.agent(agent_id);
    const auto ev = log_input(session, EventKind::persona_change,
                              Json{{"agent_id", agent_id}, {"changes", field(data, "changes")}}, Channel::mouse);
    session.record_usage(Feature::customization_changes, ev.seq);
    if (session.mode() == Mode::baseline) {
        agent.apply_persona_changes(changes);
        return;
    }
    bool regenerated = true;
    try {
        agent.update_persona(session.provider(), changes);
    } catch (const Error&) {
        regenerated = false;
    }
    if (regenerated) {
        const auto& p = agent.persona();
        session.append_event(EventKind::profile_update,
                             Json{{"agent_id", agent_id},
                                  {"persona",
                                   {{"name", p.name},
                                    {"tone", p.tone},
                                    {"interaction_style", p.interaction_style},
                                    {"characteristic", p.characteristic},
                                    {"voice_id", p.voice_id}}},
                                  {"profile", agent.profile()}},
                             ev.seq);
        session.append_event(EventKind::notes_update, Json{{"agent_id", agent_id}, {"notes", agent.notes()}}, ev.seq);
    } else {
        session.append_event(EventKind::system_notice,
                             Json{{"text", "The profile for " + agent.persona().name + " could not be regenerated."},
                                  {"reason", "provider_failure"},
                                  {"agent_id", agent_id}},
                             ev.seq);
    }
}

} // namespace

IngestResult ingest(Session& session, const Json& wire, std::int64_t now_ms) {
    if (!wire.is_object()) throw ValidationError("event", "must be a JSON object");
    const std::string kind_name = string_field(wire, "kind");
    const auto kind = event_kind_from_string(kind_name);
    if (!kind || !is_perceive(*kind)) throw ValidationError("kind", "unsupported event kind \"" + kind_name + "\"");
    const Json data = wire.contains("data") ? wire.at("data") : Json::object();
    if (!data.is_object()) throw ValidationError("data", "must be an object");

    // Parse and validate everything before the session changes.
    std::string room, text, agent_id, audio, mime, feature;
    std::optional<Channel> channel;
    BrushQuery brush;
    PersonaChanges changes;
    std::int64_t position = 0;
    switch (*kind) {
    case EventKind::user_chat:
        room = string_field(data, "room");
        text = string_field(data, "text");
        if (room != kGroupRoom) {
            if (room.rfind("private:", 0) != 0) throw ValidationError("room", "unknown room \"" + room + "\"");
            agent_id = room.substr(8);
            try {
                session.agent_index(agent_id);
            } catch (const ValidationError&) {
                throw ValidationError("room", "unknown room \"" + room + "\"");
            }
        }
        break;
    case EventKind::user_audio:
        agent_id = string_field(data, "agent_id");
        session.agent_index(agent_id);
        audio = bytes_field(data, "audio_b64");
        mime = data.contains("mime") ? string_field(data, "mime") : std::string("audio/wav");
        break;
    case EventKind::brush_query: {
        const Json& region = field(data, "region");
        if (!region.is_array() || region.size() != 4) throw ValidationError("region", "must be [min_x, min_y, max_x, max_y]");
        for (const auto& v : region) {
            if (!v.is_number_integer()) throw ValidationError("region", "coordinates must be integers");
        }
        brush.min_x = region[0].get<int>();
        brush.min_y = region[1].get<int>();
        brush.max_x = region[2].get<int>();
        brush.max_y = region[3].get<int>();
        brush.image = bytes_field(data, "image_b64");
        if (data.contains("mime")) brush.image_mime = string_field(data, "mime");
        brush.question = string_field(data, "question");
        brush.video_position_ms = data.contains("video_ms") ? int_field(data, "video_ms") : 0;
        brush.validate(session.config().video);
        break;
    }
    case EventKind::notes_edit:
    case EventKind::code_edit:
        text = string_field(data, "text");
        break;
    case EventKind::activity_ping: {
        const std::string name = string_field(data, "channel");
        channel = channel_from_string(name);
        if (!channel) throw ValidationError("channel", "unknown channel \"" + name + "\"");
        break;
    }
    case EventKind::video_position:
        position = int_field(data, "ms");
        if (position < 0) throw ValidationError("ms", "must be non-negative");
        break;
    case EventKind::persona_change: {
        agent_id = string_field(data, "agent_id");
        changes = parse_changes(field(data, "changes"));
        // Validate on a copy so that rejected changes leave no trace in the log.
        CoLearner probe = session.agent(agent_id);
        probe.apply_persona_changes(changes);
        break;
    }
    case EventKind::feature_view: {
        feature = string_field(data, "feature");
        const auto f = feature_from_string(feature);
        if (!f || (*f != Feature::notes_views && *f != Feature::profile_views)) {
            throw ValidationError("feature", "must be \"notes\" or \"profile\"");
        }
        if (data.contains("agent_id")) {
            agent_id = string_field(data, "agent_id");
            session.agent_index(agent_id);
        }
        break;
    }
    default:
        break;
    }

    const auto from = session.last_seq();
    advance(session, now_ms);
    const auto before_input = session.last_seq();

    switch (*kind) {
    case EventKind::user_chat:
        if (room == kGroupRoom) route_group(session, text);
        else route_private(session, agent_id, text);
        break;
    case EventKind::user_audio:
        route_audio(session, agent_id, audio, mime);
        break;
    case EventKind::brush_query:
        route_brush(session, brush);
        break;
    case EventKind::notes_edit:
        log_input(session, EventKind::notes_edit, Json{{"text", text}}, Channel::notes);
        break;
    case EventKind::code_edit:
        log_input(session, EventKind::code_edit, Json{{"text", text}}, Channel::code);
        break;
    case EventKind::activity_ping:
        log_input(session, EventKind::activity_ping, Json{{"channel", to_string(*channel)}}, channel);
        break;
    case EventKind::video_position:
        log_input(session, EventKind::video_position, Json{{"ms", position}}, std::nullopt);
        break;
    case EventKind::persona_change:
        handle_persona_change(session, agent_id, changes, data);
        break;
    case EventKind::feature_view: {
        Json payload{{"feature", feature}};
        if (!agent_id.empty()) payload["agent_id"] = agent_id;
        const auto ev = log_input(session, EventKind::feature_view, std::move(payload), Channel::mouse);
        session.record_usage(*feature_from_string(feature), ev.seq);
        break;
    }
    default:
        break;
    }

    IngestResult result;
    result.events = since(session, from);
    result.seq = first_perceive(since(session, before_input));
    return result;
}

std::vector<SessionEvent> advance(Session& session, std::int64_t now_ms) {
    session.set_clock(now_ms);
    const std::int64_t now = session.clock();
    const auto from = session.last_seq();

    std::vector<std::vector<ActionChange>> changes(session.roster_size());
    bool any = false;
    for (std::size_t i = 0; i < session.roster_size(); ++i) {
        changes[i] = session.scheduler(i).tick(now);
        any = any || !changes[i].empty();
    }
    const auto triggers = tick(session.activity(), session.config().idle, now);
    const bool forward_due =
        session.mode() == Mode::full && session.roster_size() > 1 && now >= session.next_forward_ms();
    if (!any && triggers.empty() && !forward_due) return {};

    const auto marker = session.append_event(EventKind::scheduler_tick, Json{{"now_ms", now}}, std::nullopt);
    for (std::size_t i = 0; i < changes.size(); ++i) {
        if (!changes[i].empty()) session.emit_action_changes(i, changes[i], marker.seq);
    }
    for (const Trigger t : triggers) dispatch_trigger(session, t, marker.seq);
    if (forward_due) forward_between_agents(session, marker.seq);
    return since(session, from);
}

std::vector<SessionEvent> read_log(std::istream& in) {
    std::vector<SessionEvent> events;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            events.push_back(event_from_json(Json::parse(line)));
        } catch (const Json::exception& e) {
            throw ParseError(line_no, e.what());
        } catch (const ValidationError& e) {
            throw ParseError(line_no, e.what());
        }
    }
    return events;
}

std::vector<SessionEvent> read_log(std::string_view text) {
    std::istringstream in{std::string(text)};
    return read_log(in);
}

Session replay(SessionConfig config, std::string_view transcript_text, std::shared_ptr<Provider> provider,
               const std::vector<SessionEvent>& log, std::string session_id) {
    Session session = Session::create(std::move(config), transcript_text, std::move(provider), std::move(session_id));
    for (const auto& ev : log) {
        if (ev.kind == EventKind::scheduler_tick) {
            advance(session, ev.at_ms);
        } else if (is_perceive(ev.kind)) {
            ingest(session, Json{{"kind", to_string(ev.kind)}, {"data", ev.data}}, ev.at_ms);
        }
    }
    return session;
}

} // namespace costudy
