#include "costudy/session.hpp"

#include "costudy/errors.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace costudy {

std::string_view to_string(Modality m) {
    switch (m) {
    case Modality::text: return "text";
    case Modality::audio: return "audio";
    case Modality::brush_reply: return "brush_reply";
    case Modality::shared_notes: return "shared_notes";
    case Modality::code_review: return "code_review";
    case Modality::progress_inquiry: return "progress_inquiry";
    }
    return "text";
}

std::optional<Modality> modality_from_string(std::string_view s) {
    for (auto m : {Modality::text, Modality::audio, Modality::brush_reply, Modality::shared_notes,
                   Modality::code_review, Modality::progress_inquiry}) {
        if (to_string(m) == s) return m;
    }
    return std::nullopt;
}

std::string private_room_id(std::string_view agent_id) {
    return "private:" + std::string(agent_id);
}

Session Session::create(SessionConfig config, std::string_view transcript_text, std::shared_ptr<Provider> provider,
                        std::string session_id) {
    if (!provider) throw ConfigError("session: provider is required");
    config.validate();

    Session s;
    s.id_ = std::move(session_id);
    s.transcript_ = parse_transcript(transcript_text);
    s.provider_ = std::move(provider);

    const auto voices = s.provider_->voices();
    std::set<std::string> used;
    for (const auto& p : config.roster) {
        if (p.voice_id.empty()) continue;
        if (std::find(voices.begin(), voices.end(), p.voice_id) == voices.end()) {
            throw ConfigError("persona " + p.name + ": unknown voice \"" + p.voice_id + "\"");
        }
        used.insert(p.voice_id);
    }
    // Unset voices take the first unused one, cycling once the set runs out.
    std::size_t next_voice = 0;
    for (auto& p : config.roster) {
        if (!p.voice_id.empty() || voices.empty()) continue;
        std::string pick;
        for (const auto& v : voices) {
            if (!used.count(v)) {
                pick = v;
                break;
            }
        }
        if (pick.empty()) pick = voices[next_voice++ % voices.size()];
        used.insert(pick);
        p.voice_id = pick;
    }
    s.config_ = std::move(config);

    s.rooms_.emplace(std::string(kGroupRoom), ChatRoom{std::string(kGroupRoom), {}});
    for (std::size_t i = 0; i < s.config_.roster.size(); ++i) {
        const std::string id = "agent-" + std::to_string(i + 1);
        s.agents_.emplace_back(id, s.config_.roster[i], s.transcript_, s.config_.agent);
        s.schedulers_.emplace_back(s.config_.scheduler, Rng(derive_seed(s.config_.seed, "scheduler/" + id)), 0);
        s.rooms_.emplace(private_room_id(id), ChatRoom{private_room_id(id), {}});
    }
    s.router_rng_ = Rng(derive_seed(s.config_.seed, "router"));
    s.schedule_forward(0);

    if (s.config_.mode == Mode::full) {
        for (auto& agent : s.agents_) {
            try {
                agent.generate_notes(*s.provider_);
                agent.generate_profile(*s.provider_);
            } catch (const Error&) {
                // Left empty; regenerated on the next share-notes trigger or persona change.
            }
        }
    }
    return s;
}

void Session::set_clock(std::int64_t now_ms) {
    clock_ms_ = std::max(clock_ms_, now_ms);
}

void Session::schedule_forward(std::int64_t from_ms) {
    next_forward_ms_ = from_ms + router_rng_.uniform_int(config_.router.forward_interval_ms.lo,
                                                         config_.router.forward_interval_ms.hi);
}

SessionEvent Session::append_event(EventKind kind, Json data, std::optional<std::uint64_t> cause) {
    if (!data.is_object()) data = Json::object();
    SessionEvent ev;
    ev.seq = last_seq() + 1;
    ev.at_ms = clock_ms_;
    ev.cause = cause;
    if (config_.mode == Mode::baseline && is_agent_authored(kind, data)) {
        Json marker = Json::object();
        marker["blocked_kind"] = to_string(kind);
        if (data.contains("agent_id")) marker["agent_id"] = data["agent_id"];
        ev.kind = EventKind::gated;
        ev.data = std::move(marker);
    } else {
        ev.kind = kind;
        ev.data = std::move(data);
    }
    apply(ev);
    log_.push_back(ev);
    return ev;
}

void Session::apply(const SessionEvent& ev) {
    auto post = [&](const std::string& room_id, std::string sender, Modality modality) {
        const auto it = rooms_.find(room_id);
        if (it == rooms_.end()) throw std::logic_error("no chat room " + room_id);
        it->second.messages.push_back(
            ChatMessage{ev.seq, std::move(sender), ev.data.value("text", std::string()), ev.at_ms, modality, ev.cause});
    };

    switch (ev.kind) {
    case EventKind::user_chat:
        post(ev.data.at("room").get<std::string>(), std::string(kUserSender), Modality::text);
        break;
    case EventKind::transcription:
        post(ev.data.at("room").get<std::string>(), std::string(kUserSender), Modality::audio);
        break;
    case EventKind::agent_chat: {
        const auto room_id = ev.data.at("room").get<std::string>();
        const auto agent_id = ev.data.at("agent_id").get<std::string>();
        if (room_id != kGroupRoom && room_id != private_room_id(agent_id)) {
            throw std::logic_error(agent_id + " may not post in " + room_id);
        }
        post(room_id, agent_id, modality_from_string(ev.data.value("modality", std::string("text"))).value_or(Modality::text));
        break;
    }
    case EventKind::system_notice:
        if (ev.data.contains("room")) post(ev.data["room"].get<std::string>(), std::string(kSystemSender), Modality::text);
        break;
    case EventKind::notes_edit:
        notes_doc_.text = ev.data.value("text", std::string());
        notes_doc_.last_edit_ms = ev.at_ms;
        break;
    case EventKind::code_edit:
        code_doc_.text = ev.data.value("text", std::string());
        code_doc_.last_edit_ms = ev.at_ms;
        break;
    default:
        break;
    }
}

const UsageCounters& Session::record_usage(Feature feature, std::optional<std::uint64_t> cause) {
    const auto count = usage_.increment(feature);
    append_event(EventKind::usage_increment, Json{{"feature", to_string(feature)}, {"count", count}}, cause);
    return usage_;
}

const UsageCounters& Session::record_usage(std::string_view feature, std::optional<std::uint64_t> cause) {
    const auto f = feature_from_string(feature);
    if (!f) throw ValidationError("feature", "unknown feature \"" + std::string(feature) + "\"");
    return record_usage(*f, cause);
}

void Session::export_log(std::ostream& out) const {
    for (const auto& ev : log_) out << to_jsonl(ev) << '\n';
}

std::string Session::export_log() const {
    std::ostringstream ss;
    export_log(ss);
    return ss.str();
}

std::size_t Session::agent_index(std::string_view agent_id) const {
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        if (agents_[i].id() == agent_id) return i;
    }
    throw ValidationError("agent_id", "unknown co-learner \"" + std::string(agent_id) + "\"");
}

const ChatRoom& Session::room(std::string_view room_id) const {
    const auto it = rooms_.find(std::string(room_id));
    if (it == rooms_.end()) throw ValidationError("room", "unknown room \"" + std::string(room_id) + "\"");
    return it->second;
}

std::string Session::store_clip(SpeechClip clip) {
    std::string id = "clip-" + std::to_string(clips_.size() + 1);
    clips_.emplace(id, std::move(clip));
    return id;
}

const SpeechClip* Session::clip(std::string_view clip_id) const {
    const auto it = clips_.find(std::string(clip_id));
    return it == clips_.end() ? nullptr : &it->second;
}

void Session::emit_action_changes(std::size_t agent_index, const std::vector<ActionChange>& changes,
                                  std::optional<std::uint64_t> cause) {
    const std::string& agent_id = agents_.at(agent_index).id();
    for (const auto& change : changes) {
        Json data = Json::object();
        data["agent_id"] = agent_id;
        if (const auto* passive = std::get_if<PassiveAction>(&change.action)) {
            data["action"] = to_string(*passive);
            data["phase"] = nullptr;
        } else {
            const auto& seg = std::get<ActiveSegment>(change.action);
            data["action"] = to_string(seg.action);
            data["phase"] = to_string(seg.phase);
        }
        data["duration_ms"] = change.duration_ms;
        data["started_ms"] = change.at_ms;
        const auto ev = append_event(EventKind::action_change, std::move(data), cause);
        if (change.screen_playing) {
            append_event(EventKind::shared_screen_control,
                         Json{{"agent_id", agent_id},
                              {"playing", *change.screen_playing},
                              {"position_ms", change.screen_position_ms},
                              {"started_ms", change.at_ms}},
                         ev.kind == EventKind::gated ? cause : std::optional<std::uint64_t>(ev.seq));
        }
    }
}

Json Session::snapshot() const {
    Json roster = Json::array();
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        const auto& a = agents_[i];
        const auto& sch = schedulers_[i];
        roster.push_back(Json{
            {"agent_id", a.id()},
            {"name", a.persona().name},
            {"tone", a.persona().tone},
            {"interaction_style", a.persona().interaction_style},
            {"characteristic", a.persona().characteristic},
            {"voice_id", a.persona().voice_id},
            {"notes", a.notes()},
            {"profile", a.profile()},
            {"action", sch.state().label()},
            {"action_until_ms", sch.state().until_ms},
            {"shared_screen", Json{{"position_ms", sch.screen_position(clock_ms_)}, {"playing", sch.screen().playing}}},
        });
    }
    Json rooms = Json::object();
    for (const auto& [id, room] : rooms_) {
        Json msgs = Json::array();
        for (const auto& m : room.messages) {
            msgs.push_back(Json{{"seq", m.seq},
                                {"sender", m.sender},
                                {"text", m.text},
                                {"at_ms", m.at_ms},
                                {"modality", to_string(m.modality)},
                                {"cause", m.cause ? Json(*m.cause) : Json(nullptr)}});
        }
        rooms[id] = std::move(msgs);
    }
    auto doc = [](const TextDocument& d) {
        return Json{{"text", d.text}, {"last_edit_ms", d.last_edit_ms ? Json(*d.last_edit_ms) : Json(nullptr)}};
    };
    return Json{
        {"session_id", id_},
        {"mode", to_string(config_.mode)},
        {"clock_ms", clock_ms_},
        {"last_seq", last_seq()},
        {"roster", std::move(roster)},
        {"rooms", std::move(rooms)},
        {"notes_doc", doc(notes_doc_)},
        {"code_doc", doc(code_doc_)},
        {"usage", usage_.to_json()},
        {"predefined_prompts", config_.router.predefined_prompts},
        {"video", Json{{"width", config_.video.width}, {"height", config_.video.height}}},
    };
}

} // namespace costudy
