#include "costudy/router.hpp"

#include "costudy/audio.hpp"
#include "costudy/encoding.hpp"
#include "costudy/errors.hpp"
#include "costudy/text.hpp"

#include <condition_variable>
#include <deque>
#include <future>
#include <mutex>
#include <numeric>

namespace costudy {

namespace {

std::vector<SessionEvent> appended_since(const Session& session, std::uint64_t seq) {
    const auto& log = session.log();
    return {log.begin() + static_cast<std::ptrdiff_t>(seq), log.end()};
}

// Uniform pick, preferring agents that are not mid-episode.
std::size_t pick_available_agent(Session& session) {
    std::vector<std::size_t> idle;
    for (std::size_t i = 0; i < session.roster_size(); ++i) {
        if (!session.scheduler(i).busy()) idle.push_back(i);
    }
    if (idle.empty()) return session.router_rng().index(session.roster_size());
    return idle[session.router_rng().index(idle.size())];
}

void post_notice(Session& session, const std::string& room, const std::string& text, std::string_view reason,
                 std::optional<std::uint64_t> cause, std::optional<std::string> agent_id = std::nullopt) {
    Json data = Json::object();
    if (!room.empty()) data["room"] = room;
    data["text"] = text;
    data["reason"] = reason;
    if (agent_id) data["agent_id"] = *agent_id;
    session.append_event(EventKind::system_notice, std::move(data), cause);
}

std::string sorry(const CoLearner& agent) {
    return "Sorry, " + agent.persona().name + " couldn't reply just now. Please try again.";
}

// Appends the agent's message and, when animate is set, starts its active action.
SessionEvent post_reply(Session& session, std::size_t idx, const AgentReply& reply, const std::string& room,
                        Modality modality, std::optional<std::uint64_t> cause, bool animate, Json extra = Json::object()) {
    const auto& agent = session.agents()[idx];
    Json data = Json::object();
    data["room"] = room;
    data["agent_id"] = agent.id();
    data["text"] = reply.text;
    data["action"] = to_string(reply.action);
    data["modality"] = to_string(modality);
    for (auto it = extra.begin(); it != extra.end(); ++it) data[it.key()] = it.value();
    const auto ev = session.append_event(EventKind::agent_chat, std::move(data), cause);
    if (animate) {
        const auto changes = session.scheduler(idx).begin_active(
            reply.action, ReplyLength::of_words(static_cast<std::int64_t>(count_words(reply.text))), session.clock());
        session.emit_action_changes(idx, changes, ev.seq);
    }
    return ev;
}

struct Outcome {
    std::size_t idx = 0;
    std::optional<AgentReply> reply;
};

// Runs respond() for each agent and hands results back in completion order.
// Providers that are not concurrent are called one after another, in order.
template <class OnDone>
void respond_all(Session& session, const std::vector<std::size_t>& agents, const std::vector<Stimulus>& stimuli,
                 OnDone&& on_done) {
    Provider& provider = session.provider();
    auto run = [&](std::size_t k) {
        Outcome out{agents[k], std::nullopt};
        try {
            out.reply = session.agents()[agents[k]].respond(provider, stimuli[k]);
        } catch (const ProviderError&) {
        } catch (const EmptyReplyError&) {
        }
        return out;
    };

    if (!provider.concurrent() || agents.size() < 2) {
        for (std::size_t k = 0; k < agents.size(); ++k) on_done(run(k));
        return;
    }

    std::mutex mu;
    std::condition_variable cv;
    std::deque<Outcome> done;
    std::vector<std::future<void>> tasks;
    tasks.reserve(agents.size());
    for (std::size_t k = 0; k < agents.size(); ++k) {
        tasks.push_back(std::async(std::launch::async, [&, k] {
            Outcome out = run(k);
            std::lock_guard lock(mu);
            done.push_back(std::move(out));
            cv.notify_one();
        }));
    }
    for (std::size_t received = 0; received < agents.size(); ++received) {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return !done.empty(); });
        Outcome out = std::move(done.front());
        done.pop_front();
        lock.unlock();
        on_done(std::move(out));
    }
    for (auto& t : tasks) t.get();
}

std::optional<AgentReply> respond_one(Session& session, std::size_t idx, const Stimulus& stimulus) {
    std::optional<AgentReply> result;
    respond_all(session, {idx}, {stimulus}, [&](Outcome out) { result = std::move(out.reply); });
    return result;
}

std::string require_text(std::string_view text, const char* field) {
    std::string t = trim(text);
    if (t.empty()) throw ValidationError(field, "must not be empty");
    return std::string(text);
}

} // namespace

void BrushQuery::validate(const VideoFrame& frame) const {
    if (min_x < 0 || min_y < 0) throw ValidationError("region", "coordinates must be non-negative");
    if (min_x >= max_x || min_y >= max_y) throw ValidationError("region", "need min_x < max_x and min_y < max_y");
    if (max_x > frame.width || max_y > frame.height) {
        throw ValidationError("region", "exceeds the " + std::to_string(frame.width) + "x" +
                                            std::to_string(frame.height) + " video frame");
    }
    if (image.empty()) throw ValidationError("image_b64", "must not be empty");
    if (trim(question).empty()) throw ValidationError("question", "must not be empty");
    if (video_position_ms < 0) throw ValidationError("video_ms", "must be non-negative");
}

std::vector<SessionEvent> route_private(Session& session, std::string_view agent_id, std::string_view text) {
    const std::string body = require_text(text, "text");
    const std::size_t idx = session.agent_index(agent_id);
    const std::string room = private_room_id(agent_id);
    const auto from = session.last_seq();

    observe(session.activity(), Channel::mouse, session.clock());
    const auto perceive = session.append_event(EventKind::user_chat, Json{{"room", room}, {"text", body}}, std::nullopt);
    session.record_usage(Feature::chat_messages, perceive.seq);
    if (session.mode() == Mode::baseline) return appended_since(session, from);

    const auto reply = respond_one(session, idx, Stimulus{StimulusKind::private_chat, body, std::nullopt, "learner"});
    if (reply) {
        post_reply(session, idx, *reply, room, Modality::text, perceive.seq, true);
    } else {
        post_notice(session, room, sorry(session.agents()[idx]), "provider_failure", perceive.seq,
                    session.agents()[idx].id());
    }
    return appended_since(session, from);
}

std::vector<SessionEvent> route_group(Session& session, std::string_view text) {
    const std::string body = require_text(text, "text");
    const std::string room(kGroupRoom);
    const auto from = session.last_seq();

    observe(session.activity(), Channel::mouse, session.clock());
    const auto perceive = session.append_event(EventKind::user_chat, Json{{"room", room}, {"text", body}}, std::nullopt);
    session.record_usage(Feature::chat_messages, perceive.seq);
    if (session.mode() == Mode::baseline) return appended_since(session, from);

    const auto& rc = session.config().router;
    const int n = static_cast<int>(session.roster_size());
    const int hi = std::min(rc.max_responders, n);
    const int lo = std::min(rc.min_responders, hi);
    const auto k = static_cast<std::size_t>(session.router_rng().uniform_int(lo, hi));

    // Partial Fisher-Yates: the first k slots are a uniform k-subset in draw order.
    std::vector<std::size_t> order(session.roster_size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + session.router_rng().index(order.size() - i);
        std::swap(order[i], order[j]);
    }
    order.resize(k);

    const std::vector<Stimulus> stimuli(k, Stimulus{StimulusKind::group_chat, body, std::nullopt, "learner"});
    respond_all(session, order, stimuli, [&](Outcome out) {
        if (out.reply) {
            post_reply(session, out.idx, *out.reply, room, Modality::text, perceive.seq, true);
        } else {
            post_notice(session, room, sorry(session.agents()[out.idx]), "provider_failure", perceive.seq,
                        session.agents()[out.idx].id());
        }
    });
    return appended_since(session, from);
}

std::vector<SessionEvent> forward_between_agents(Session& session, std::optional<std::uint64_t> cause) {
    const auto from = session.last_seq();
    if (session.mode() == Mode::baseline || session.roster_size() < 2) return {};
    session.schedule_forward(session.clock());

    const std::string room(kGroupRoom);
    const ChatMessage* source = nullptr;
    const auto& messages = session.room(room).messages;
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->sender != kUserSender && it->sender != kSystemSender) {
            source = &*it;
            break;
        }
    }

    if (!source) {
        const std::size_t idx = session.router_rng().index(session.roster_size());
        const Stimulus opener{StimulusKind::forwarded_peer_msg,
                              "Nobody has posted yet. Open the discussion with a remark or question about the tutorial.",
                              std::nullopt, "The study group"};
        if (const auto reply = respond_one(session, idx, opener)) {
            post_reply(session, idx, *reply, room, Modality::text, cause, false, Json{{"opening", true}});
        }
        return appended_since(session, from);
    }

    const std::size_t author = session.agent_index(source->sender);
    const std::uint64_t source_seq = source->seq;
    const Stimulus relay{StimulusKind::forwarded_peer_msg, source->text, std::nullopt,
                         session.agents()[author].persona().name};
    std::size_t target = session.router_rng().index(session.roster_size() - 1);
    if (target >= author) ++target;

    if (const auto reply = respond_one(session, target, relay)) {
        post_reply(session, target, *reply, room, Modality::text, cause, false, Json{{"forwarded_from", source_seq}});
    }
    return appended_since(session, from);
}

std::vector<SessionEvent> route_brush(Session& session, const BrushQuery& query) {
    query.validate(session.config().video);
    const std::string room(kGroupRoom);
    const auto from = session.last_seq();

    observe(session.activity(), Channel::mouse, session.clock());
    const auto perceive = session.append_event(
        EventKind::brush_query,
        Json{{"region", Json::array({query.min_x, query.min_y, query.max_x, query.max_y})},
             {"image_b64", base64_encode(query.image)},
             {"mime", query.image_mime},
             {"question", query.question},
             {"video_ms", query.video_position_ms}},
        std::nullopt);
    session.record_usage(Feature::brush_uses, perceive.seq);
    if (session.mode() == Mode::baseline) return appended_since(session, from);

    const std::size_t idx = pick_available_agent(session);
    const Stimulus stimulus{StimulusKind::brush, query.question, Image{query.image, query.image_mime}, "learner"};
    if (const auto reply = respond_one(session, idx, stimulus)) {
        post_reply(session, idx, *reply, room, Modality::brush_reply, perceive.seq, true,
                   Json{{"image_digest", short_digest(query.image)}});
    } else {
        post_notice(session, room, sorry(session.agents()[idx]), "provider_failure", perceive.seq,
                    session.agents()[idx].id());
    }
    return appended_since(session, from);
}

std::vector<SessionEvent> route_audio(Session& session, std::string_view agent_id, std::string_view audio,
                                      std::string_view mime) {
    const std::size_t idx = session.agent_index(agent_id);
    if (audio.empty()) throw ValidationError("audio_b64", "must not be empty");
    const std::string room = private_room_id(agent_id);
    const auto from = session.last_seq();

    observe(session.activity(), Channel::mouse, session.clock());
    const auto perceive = session.append_event(
        EventKind::user_audio,
        Json{{"agent_id", std::string(agent_id)}, {"audio_b64", base64_encode(audio)}, {"mime", std::string(mime)}},
        std::nullopt);
    session.record_usage(Feature::audio_uses, perceive.seq);
    if (session.mode() == Mode::baseline) return appended_since(session, from);

    const std::string id(agent_id);
    if (sniff_audio(audio) == AudioFormat::unknown) {
        post_notice(session, room, "Sorry, that recording could not be decoded. Please try again.",
                    "undecodable_audio", perceive.seq, id);
        return appended_since(session, from);
    }

    std::string question;
    try {
        question = session.provider().transcribe(audio, mime);
    } catch (const ProviderError&) {
        post_notice(session, room, "Sorry, the recording could not be transcribed. Please try again.",
                    "stt_failure", perceive.seq, id);
        return appended_since(session, from);
    }
    if (trim(question).empty()) {
        post_notice(session, room, "Sorry, no speech was detected in that recording.", "stt_empty", perceive.seq, id);
        return appended_since(session, from);
    }
    const auto heard = session.append_event(EventKind::transcription,
                                            Json{{"room", room}, {"agent_id", id}, {"text", question}}, perceive.seq);

    const auto reply = respond_one(session, idx, Stimulus{StimulusKind::audio_text, question, std::nullopt, "learner"});
    if (!reply) {
        post_notice(session, room, sorry(session.agents()[idx]), "provider_failure", heard.seq, id);
        return appended_since(session, from);
    }
    const auto chat = post_reply(session, idx, *reply, room, Modality::audio, heard.seq, false);

    ReplyLength length = ReplyLength::of_words(static_cast<std::int64_t>(count_words(reply->text)));
    std::uint64_t action_cause = chat.seq;
    try {
        const auto& voice = session.agents()[idx].persona().voice_id;
        SpeechClip clip = session.provider().synthesize(reply->text, voice);
        length = ReplyLength::of_audio(clip.duration_ms);
        Json data{{"agent_id", id},
                  {"room", room},
                  {"clip_id", ""},
                  {"mime", clip.mime},
                  {"duration_ms", clip.duration_ms},
                  {"voice_id", clip.voice_id},
                  {"text", reply->text}};
        data["clip_id"] = session.store_clip(std::move(clip));
        action_cause = session.append_event(EventKind::agent_audio, std::move(data), chat.seq).seq;
    } catch (const ProviderError&) {
        post_notice(session, "", "Speech synthesis failed; the reply was delivered as text.", "tts_failure", chat.seq,
                    id);
    }
    const auto changes = session.scheduler(idx).begin_active(reply->action, length, session.clock());
    session.emit_action_changes(idx, changes, action_cause);
    return appended_since(session, from);
}

std::vector<SessionEvent> dispatch_trigger(Session& session, Trigger trigger, std::optional<std::uint64_t> cause) {
    const auto from = session.last_seq();
    if (session.mode() == Mode::baseline) {
        session.append_event(EventKind::trigger_fired, Json{{"trigger", to_string(trigger)}}, cause);
        return appended_since(session, from);
    }

    const std::size_t idx = pick_available_agent(session);
    CoLearner& agent = session.agents()[idx];
    const std::string room = private_room_id(agent.id());

    std::optional<AgentReply> reply;
    Modality modality = Modality::text;
    bool notes_regenerated = false;
    std::string error;
    switch (trigger) {
    case Trigger::mouse_idle:
        modality = Modality::progress_inquiry;
        reply = respond_one(session, idx,
                            Stimulus{StimulusKind::idle_probe,
                                     "Reach out to the learner and ask how their progress on the tutorial is going.",
                                     std::nullopt, "system"});
        break;
    case Trigger::notes_idle:
        modality = Modality::shared_notes;
        try {
            agent.generate_notes(session.provider());
            notes_regenerated = true;
        } catch (const Error& e) {
            error = e.what();
        }
        if (!agent.notes().empty()) reply = AgentReply{ActiveAction::chatting, agent.notes()};
        break;
    case Trigger::code_idle: {
        modality = Modality::code_review;
        const std::string& code = session.code_doc().text;
        reply = respond_one(session, idx,
                            Stimulus{StimulusKind::code_review, trim(code).empty() ? "# (the editor is empty)" : code,
                                     std::nullopt, "learner"});
        break;
    }
    }

    Json fired{{"trigger", to_string(trigger)}, {"agent_id", agent.id()}, {"status", reply ? "ok" : "failed"}};
    const auto trig = session.append_event(EventKind::trigger_fired, std::move(fired), cause);
    if (notes_regenerated) {
        session.append_event(EventKind::notes_update, Json{{"agent_id", agent.id()}, {"notes", agent.notes()}},
                             trig.seq);
    }
    if (reply) post_reply(session, idx, *reply, room, modality, trig.seq, true);
    (void)error;
    return appended_since(session, from);
}

} // namespace costudy
