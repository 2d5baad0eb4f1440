#include "support.hpp"

#include "costudy/audio.hpp"
#include "costudy/encoding.hpp"
#include "costudy/engine.hpp"
#include "costudy/router.hpp"
#include "costudy/text.hpp"

#include <doctest.h>

#include <map>
#include <set>

using namespace costudy;
using namespace costudy::test;

namespace {

std::vector<SessionEvent> of_kind(const std::vector<SessionEvent>& events, EventKind kind) {
    std::vector<SessionEvent> out;
    for (const auto& e : events) {
        if (e.kind == kind) out.push_back(e);
    }
    return out;
}

BrushQuery brush(int x0, int y0, int x1, int y1, std::string question = "explain the swap") {
    BrushQuery q;
    q.min_x = x0;
    q.min_y = y0;
    q.max_x = x1;
    q.max_y = y1;
    q.image = "\x89PNG crop";
    q.question = std::move(question);
    return q;
}

} // namespace

TEST_SUITE("interaction-router") {

TEST_CASE("private chat: reply in the same private room plus an action for that agent") {
    auto s = make_session(1);
    const auto ev = route_private(s, "agent-2", "why O(n^2)?");
    const auto replies = of_kind(ev, EventKind::agent_chat);
    REQUIRE(replies.size() == 1);
    CHECK(replies[0].data["room"] == "private:agent-2");
    CHECK(replies[0].data["agent_id"] == "agent-2");
    CHECK(replies[0].cause == std::optional<std::uint64_t>(ev[0].seq));
    const auto actions = of_kind(ev, EventKind::action_change);
    REQUIRE_FALSE(actions.empty());
    CHECK(actions[0].data["agent_id"] == "agent-2");
    CHECK(actions[0].data["phase"] == "starting");
    CHECK(s.room("private:agent-2").messages.size() == 2);
    CHECK(s.usage().get(Feature::chat_messages) == 1);
}

TEST_CASE("private chat: baseline logs the message only; empty text is rejected") {
    auto s = make_session(1, Mode::baseline);
    const auto ev = route_private(s, "agent-1", "hello?");
    CHECK(of_kind(ev, EventKind::agent_chat).empty());
    CHECK(of_kind(ev, EventKind::user_chat).size() == 1);
    CHECK_THROWS_AS(route_private(s, "agent-1", "   "), ValidationError);
    CHECK_THROWS_AS(route_private(s, "agent-9", "hi"), ValidationError);
}

TEST_CASE("private chat: provider failure posts a notice and starts no action") {
    auto p = std::make_shared<ScriptedProvider>();
    auto s = make_session(1, Mode::full, 2, p);
    p->fail_complete = true;
    const auto ev = route_private(s, "agent-1", "hi");
    CHECK(of_kind(ev, EventKind::agent_chat).empty());
    CHECK(of_kind(ev, EventKind::action_change).empty());
    const auto notices = of_kind(ev, EventKind::system_notice);
    REQUIRE(notices.size() == 1);
    CHECK(notices[0].data["room"] == "private:agent-1");
}

TEST_CASE("group chat: 1..3 distinct responders, each with an active action") {
    auto s = make_session(3);
    for (int i = 0; i < 50; ++i) {
        s.set_clock(i * 200'000);
        const auto ev = route_group(s, "question " + std::to_string(i));
        const auto replies = of_kind(ev, EventKind::agent_chat);
        CHECK(replies.size() >= 1);
        CHECK(replies.size() <= 3);
        std::set<std::string> who;
        for (const auto& r : replies) {
            who.insert(r.data["agent_id"].get<std::string>());
            CHECK(r.data["room"] == "group");
        }
        CHECK(who.size() == replies.size());
    }
}

TEST_CASE("group chat: roster of two gives k in {1, 2}") {
    std::set<std::size_t> ks;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        auto s = make_session(seed, Mode::full, 2);
        ks.insert(of_kind(route_group(s, "hi all"), EventKind::agent_chat).size());
    }
    CHECK(ks == std::set<std::size_t>{1, 2});
}

TEST_CASE("group chat: one failing agent does not cancel the others") {
    auto p = std::make_shared<ScriptedProvider>();
    auto s = make_session(21, Mode::full, 6, p);
    p->fail_complete = true;
    const auto ev = route_group(s, "anyone?");
    const auto notices = of_kind(ev, EventKind::system_notice);
    CHECK_FALSE(notices.empty());
    CHECK(of_kind(ev, EventKind::agent_chat).empty());
}

TEST_CASE("forward: reply comes from a different agent and reschedules") {
    auto s = make_session(4);
    s.append_event(EventKind::agent_chat, Json{{"room", "group"}, {"agent_id", "agent-3"}, {"text", "Heaps are trees."}},
                   std::nullopt);
    const auto before = s.next_forward_ms();
    s.set_clock(100'000);
    const auto ev = forward_between_agents(s, std::nullopt);
    const auto replies = of_kind(ev, EventKind::agent_chat);
    REQUIRE(replies.size() == 1);
    CHECK(replies[0].data["agent_id"] != "agent-3");
    CHECK(replies[0].data["forwarded_from"] == 1);
    CHECK(s.next_forward_ms() >= 100'000 + 45'000);
    CHECK(s.next_forward_ms() <= 100'000 + 90'000);
    CHECK(s.next_forward_ms() != before);
}

TEST_CASE("forward: empty group room gets an opening remark; single agent is a no-op") {
    auto s = make_session(4);
    const auto ev = forward_between_agents(s, std::nullopt);
    const auto replies = of_kind(ev, EventKind::agent_chat);
    REQUIRE(replies.size() == 1);
    CHECK(replies[0].data["opening"] == true);

    auto solo = make_session(4, Mode::full, 1);
    solo.append_event(EventKind::agent_chat, Json{{"room", "group"}, {"agent_id", "agent-1"}, {"text", "hello"}},
                      std::nullopt);
    CHECK(forward_between_agents(solo, std::nullopt).empty());
}

TEST_CASE("brush: one responder posts a brush reply to the group") {
    auto s = make_session(5);
    const auto ev = route_brush(s, brush(100, 50, 300, 200));
    const auto replies = of_kind(ev, EventKind::agent_chat);
    REQUIRE(replies.size() == 1);
    CHECK(replies[0].data["room"] == "group");
    CHECK(replies[0].data["modality"] == "brush_reply");
    CHECK(replies[0].cause == std::optional<std::uint64_t>(ev[0].seq));
    CHECK(replies[0].data["text"].get<std::string>().find("explain the swap") != std::string::npos);
    CHECK(ev[0].data["image_b64"] == base64_encode("\x89PNG crop"));
    CHECK(s.usage().get(Feature::brush_uses) == 1);
}

TEST_CASE("brush: invalid regions are rejected before anything is logged") {
    auto p = std::make_shared<ScriptedProvider>();
    auto s = make_session(5, Mode::full, 6, p);
    const int calls = p->complete_calls;
    CHECK_THROWS_AS(route_brush(s, brush(100, 50, 100, 200)), ValidationError);
    CHECK_THROWS_AS(route_brush(s, brush(0, 0, 1281, 10)), ValidationError);
    CHECK_THROWS_AS(route_brush(s, brush(-1, 0, 10, 10)), ValidationError);
    CHECK_THROWS_AS(route_brush(s, brush(0, 0, 10, 10, " ")), ValidationError);
    CHECK(s.log().empty());
    CHECK(p->complete_calls == calls);
}

TEST_CASE("brush: predefined prompts are accepted like custom text") {
    auto s = make_session(5);
    for (const auto& prompt : s.config().router.predefined_prompts) {
        const auto ev = route_brush(s, brush(10, 10, 20, 20, prompt));
        CHECK(of_kind(ev, EventKind::agent_chat).size() == 1);
    }
}

TEST_CASE("audio: transcription and reply in the private room plus a speech clip") {
    auto s = make_session(6);
    const std::string wav = make_wav(1500, 1000, std::string("hello stack"));
    const auto ev = route_audio(s, "agent-2", wav, "audio/wav");
    const auto heard = of_kind(ev, EventKind::transcription);
    REQUIRE(heard.size() == 1);
    CHECK(heard[0].data["text"] == "hello stack");
    const auto replies = of_kind(ev, EventKind::agent_chat);
    REQUIRE(replies.size() == 1);
    CHECK(replies[0].data["modality"] == "audio");
    const auto clips = of_kind(ev, EventKind::agent_audio);
    REQUIRE(clips.size() == 1);
    const auto* clip = s.clip(clips[0].data["clip_id"].get<std::string>());
    REQUIRE(clip != nullptr);
    const auto duration = clips[0].data["duration_ms"].get<std::int64_t>();
    CHECK(wav_duration_ms(clip->bytes) == duration);
    CHECK(s.room("private:agent-2").messages.size() == 2);

    // The continuing phase lasts exactly as long as the clip.
    advance(s, s.clock() + 1'000);
    bool saw_continuing = false;
    for (const auto& e : s.log()) {
        if (e.kind == EventKind::action_change && e.data["agent_id"] == "agent-2" && e.data["phase"] == "continuing") {
            CHECK(e.data["duration_ms"] == duration);
            saw_continuing = true;
        }
    }
    CHECK(saw_continuing);
}

TEST_CASE("audio: undecodable bytes give a notice and no provider call") {
    auto p = std::make_shared<ScriptedProvider>();
    auto s = make_session(6, Mode::full, 2, p);
    const int completes = p->complete_calls;
    const auto ev = route_audio(s, "agent-1", "definitely not audio", "audio/wav");
    CHECK(of_kind(ev, EventKind::system_notice).size() == 1);
    CHECK(p->transcribe_calls == 0);
    CHECK(p->complete_calls == completes);
    CHECK(p->synthesize_calls == 0);
}

TEST_CASE("audio: speech failure still delivers the text reply") {
    auto p = std::make_shared<ScriptedProvider>();
    auto s = make_session(6, Mode::full, 2, p);
    p->fail_synthesize = true;
    const auto ev = route_audio(s, "agent-1", make_wav(1000, 1000, std::string("hi")), "audio/wav");
    CHECK(of_kind(ev, EventKind::agent_chat).size() == 1);
    CHECK(of_kind(ev, EventKind::agent_audio).empty());
    CHECK_FALSE(of_kind(ev, EventKind::action_change).empty());
}

TEST_CASE("code idle trigger reviews the code in the editor") {
    auto s = make_session(7);
    s.append_event(EventKind::code_edit, Json{{"text", "xs = [3, 1, 2]\nprint(xs[3])\n"}}, std::nullopt);
    const auto ev = dispatch_trigger(s, Trigger::code_idle, std::nullopt);
    const auto fired = of_kind(ev, EventKind::trigger_fired);
    REQUIRE(fired.size() == 1);
    CHECK(fired[0].data["status"] == "ok");
    const auto replies = of_kind(ev, EventKind::agent_chat);
    REQUIRE(replies.size() == 1);
    CHECK(replies[0].data["modality"] == "code_review");
    CHECK(replies[0].data["text"].get<std::string>().find(short_digest("xs = [3, 1, 2]\nprint(xs[3])")) !=
          std::string::npos);
    CHECK(replies[0].cause == std::optional<std::uint64_t>(fired[0].seq));
}

TEST_CASE("notes idle trigger shares the agent's notes verbatim") {
    auto s = make_session(7);
    const auto ev = dispatch_trigger(s, Trigger::notes_idle, std::nullopt);
    const auto replies = of_kind(ev, EventKind::agent_chat);
    REQUIRE(replies.size() == 1);
    CHECK(replies[0].data["modality"] == "shared_notes");
    const auto& agent = s.agent(replies[0].data["agent_id"].get<std::string>());
    CHECK(replies[0].data["text"] == agent.notes());
    CHECK(of_kind(ev, EventKind::notes_update).size() == 1);
}

TEST_CASE("mouse idle trigger asks about progress in private") {
    auto s = make_session(7);
    const auto ev = dispatch_trigger(s, Trigger::mouse_idle, std::nullopt);
    const auto replies = of_kind(ev, EventKind::agent_chat);
    REQUIRE(replies.size() == 1);
    CHECK(replies[0].data["modality"] == "progress_inquiry");
    CHECK(replies[0].data["room"].get<std::string>().rfind("private:", 0) == 0);
}

TEST_CASE("triggers in baseline produce no message") {
    auto s = make_session(7, Mode::baseline);
    for (const auto t : {Trigger::mouse_idle, Trigger::notes_idle, Trigger::code_idle}) {
        const auto ev = dispatch_trigger(s, t, std::nullopt);
        CHECK(of_kind(ev, EventKind::agent_chat).empty());
        CHECK(of_kind(ev, EventKind::trigger_fired).empty());
    }
}

}
