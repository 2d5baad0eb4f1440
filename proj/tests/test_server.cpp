#include "golden_util.hpp"
#include "server_harness.hpp"

#include "costudy/audio.hpp"
#include "costudy/encoding.hpp"
#include "costudy/server.hpp"

#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <thread>

using namespace costudy;
using namespace costudy::test;
namespace fs = std::filesystem;

TEST_SUITE("api-server") {

TEST_CASE("endpoint schemas and stream resume match the golden files") {
    const auto capture = capture_protocol("schemas");
    CHECK(capture.statuses == expected_protocol_statuses());
    for (const auto& [name, bytes] : capture.artifacts) {
        INFO(name);
        CHECK(matches_golden(name, bytes));
    }
}

TEST_CASE("malformed bodies and the manifest") {
    Harness h("malformed");
    const auto id = h.create();
    auto res = h.client->Post("/sessions/" + id + "/events", "{not json", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
    CHECK(Json::parse(res->body)["field"] == "body");
    res = h.post_event(id, Json{{"kind", "brush_query"}, {"data", {{"region", {5, 5, 1, 1}}, {"image_b64", "aGk="}, {"question", "q"}}}});
    REQUIRE(res);
    CHECK(res->status == 400);
    CHECK(Json::parse(res->body)["field"] == "region");
    res = h.client->Get("/sessions/" + id + "/log");
    REQUIRE(res);
    CHECK(res->get_header_value("Content-Type") == "application/x-ndjson");
    CHECK(res->body.empty());
    res = h.client->Get("/manifest");
    REQUIRE(res);
    CHECK(Json::parse(res->body) == to_json(full_manifest(6)));
}

TEST_CASE("brush reply on the stream is caused by the brush event") {
    Harness h("brush");
    const auto id = h.create();
    h.now = 1'000;
    const Json brush{{"kind", "brush_query"},
                     {"data", {{"region", {10, 10, 90, 60}}, {"image_b64", base64_encode("img")}, {"question", "what is this?"}}}};
    auto res = h.post_event(id, brush);
    REQUIRE(res);
    const auto seq = Json::parse(res->body)["seq"].get<std::uint64_t>();
    const std::string body = h.read_stream("/sessions/" + id + "/stream?from_seq=0", [](const std::string& b) {
        return b.find("\"modality\":\"brush_reply\"") != std::string::npos && b.rfind("\n\n") == b.size() - 2;
    });
    const auto at = body.find("\"modality\":\"brush_reply\"");
    REQUIRE(at != std::string::npos);
    const auto line_start = body.rfind("data: ", at);
    const auto line_end = body.find('\n', at);
    const auto ev = Json::parse(body.substr(line_start + 6, line_end - line_start - 6));
    CHECK(ev["kind"] == "agent_chat");
    CHECK(ev["cause"] == seq);
    CHECK(ev["protocol_version"] == kProtocolVersion);
}

TEST_CASE("stream resumes after the given seq, then follows the live tail") {
    Harness h("resume");
    const auto id = h.create();
    std::uint64_t last = 0;
    for (int i = 0; last < 10; ++i) {
        h.now = 1'000 * (i + 1);
        REQUIRE(h.post_event(id, Json{{"kind", "activity_ping"}, {"data", {{"channel", "mouse"}}}}));
        last = Json::parse(h.client->Get("/sessions/" + id)->body)["last_seq"].get<std::uint64_t>();
    }
    REQUIRE(last == 10);

    const std::string replayed = h.read_stream("/sessions/" + id + "/stream?from_seq=5",
                                               [](const std::string& b) { return frames(b) >= 5; });
    CHECK(replayed.rfind("id: 6\n", 0) == 0);
    CHECK(replayed.find("id: 10\n") != std::string::npos);

    // Last-Event-ID works the same way and the stream continues with new events.
    std::string live;
    std::thread reader([&] {
        live = h.read_stream("/sessions/" + id + "/stream", [](const std::string& b) { return frames(b) >= 2; },
                             {{"Last-Event-ID", "9"}});
    });
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    h.now = 20'000;
    REQUIRE(h.post_event(id, Json{{"kind", "activity_ping"}, {"data", {{"channel", "code"}}}}));
    reader.join();
    CHECK(live.rfind("id: 10\n", 0) == 0);
    CHECK(live.find("id: 11\n") != std::string::npos);

    auto bad = h.client->Get("/sessions/" + id + "/stream?from_seq=x");
    REQUIRE(bad);
    CHECK(bad->status == 400);
}

TEST_CASE("idle streams carry heartbeat frames") {
    Harness h("heartbeat", 50);
    const auto id = h.create();
    const std::string body = h.read_stream("/sessions/" + id + "/stream",
                                           [](const std::string& b) { return b.find("\n\n") != std::string::npos; });
    CHECK(body == "event: hb\ndata: {\"type\":\"hb\",\"last_seq\":0}\n\n");
}

TEST_CASE("closed sessions reject events but keep their log") {
    Harness h("closed");
    const auto id = h.create();
    h.now = 1'000;
    REQUIRE(h.post_event(id, chat("group", "hello all"))->status == 200);
    const std::string log = h.client->Get("/sessions/" + id + "/log")->body;
    auto res = h.client->Delete("/sessions/" + id);
    REQUIRE(res);
    CHECK(res->status == 200);
    res = h.post_event(id, chat("group", "still there?"));
    REQUIRE(res);
    CHECK(res->status == 404);
    CHECK(h.client->Get("/sessions/" + id + "/log")->body == log);
    CHECK(read_file(h.log_dir / (id + ".jsonl")) == log);
    // A stream on a closed session drains and ends.
    const std::string drained = h.read_stream("/sessions/" + id + "/stream", [](const std::string&) { return false; });
    CHECK(frames(drained) == read_log(log).size());
    CHECK(h.post_event("missing", chat("group", "x"))->status == 404);
}

TEST_CASE("synthesized speech is served by clip id") {
    Harness h("audio");
    const auto id = h.create();
    const Json audio{{"kind", "user_audio"},
                     {"data", {{"agent_id", "agent-1"}, {"audio_b64", base64_encode(make_wav(1000, 1000, std::string_view("hi there")))}, {"mime", "audio/wav"}}}};
    REQUIRE(h.post_event(id, audio)->status == 200);
    const auto events = read_log(h.client->Get("/sessions/" + id + "/log")->body);
    std::string clip_id;
    for (const auto& e : events) {
        if (e.kind == EventKind::agent_audio) clip_id = e.data["clip_id"].get<std::string>();
    }
    REQUIRE_FALSE(clip_id.empty());
    auto res = h.client->Get("/sessions/" + id + "/audio/" + clip_id);
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->get_header_value("Content-Type") == "audio/wav");
    CHECK(wav_duration_ms(res->body).has_value());
    CHECK(h.client->Get("/sessions/" + id + "/audio/clip-999")->status == 404);
}

TEST_CASE("create rejects bad overrides") {
    Harness h("create");
    auto res = h.client->Post("/sessions", R"({"mode":"sideways"})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
    CHECK(Json::parse(res->body)["field"] == "mode");
    res = h.client->Post("/sessions", R"({"config":{"roster":[]}})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
    res = h.client->Post("/sessions", "", "application/json");
    REQUIRE(res);
    CHECK(res->status == 201);
}

TEST_CASE("persist is atomic and idempotent") {
    const auto dir = fresh_dir("persist");
    const auto first = persist_log(dir, "s", "one\n");
    const auto bytes = read_file(first);
    persist_log(dir, "s", "one\n");
    CHECK(read_file(first) == bytes);
    CHECK_THROWS(persist_log(dir, "s", "two\n", [](const fs::path&) { throw Error("simulated crash"); }));
    CHECK(read_file(first) == "one\n");
    fs::remove_all(dir);
}

TEST_CASE("a 10k-event session persists and reloads to the same log") {
    const auto dir = fresh_dir("bulk");
    auto s = make_session(9, Mode::full, 2);
    for (int i = 0; i < 10'000; ++i) {
        s.set_clock(i);
        s.append_event(EventKind::activity_ping, Json{{"channel", i % 2 ? "mouse" : "code"}}, std::nullopt);
    }
    const auto path = persist_log(dir, "bulk", s.export_log());
    CHECK(read_log(read_file(path)) == s.log());
    fs::remove_all(dir);
}

TEST_CASE("a restarted server serves the identical log") {
    const auto dir = fresh_dir("restart");
    std::string id, log;
    {
        std::atomic<std::int64_t> now{0};
        SessionHub hub(config_for(3), kTranscript, dir, [&] { return now.load(); });
        id = hub.create(Json{{"seed", 8}})["session_id"].get<std::string>();
        now = 1'000;
        hub.ingest(id, chat("private:agent-2", "hello?"));
        log = hub.export_log(id);
        hub.persist(id);
    }
    SessionHub again(config_for(3), kTranscript, dir, [] { return 0; });
    CHECK(again.export_log(id) == log);
    CHECK_THROWS_AS(again.ingest(id, chat("group", "x")), NotFound);
    const auto next = again.create(Json{{"seed", 8}})["session_id"].get<std::string>();
    CHECK(next != id);
    fs::remove_all(dir);
}

TEST_CASE("server config loading") {
    const auto dir = fresh_dir("cfg");
    std::ofstream(dir / "session.json") << "{}";
    std::ofstream(dir / "assets.json") << R"({"agents":{}})";
    std::ofstream(dir / "server.json") << R"({"port": 9001, "session_config": "session.json", "manifest": "assets.json"})";
    const auto sc = load_server_config(dir / "server.json");
    CHECK(sc.port == 9001);
    CHECK(sc.session_config_path == dir / "session.json");
    CHECK(sc.log_dir == dir / "logs");
    sc.validate();
    auto bad = sc;
    bad.port = 70'000;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = sc;
    bad.manifest_path = dir / "missing.json";
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK_THROWS_AS(validate_manifest(load_manifest(dir / "assets.json"), {"agent-1"}), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("manifest completeness") {
    auto m = full_manifest(6);
    std::vector<std::string> ids;
    for (int i = 1; i <= 6; ++i) ids.push_back("agent-" + std::to_string(i));
    CHECK(missing_assets(m, ids).empty());
    CHECK(required_action_keys().size() == 28);
    m.agents["agent-2"].actions.erase("explaining.ending");
    m.agents["agent-4"].shared_screen.clear();
    CHECK(missing_assets(m, ids) == std::vector<std::string>{"agent-2: explaining.ending", "agent-4: shared_screen"});
    CHECK(manifest_from_json(to_json(m)).agents.size() == 6);
}

}
