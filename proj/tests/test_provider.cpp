#include "fake_api.hpp"
#include "support.hpp"

#include "costudy/agent.hpp"
#include "costudy/audio.hpp"
#include "costudy/config.hpp"
#include "costudy/encoding.hpp"
#include "costudy/http_provider.hpp"

#include <doctest.h>
#include <httplib.h>

#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <thread>

using namespace costudy;
using namespace costudy::test;

namespace {

constexpr const char* kKeyEnv = "COSTUDY_TEST_API_KEY";
constexpr const char* kKey = "sk-test-9f8e7d6c5b4a";

ProviderConfig http_config(const std::string& base_url) {
    ::setenv(kKeyEnv, kKey, 1);
    ProviderConfig c;
    c.backend = Backend::http;
    c.base_url = base_url;
    c.api_key_env = kKeyEnv;
    c.timeout_ms = 2'000;
    c.retry = {3, 10};
    return c;
}

ChatRequest simple_request(const std::string& text) {
    ChatRequest r;
    r.system_prompt = assemble_system_prompt(default_roster()[0], parse_transcript(kTranscript));
    r.messages.push_back(ChatTurn{Role::user, text, std::nullopt});
    return r;
}

} // namespace

TEST_SUITE("provider-gateway") {

TEST_CASE("stub completion is deterministic and tagged") {
    StubProvider a(1), b(1), c(2);
    const auto r = simple_request("why O(n^2)?");
    CHECK(a.complete(r) == b.complete(r));
    CHECK(a.complete(r).rfind("<explaining>", 0) == 0);
    CHECK(a.complete(r) != c.complete(r));
    auto with_image = r;
    with_image.messages.back().image = Image{"pixels", "image/png"};
    const auto seen = a.complete(with_image);
    CHECK(seen != a.complete(r));
    CHECK(seen.find(short_digest("pixels")) != std::string::npos);
}

TEST_CASE("stub completion rejects invalid requests") {
    StubProvider p(1);
    ChatRequest empty;
    CHECK_THROWS_AS(p.complete(empty), ValidationError);
    auto hot = simple_request("x");
    hot.temperature = 3.0;
    CHECK_THROWS_AS(p.complete(hot), ValidationError);
}

TEST_CASE("stub transcription") {
    StubProvider p(1);
    CHECK(p.transcribe(make_wav(800, 1000, std::string("hello stack")), "audio/wav") == "hello stack");
    const std::string plain = make_wav(900);
    CHECK(p.transcribe(plain, "audio/wav") == p.transcribe(plain, "audio/wav"));
    CHECK_FALSE(p.transcribe(plain, "audio/wav").empty());
    CHECK_THROWS_AS(p.transcribe("", "audio/wav"), ProviderError);
    CHECK_THROWS_AS(p.transcribe("not audio at all", "audio/wav"), ProviderError);
}

TEST_CASE("stub speech") {
    StubProvider p(1);
    const std::string text = "one two three four five six seven eight nine ten eleven twelve thirteen fourteen fifteen "
                             "sixteen seventeen eighteen nineteen twenty twentyone twentytwo twentythree twentyfour "
                             "twentyfive";
    const auto a = p.synthesize(text, "nova");
    CHECK(a.duration_ms == 10'000);
    CHECK(wav_duration_ms(a.bytes) == 10'000);
    const auto b = p.synthesize(text, "onyx");
    CHECK(a.voice_id != b.voice_id);
    CHECK_THROWS_AS(p.synthesize("  ", "nova"), ProviderError);
    CHECK_THROWS_AS(p.synthesize("hi", "robot"), ProviderError);
}

TEST_CASE("bounded provider caps calls in flight") {
    class Slow : public ScriptedProvider {
    public:
        std::string complete(const ChatRequest& r) override {
            const int now = ++active;
            int seen = peak.load();
            while (now > seen && !peak.compare_exchange_weak(seen, now)) {
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
            --active;
            return ScriptedProvider::complete(r);
        }
        std::atomic<int> active{0}, peak{0};
    };
    auto inner = std::make_shared<Slow>();
    BoundedProvider bounded(inner, 2);
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i) threads.emplace_back([&] { bounded.complete(simple_request("hi")); });
    for (auto& t : threads) t.join();
    CHECK(inner->peak.load() <= 2);
    CHECK(inner->complete_calls == 8);
}

TEST_CASE("provider config validation and key handling") {
    ProviderConfig c;
    c.max_in_flight = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK_THROWS_AS(session_config_from_json(Json::parse(R"({"provider": {"api_key": "sk-abc"}})")), ConfigError);
    ProviderConfig h;
    h.backend = Backend::http;
    h.base_url = "http://127.0.0.1:9";
    h.api_key_env = "COSTUDY_TEST_UNSET_VARIABLE";
    ::unsetenv(h.api_key_env.c_str());
    CHECK_THROWS_AS(HttpProvider{h}, ConfigError);
}

TEST_CASE("http chat request matches the recorded payload") {
    ChatRequest r;
    r.system_prompt = "You are a co-learner.";
    r.messages.push_back(ChatTurn{Role::user, "why O(n^2)?", std::nullopt});
    r.messages.push_back(ChatTurn{Role::assistant, "Because of the nested loops.", std::nullopt});
    r.messages.push_back(ChatTurn{Role::user, "and this plot?", Image{*base64_decode("iVBORw=="), "image/png"}});
    CHECK(nlohmann::json::parse(HttpProvider::chat_payload(r, ModelIds{}).dump()) ==
          nlohmann::json::parse(fixture("chat_request.json").dump()));
    CHECK(nlohmann::json::parse(HttpProvider::speech_payload("Hello there.", "nova", ModelIds{}).dump()) ==
          nlohmann::json::parse(fixture("speech_request.json").dump()));
}

TEST_CASE("http backend against a local fake API") {
    FakeApi api;
    HttpProvider p(http_config(api.base_url()), [](std::chrono::milliseconds) {});

    SUBCASE("completion") {
        const auto text = p.complete(simple_request("why O(n^2)?"));
        CHECK(text.rfind("<explaining>", 0) == 0);
        CHECK(api.last_auth() == std::string("Bearer ") + kKey);
        const auto sent = Json::parse(api.last_body());
        CHECK(sent["model"] == "gpt-4-vision-preview");
        CHECK(sent["messages"][0]["role"] == "system");
        CHECK(sent["messages"][1]["content"] == "why O(n^2)?");
    }
    SUBCASE("transcription uploads the audio as a file") {
        CHECK(p.transcribe(make_wav(500), "audio/wav") == "Why is bubble sort quadratic in the worst case?");
        CHECK(api.has_file());
        CHECK(api.model_field() == "whisper-1");
    }
    SUBCASE("speech") {
        const auto clip = p.synthesize("Hello there.", "nova");
        CHECK(clip.duration_ms == 3'200);
        CHECK(clip.voice_id == "nova");
        CHECK(Json::parse(api.last_body())["voice"] == "nova");
    }
    SUBCASE("transient failures are retried") {
        api.script({503, 429});
        CHECK(p.complete(simple_request("hi")).rfind("<explaining>", 0) == 0);
        CHECK(p.attempts() == 3);
    }
    SUBCASE("retries are bounded") {
        api.script({500, 500, 500, 500});
        CHECK_THROWS_AS(p.complete(simple_request("hi")), ProviderError);
        CHECK(api.hits() == 3);
    }
    SUBCASE("client faults are not retried and never echo the key") {
        api.script({401}, std::string(R"({"error":{"message":"Incorrect API key provided: )") + kKey + "\"}}");
        try {
            p.complete(simple_request("hi"));
            FAIL("expected a ProviderError");
        } catch (const ProviderError& e) {
            CHECK_FALSE(e.retryable());
            CHECK(std::string(e.what()).find(kKey) == std::string::npos);
            CHECK(std::string(e.what()).find("401") != std::string::npos);
        }
        CHECK(api.hits() == 1);
    }
}

TEST_CASE("unreachable endpoint fails permanently after max_attempts with backoff") {
    auto cfg = http_config("http://127.0.0.1:1/v1");
    cfg.timeout_ms = 200;
    std::vector<std::int64_t> sleeps;
    HttpProvider p(cfg, [&](std::chrono::milliseconds d) { sleeps.push_back(d.count()); });
    CHECK_THROWS_AS(p.complete(simple_request("hi")), ProviderError);
    CHECK(p.attempts() == 3);
    CHECK(sleeps == std::vector<std::int64_t>{10, 20});
}

}
