#pragma once

#include "costudy/config.hpp"
#include "costudy/errors.hpp"
#include "costudy/session.hpp"
#include "costudy/stub_provider.hpp"

#include <atomic>
#include <memory>
#include <string>

namespace costudy::test {

inline constexpr const char* kTranscript =
    "WEBVTT\n\n"
    "00:00.000 --> 00:06.000\nBubble sort swaps adjacent elements that are out of order.\n\n"
    "00:06.000 --> 00:12.000\nEach pass moves the largest remaining element to the end.\n\n"
    "00:12.000 --> 00:20.000\nThe worst case needs about n squared over two comparisons.\n\n"
    "00:20.000 --> 00:27.000\nBinary search halves a sorted range at every step.\n\n"
    "00:27.000 --> 00:35.000\nSo it finishes in O(log n) comparisons.\n";

inline SessionConfig config_for(std::uint64_t seed, Mode mode = Mode::full, std::size_t roster = 6) {
    SessionConfig c;
    c.seed = seed;
    c.mode = mode;
    c.provider.seed = seed;
    c.roster.resize(roster);
    return c;
}

inline Session make_session(std::uint64_t seed, Mode mode = Mode::full, std::size_t roster = 6,
                            std::shared_ptr<Provider> provider = nullptr) {
    auto c = config_for(seed, mode, roster);
    if (!provider) provider = std::make_shared<StubProvider>(seed);
    return Session::create(c, kTranscript, provider);
}

// Counts calls and fails on demand.
class ScriptedProvider : public Provider {
public:
    explicit ScriptedProvider(std::uint64_t seed = 1) : stub_(seed) {}

    std::string complete(const ChatRequest& r) override {
        ++complete_calls;
        if (fail_complete) throw ProviderError("scripted failure", false);
        if (!next_reply.empty()) return next_reply;
        return stub_.complete(r);
    }
    std::string transcribe(std::string_view audio, std::string_view mime) override {
        ++transcribe_calls;
        if (fail_transcribe) throw ProviderError("scripted failure", false);
        return stub_.transcribe(audio, mime);
    }
    SpeechClip synthesize(std::string_view text, std::string_view voice) override {
        ++synthesize_calls;
        if (fail_synthesize) throw ProviderError("scripted failure", false);
        return stub_.synthesize(text, voice);
    }
    std::vector<std::string> voices() const override { return default_voices(); }

    std::atomic<int> complete_calls{0};
    std::atomic<int> transcribe_calls{0};
    std::atomic<int> synthesize_calls{0};
    bool fail_complete = false;
    bool fail_transcribe = false;
    bool fail_synthesize = false;
    std::string next_reply;

private:
    StubProvider stub_;
};

inline std::size_t count_kind(const std::vector<SessionEvent>& events, EventKind kind) {
    std::size_t n = 0;
    for (const auto& e : events) n += e.kind == kind;
    return n;
}

} // namespace costudy::test
