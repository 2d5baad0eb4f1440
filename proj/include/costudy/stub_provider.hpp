#pragma once

#include "costudy/provider.hpp"

#include <cstdint>

namespace costudy {

// Offline backend whose every output is a pure function of (seed, request).
//
//  complete    "<action> <Name> here. ..." where the action tag is picked
//              from the request text; echoes the question, notes any image
//              by digest and any fenced code block by digest. Summary, notes
//              and profile requests get their documented shapes: truncated
//              concatenation, one bullet per transcript line, and a first
//              person introduction.
//  transcribe  text embedded in a WAV "txt " chunk, else a seeded sentence
//              derived from the audio digest.
//  synthesize  WAV whose duration is words / 2.5 seconds.
class StubProvider final : public Provider {
public:
    explicit StubProvider(std::uint64_t seed) : seed_(seed) {}

    std::string complete(const ChatRequest& request) override;
    std::string transcribe(std::string_view audio, std::string_view mime) override;
    SpeechClip synthesize(std::string_view text, std::string_view voice_id) override;
    std::vector<std::string> voices() const override { return default_voices(); }
    bool concurrent() const override { return false; }

    // Stub speaking rate; matches the scheduler's default words per second.
    static constexpr double kWordsPerSecond = 2.5;

private:
    std::uint64_t seed_;
};

} // namespace costudy
