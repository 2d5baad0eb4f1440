#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace costudy {

struct Cue {
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
    std::string text;

    bool operator==(const Cue&) const = default;
};

// Timestamped tutorial transcript; cues sorted by start_ms, overlaps allowed.
struct Transcript {
    std::vector<Cue> cues;

    bool empty() const noexcept { return cues.empty(); }
    bool operator==(const Transcript&) const = default;
};

// Parses WebVTT-compatible cue blocks:
//
//   WEBVTT                      (optional header)
//
//   intro                       (optional cue identifier)
//   00:00.000 --> 00:05.000
//   text line(s)
//
// Timestamps are MM:SS.mmm or HH:MM:SS.mmm. Multi-line cue text is joined
// with single spaces. Throws ParseError carrying the offending line number.
Transcript parse_transcript(std::string_view text);

std::string serialize_transcript(const Transcript& transcript);

// "MM:SS.mmm", or "HH:MM:SS.mmm" from one hour on.
std::string format_timestamp(std::int64_t ms);

// One "start --> end text" line per cue, the form embedded in agent prompts.
std::string transcript_lines(const Transcript& transcript);

} // namespace costudy
