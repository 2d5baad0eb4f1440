#include "costudy/transcript.hpp"

#include "costudy/errors.hpp"
#include "costudy/text.hpp"

#include <algorithm>
#include <cstdio>
#include <optional>

namespace costudy {

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        pos = nl + 1;
    }
    return lines;
}

bool is_blank(std::string_view line) {
    return line.find_first_not_of(" \t") == std::string_view::npos;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
    if (s.empty()) return std::nullopt;
    std::int64_t v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') return std::nullopt;
        v = v * 10 + (c - '0');
    }
    return v;
}

// MM:SS.mmm or HH:MM:SS.mmm
std::optional<std::int64_t> parse_timestamp(std::string_view s) {
    const auto dot = s.rfind('.');
    if (dot == std::string_view::npos || s.size() - dot - 1 != 3) return std::nullopt;
    const auto millis = parse_int(s.substr(dot + 1));
    std::string_view hms = s.substr(0, dot);

    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (true) {
        const auto colon = hms.find(':', pos);
        parts.push_back(hms.substr(pos, colon == std::string_view::npos ? colon : colon - pos));
        if (colon == std::string_view::npos) break;
        pos = colon + 1;
    }
    if (!millis || parts.size() < 2 || parts.size() > 3) return std::nullopt;

    std::int64_t hours = 0;
    if (parts.size() == 3) {
        const auto h = parse_int(parts[0]);
        if (!h || parts[0].size() < 2) return std::nullopt;
        hours = *h;
    }
    const auto& mm = parts[parts.size() - 2];
    const auto& ss = parts[parts.size() - 1];
    const auto minutes = parse_int(mm);
    const auto seconds = parse_int(ss);
    if (!minutes || !seconds || mm.size() != 2 || ss.size() != 2 || *minutes > 59 || *seconds > 59) {
        return std::nullopt;
    }
    return ((hours * 60 + *minutes) * 60 + *seconds) * 1000 + *millis;
}

} // namespace

Transcript parse_transcript(std::string_view text) {
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
    const auto lines = split_lines(text);

    Transcript out;
    std::size_t i = 0;
    auto skip_block = [&] {
        while (i < lines.size() && !is_blank(lines[i])) ++i;
    };

    while (i < lines.size() && is_blank(lines[i])) ++i;
    if (i < lines.size() && lines[i].substr(0, 6) == "WEBVTT") skip_block();

    while (i < lines.size()) {
        if (is_blank(lines[i])) {
            ++i;
            continue;
        }
        if (lines[i].substr(0, 4) == "NOTE" || lines[i].substr(0, 5) == "STYLE" ||
            lines[i].substr(0, 6) == "REGION") {
            skip_block();
            continue;
        }
        // Optional identifier line before the timing line.
        if (lines[i].find("-->") == std::string_view::npos) {
            if (i + 1 >= lines.size() || lines[i + 1].find("-->") == std::string_view::npos) {
                throw ParseError(i + 1, "expected cue timing line \"start --> end\"");
            }
            ++i;
        }
        const std::size_t timing_line = i + 1;
        const std::string_view timing = lines[i];
        const auto arrow = timing.find("-->");
        const std::string start_text = trim(timing.substr(0, arrow));
        std::string rest = trim(timing.substr(arrow + 3));
        // Cue settings may follow the end timestamp.
        const std::string end_text = rest.substr(0, rest.find_first_of(" \t"));
        const auto start = parse_timestamp(start_text);
        const auto end = parse_timestamp(end_text);
        if (!start) throw ParseError(timing_line, "malformed start timestamp \"" + start_text + "\"");
        if (!end) throw ParseError(timing_line, "malformed end timestamp \"" + end_text + "\"");
        if (*end < *start) throw ParseError(timing_line, "end-before-start");
        ++i;

        std::string joined;
        while (i < lines.size() && !is_blank(lines[i])) {
            if (lines[i].find("-->") != std::string_view::npos) {
                throw ParseError(i + 1, "cue text may not contain \"-->\"");
            }
            const std::string piece = trim(lines[i]);
            if (!joined.empty()) joined += ' ';
            joined += piece;
            ++i;
        }
        if (joined.empty()) throw ParseError(timing_line, "cue has no text");
        out.cues.push_back(Cue{*start, *end, std::move(joined)});
    }

    if (out.cues.empty()) throw ParseError(0, "transcript contains no cues");
    std::stable_sort(out.cues.begin(), out.cues.end(),
                     [](const Cue& a, const Cue& b) { return a.start_ms < b.start_ms; });
    return out;
}

std::string format_timestamp(std::int64_t ms) {
    const std::int64_t millis = ms % 1000;
    const std::int64_t total_s = ms / 1000;
    const std::int64_t s = total_s % 60;
    const std::int64_t m = (total_s / 60) % 60;
    const std::int64_t h = total_s / 3600;
    char buf[32];
    if (h > 0) {
        std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld.%03lld", static_cast<long long>(h),
                      static_cast<long long>(m), static_cast<long long>(s), static_cast<long long>(millis));
    } else {
        std::snprintf(buf, sizeof buf, "%02lld:%02lld.%03lld", static_cast<long long>(m),
                      static_cast<long long>(s), static_cast<long long>(millis));
    }
    return buf;
}

std::string serialize_transcript(const Transcript& transcript) {
    std::string out = "WEBVTT\n";
    for (const auto& cue : transcript.cues) {
        out += '\n';
        out += format_timestamp(cue.start_ms) + " --> " + format_timestamp(cue.end_ms) + '\n';
        out += cue.text + '\n';
    }
    return out;
}

std::string transcript_lines(const Transcript& transcript) {
    std::string out;
    for (const auto& cue : transcript.cues) {
        out += format_timestamp(cue.start_ms) + " --> " + format_timestamp(cue.end_ms) + ' ' + cue.text + '\n';
    }
    return out;
}

} // namespace costudy
