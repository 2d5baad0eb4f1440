#include "costudy/stub_provider.hpp"

#include "costudy/actions.hpp"
#include "costudy/audio.hpp"
#include "costudy/encoding.hpp"
#include "costudy/errors.hpp"
#include "costudy/rng.hpp"
#include "costudy/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>

namespace costudy {

namespace {

constexpr std::array<std::string_view, 8> kRemarks{
    "Let's walk through it step by step with a small list.",
    "The key idea is how the loop invariant holds after each pass.",
    "Try tracing the indices by hand on a three element example.",
    "It helps to compare the best case against the worst case.",
    "I wrote that part down in my notes too, it is worth revisiting.",
    "Counting how many times the inner statement runs answers most of it.",
    "Drawing the structure on paper made it click for me.",
    "A quick print inside the loop shows exactly what changes.",
};

constexpr std::array<std::string_view, 6> kSentences{
    "can you explain the swap step again",
    "why does the inner loop shrink each pass",
    "what happens when the list is already sorted",
    "how do we pick the pivot here",
    "is the stack empty at this point",
    "where does the index go out of range",
};

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// Value of "Your <label> is X." in the system prompt.
std::string prompt_attribute(std::string_view prompt, std::string_view label) {
    const std::string key = "Your " + std::string(label) + " is ";
    const auto at = prompt.find(key);
    if (at == std::string_view::npos) return {};
    const auto start = at + key.size();
    const auto end = prompt.find(". ", start);
    return std::string(prompt.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
}

std::optional<std::string> fenced_code(std::string_view text) {
    const auto open = text.find("```");
    if (open == std::string_view::npos) return std::nullopt;
    auto body_start = text.find('\n', open);
    if (body_start == std::string_view::npos) return std::nullopt;
    ++body_start;
    const auto close = text.find("```", body_start);
    if (close == std::string_view::npos) return std::nullopt;
    auto body = text.substr(body_start, close - body_start);
    while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.remove_suffix(1);
    return std::string(body);
}

ActiveAction pick_action(std::string_view text, std::uint64_t h) {
    const std::string t = lower(text);
    if (t.find("```") != std::string::npos) return ActiveAction::explaining;
    for (std::string_view greet : {"hello", "hi ", "hey", "welcome"}) {
        if (t.rfind(greet, 0) == 0) return ActiveAction::welcoming;
    }
    for (std::string_view w : {"why", "how", "explain", "what"}) {
        if (t.find(w) != std::string::npos) return ActiveAction::explaining;
    }
    if (t.find("stuck") != std::string::npos || t.find("confus") != std::string::npos) {
        return ActiveAction::encouraging;
    }
    return kActiveActions[h % kActiveActions.size()];
}

std::string first_line(std::string_view s, std::size_t max_chars) {
    std::string line = trim(s.substr(0, s.find('\n')));
    if (line.size() > max_chars) {
        line.resize(max_chars);
        // Do not split a UTF-8 sequence.
        while (!line.empty() && (static_cast<unsigned char>(line.back()) & 0xC0) == 0x80) line.pop_back();
        if (!line.empty() && static_cast<unsigned char>(line.back()) >= 0xC0) line.pop_back();
        line += "...";
    }
    return line;
}

std::string tagged(ActiveAction a, std::string_view body) {
    return "<" + std::string(to_string(a)) + "> " + std::string(body);
}

} // namespace

std::string StubProvider::complete(const ChatRequest& request) {
    request.validate();
    const ChatTurn& last = *request.last_user_turn();
    const std::string name = [&] {
        auto n = prompt_attribute(request.system_prompt, "name");
        return n.empty() ? std::string("A co-learner") : n;
    }();
    const std::string image_digest = last.image ? short_digest(last.image->bytes) : std::string();

    std::uint64_t h = fnv1a64(std::to_string(seed_));
    h = fnv1a64(std::to_string(static_cast<int>(request.purpose)), h);
    h = fnv1a64(name, h);
    h = fnv1a64(last.text, h);
    h = fnv1a64(image_digest, h);

    switch (request.purpose) {
    case Purpose::summary:
        return tagged(ActiveAction::chatting, truncate_to_tokens(last.text, request.max_reply_tokens));

    case Purpose::notes: {
        std::string notes;
        std::size_t pos = 0;
        while (pos < last.text.size()) {
            auto nl = last.text.find('\n', pos);
            if (nl == std::string::npos) nl = last.text.size();
            const std::string_view line(last.text.data() + pos, nl - pos);
            pos = nl + 1;
            const auto arrow = line.find(" --> ");
            if (arrow == std::string_view::npos) continue;
            const auto text_at = line.find(' ', arrow + 5);
            if (text_at == std::string_view::npos) continue;
            if (!notes.empty()) notes += '\n';
            notes += "- [" + std::string(line.substr(0, arrow)) + "] " + trim(line.substr(text_at + 1));
        }
        if (notes.empty()) notes = "- (nothing to note yet)";
        return tagged(ActiveAction::explaining, notes);
    }

    case Purpose::profile: {
        const auto tone = prompt_attribute(request.system_prompt, "tone");
        const auto style = prompt_attribute(request.system_prompt, "interaction style");
        const auto trait = prompt_attribute(request.system_prompt, "characteristic");
        std::string body = "Hi, I'm " + name + "! I'm taking this course alongside you.";
        if (!tone.empty()) body += " People say my tone is " + tone + ".";
        if (!style.empty()) body += " My study style: " + style + ".";
        if (!trait.empty()) body += " One thing about me: I'm " + trait + ".";
        return tagged(ActiveAction::welcoming, body);
    }

    case Purpose::reply:
        break;
    }

    std::string body = name + " here.";
    if (const auto code = fenced_code(last.text)) {
        body += " I reviewed your code (digest " + short_digest(*code) + ").";
    } else {
        body += " You asked: \"" + first_line(last.text, 160) + "\"";
    }
    if (!image_digest.empty()) body += " I looked at the highlighted frame (image " + image_digest + ").";
    body += " ";
    body += kRemarks[(h >> 8) % kRemarks.size()];
    return tagged(pick_action(last.text, h), body);
}

std::string StubProvider::transcribe(std::string_view audio, std::string_view /*mime*/) {
    if (audio.empty()) throw ProviderError("transcribe: empty audio", false);
    if (sniff_audio(audio) == AudioFormat::unknown) throw ProviderError("transcribe: undecodable audio", false);
    if (auto text = wav_text(audio)) return *text;
    const std::uint64_t h = fnv1a64(short_digest(audio), fnv1a64(std::to_string(seed_)));
    return std::string(kSentences[h % kSentences.size()]);
}

SpeechClip StubProvider::synthesize(std::string_view text, std::string_view voice_id) {
    if (trim(text).empty()) throw ProviderError("synthesize: empty text", false);
    const auto& known = default_voices();
    if (std::find(known.begin(), known.end(), voice_id) == known.end()) {
        throw ProviderError("synthesize: unknown voice \"" + std::string(voice_id) + "\"", false);
    }
    const auto words = static_cast<double>(count_words(text));
    const auto duration = static_cast<std::int64_t>(std::llround(words / kWordsPerSecond * 1000.0));
    SpeechClip clip;
    clip.bytes = make_wav(duration, 1000, text);
    clip.mime = "audio/wav";
    clip.duration_ms = duration;
    clip.voice_id = std::string(voice_id);
    return clip;
}

} // namespace costudy
