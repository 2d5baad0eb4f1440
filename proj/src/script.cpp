#include "costudy/script.hpp"

#include "costudy/audio.hpp"
#include "costudy/encoding.hpp"

#include <algorithm>

namespace costudy {

namespace {

Json event(std::string_view kind, Json data) {
    return Json{{"kind", kind}, {"data", std::move(data)}};
}

} // namespace

std::vector<ScriptStep> demo_script(std::int64_t tick_ms) {
    const std::string png = std::string("\x89PNG\r\n\x1a\n", 8) + "region-crop-640x320";
    const std::string wav = make_wav(2400, 1000, std::string("Could you repeat the part about the recursion?"));

    std::vector<ScriptStep> steps{
        {2'000, event("user_chat", {{"room", "private:agent-1"}, {"text", "Hi Ava! What does Big-O notation measure?"}})},
        {8'000, event("user_chat", {{"room", "group"}, {"text", "Why is binary search O(log n)?"}})},
        {10'000, event("code_edit", {{"text", "def search(xs, t):\n    lo, hi = 0, len(xs)\n"}})},
        {20'000, event("brush_query", {{"region", {100, 80, 740, 400}},
                                       {"image_b64", base64_encode(png)},
                                       {"question", "What does this curve show?"},
                                       {"video_ms", 95'000}})},
        {30'000, event("activity_ping", {{"channel", "mouse"}})},
        {40'000, event("notes_edit", {{"text", "- binary search halves the range\n"}})},
        {50'000, event("code_edit", {{"text", "def search(xs, t):\n    lo, hi = 0, len(xs)\n    while lo < hi:\n"
                                              "        mid = (lo + hi) // 2\n"}})},
        {62'000, event("video_position", {{"ms", 180'000}})},
        {75'000, event("user_chat", {{"room", "private:agent-2"}, {"text", "I'm stuck on the recursion tree part."}})},
        {90'000, event("user_chat", {{"room", "group"}, {"text", "Can someone give an example of O(n^2)?"}})},
        {140'000, event("user_audio", {{"agent_id", "agent-1"}, {"audio_b64", base64_encode(wav)}, {"mime", "audio/wav"}})},
        {150'000, event("feature_view", {{"feature", "profile"}, {"agent_id", "agent-3"}})},
        {200'000, event("feature_view", {{"feature", "notes"}, {"agent_id", "agent-2"}})},
        {230'000, event("activity_ping", {{"channel", "notes"}})},
    };
    for (std::int64_t t = tick_ms; t <= 300'000; t += tick_ms) steps.push_back({t, Json()});
    std::stable_sort(steps.begin(), steps.end(), [](const ScriptStep& a, const ScriptStep& b) {
        if (a.at_ms != b.at_ms) return a.at_ms < b.at_ms;
        return !a.wire.is_null() && b.wire.is_null();
    });
    return steps;
}

void run_script(Session& session, const std::vector<ScriptStep>& steps) {
    for (const auto& step : steps) {
        if (step.wire.is_null()) advance(session, step.at_ms);
        else ingest(session, step.wire, step.at_ms);
    }
}

} // namespace costudy
