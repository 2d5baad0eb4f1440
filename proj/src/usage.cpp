#include "costudy/usage.hpp"

namespace costudy {

std::string_view to_string(Feature feature) {
    switch (feature) {
    case Feature::notes_views: return "notes_views";
    case Feature::chat_messages: return "chat_messages";
    case Feature::brush_uses: return "brush_uses";
    case Feature::audio_uses: return "audio_uses";
    case Feature::profile_views: return "profile_views";
    case Feature::customization_changes: return "customization_changes";
    }
    return "unknown";
}

std::optional<Feature> feature_from_string(std::string_view name) {
    for (Feature f : kFeatures) {
        if (to_string(f) == name) return f;
    }
    if (name == "notes") return Feature::notes_views;
    if (name == "chat") return Feature::chat_messages;
    if (name == "brush") return Feature::brush_uses;
    if (name == "audio") return Feature::audio_uses;
    if (name == "profile") return Feature::profile_views;
    if (name == "customization") return Feature::customization_changes;
    return std::nullopt;
}

Json UsageCounters::to_json() const {
    Json j = Json::object();
    for (Feature f : kFeatures) j[std::string(to_string(f))] = get(f);
    return j;
}

} // namespace costudy
