#pragma once

#include "costudy/json.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace costudy {

enum class Feature {
    notes_views,
    chat_messages,
    brush_uses,
    audio_uses,
    profile_views,
    customization_changes,
};

inline constexpr std::array kFeatures{
    Feature::notes_views, Feature::chat_messages, Feature::brush_uses,
    Feature::audio_uses,  Feature::profile_views, Feature::customization_changes,
};

std::string_view to_string(Feature feature);

// Accepts the counter names plus the short aliases "notes", "chat", "brush",
// "audio", "profile" and "customization".
std::optional<Feature> feature_from_string(std::string_view name);

// Per-feature use counts; only ever incremented.
class UsageCounters {
public:
    std::uint64_t get(Feature f) const { return counts_[static_cast<std::size_t>(f)]; }
    std::uint64_t increment(Feature f) { return ++counts_[static_cast<std::size_t>(f)]; }

    Json to_json() const;

    bool operator==(const UsageCounters&) const = default;

private:
    std::array<std::uint64_t, kFeatures.size()> counts_{};
};

} // namespace costudy
