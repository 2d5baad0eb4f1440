#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace costudy {

enum class Channel { mouse, notes, code };
enum class Trigger { mouse_idle, notes_idle, code_idle };

inline constexpr std::array kChannels{Channel::mouse, Channel::notes, Channel::code};

std::string_view to_string(Channel c);
std::string_view to_string(Trigger t);
std::optional<Channel> channel_from_string(std::string_view s);
std::optional<Trigger> trigger_from_string(std::string_view s);

constexpr Trigger trigger_for(Channel c) {
    return static_cast<Trigger>(static_cast<int>(c));
}

struct IdleThresholds {
    std::int64_t mouse_idle_ms = 120'000;
    std::int64_t notes_idle_ms = 180'000;
    std::int64_t code_idle_ms = 60'000;

    std::int64_t for_channel(Channel c) const;
    void validate() const;
};

struct ChannelTrack {
    std::int64_t last_activity_ms = 0;
    bool armed = true;
};

// A channel fires once per idle episode and rearms on its next activity.
struct ActivityTrack {
    std::array<ChannelTrack, kChannels.size()> channels{};

    const ChannelTrack& channel(Channel c) const { return channels[static_cast<std::size_t>(c)]; }
    ChannelTrack& channel(Channel c) { return channels[static_cast<std::size_t>(c)]; }
};

void observe(ActivityTrack& track, Channel channel, std::int64_t at_ms);

// Fires each armed channel whose idle time strictly exceeds its threshold,
// in channel order (mouse, notes, code).
std::vector<Trigger> tick(ActivityTrack& track, const IdleThresholds& thresholds, std::int64_t now_ms);

} // namespace costudy
