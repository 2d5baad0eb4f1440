#include "costudy/activity.hpp"

#include "costudy/errors.hpp"

#include <algorithm>

namespace costudy {

std::string_view to_string(Channel c) {
    switch (c) {
    case Channel::mouse: return "mouse";
    case Channel::notes: return "notes";
    case Channel::code: return "code";
    }
    return "mouse";
}

std::string_view to_string(Trigger t) {
    switch (t) {
    case Trigger::mouse_idle: return "mouse_idle";
    case Trigger::notes_idle: return "notes_idle";
    case Trigger::code_idle: return "code_idle";
    }
    return "mouse_idle";
}

std::optional<Channel> channel_from_string(std::string_view s) {
    for (auto c : kChannels) {
        if (to_string(c) == s) return c;
    }
    return std::nullopt;
}

std::optional<Trigger> trigger_from_string(std::string_view s) {
    for (auto c : kChannels) {
        if (to_string(trigger_for(c)) == s) return trigger_for(c);
    }
    return std::nullopt;
}

std::int64_t IdleThresholds::for_channel(Channel c) const {
    switch (c) {
    case Channel::mouse: return mouse_idle_ms;
    case Channel::notes: return notes_idle_ms;
    case Channel::code: return code_idle_ms;
    }
    return mouse_idle_ms;
}

void IdleThresholds::validate() const {
    for (auto c : kChannels) {
        if (for_channel(c) <= 0) {
            throw ConfigError("idle." + std::string(to_string(c)) + "_idle_ms: must be positive");
        }
    }
}

void observe(ActivityTrack& track, Channel channel, std::int64_t at_ms) {
    auto& ch = track.channel(channel);
    ch.last_activity_ms = std::max(ch.last_activity_ms, at_ms);
    ch.armed = true;
}

std::vector<Trigger> tick(ActivityTrack& track, const IdleThresholds& thresholds, std::int64_t now_ms) {
    std::vector<Trigger> fired;
    for (auto c : kChannels) {
        auto& ch = track.channel(c);
        if (ch.armed && now_ms - ch.last_activity_ms > thresholds.for_channel(c)) {
            ch.armed = false;
            fired.push_back(trigger_for(c));
        }
    }
    return fired;
}

} // namespace costudy
