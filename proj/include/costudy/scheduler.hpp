#pragma once

#include "costudy/actions.hpp"
#include "costudy/rng.hpp"

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace costudy {

struct MsRange {
    std::int64_t lo = 0;
    std::int64_t hi = 0;
};

struct SchedulerConfig {
    MsRange passive_interval_ms{90'000, 180'000};
    double break_probability = 0.3;
    double active_rate_wps = 2.5;
    MsRange active_clamp_ms{3'000, 60'000};
    std::int64_t starting_ms = 1'000;
    std::int64_t ending_ms = 1'000;
    std::int64_t shared_screen_len_ms = 900'000;
    // How long a non-typing passive clip plays before reverting to typing.
    std::int64_t passive_action_ms = 10'000;

    // Throws ConfigError.
    void validate() const;
};

struct PassiveTransition {
    std::int64_t delay_ms = 0;
    PassiveAction action = PassiveAction::watching;

    bool operator==(const PassiveTransition&) const = default;
};

// Delay uniform over the interval; the action is a break with
// break_probability, otherwise one of the non-typing study actions.
PassiveTransition next_passive_transition(Rng& rng, const SchedulerConfig& config);

// Length of the reply an active action accompanies.
struct ReplyLength {
    std::int64_t words = 0;
    std::optional<std::int64_t> audio_ms;

    static ReplyLength of_words(std::int64_t n) { return {n, std::nullopt}; }
    static ReplyLength of_audio(std::int64_t ms) { return {0, ms}; }
};

// Audio replies last exactly as long as the clip; text replies last
// clamp(round(words / rate * 1000), active_clamp_ms).
std::int64_t continuing_duration_ms(const ReplyLength& length, const SchedulerConfig& config);

// Looping shared-screen clip. position_ms is the position at anchor_ms.
struct SharedScreenTrack {
    std::int64_t position_ms = 0;
    bool playing = true;
    std::int64_t length_ms = 900'000;
    std::int64_t anchor_ms = 0;

    void pause(std::int64_t now_ms);
    void resume(std::int64_t now_ms);
};

std::int64_t shared_screen_position(const SharedScreenTrack& track, std::int64_t now_ms);

struct ActiveSegment {
    ActiveAction action = ActiveAction::chatting;
    Phase phase = Phase::starting;

    bool operator==(const ActiveSegment&) const = default;
};

struct ActionState {
    std::variant<PassiveAction, ActiveSegment> current = PassiveAction::typing;
    std::int64_t until_ms = 0;
    bool paused_shared_screen = false;

    bool is_active() const { return std::holds_alternative<ActiveSegment>(current); }
    bool is_break() const;
    std::string label() const;
};

// One visible transition. at_ms is the segment boundary, which may precede the
// tick that discovered it.
struct ActionChange {
    std::int64_t at_ms = 0;
    std::variant<PassiveAction, ActiveSegment> action = PassiveAction::typing;
    std::int64_t duration_ms = 0;
    // Set when the shared screen toggled at this boundary.
    std::optional<bool> screen_playing;
    std::int64_t screen_position_ms = 0;

    bool operator==(const ActionChange&) const = default;
};

// Per-agent behaviour state machine. Time only moves when the host calls
// tick() or begin_active(); there are no internal timers.
class ActionScheduler {
public:
    ActionScheduler(SchedulerConfig config, Rng rng, std::int64_t start_ms = 0);

    // Starts an active episode now, or queues it behind the current one.
    // Catches up on elapsed segments first; their changes come first.
    std::vector<ActionChange> begin_active(ActiveAction action, ReplyLength length, std::int64_t now_ms);

    // Advances every segment that ended at or before now_ms.
    std::vector<ActionChange> tick(std::int64_t now_ms);

    const ActionState& state() const noexcept { return state_; }
    const SharedScreenTrack& screen() const noexcept { return screen_; }
    std::int64_t screen_position(std::int64_t now_ms) const { return shared_screen_position(screen_, now_ms); }
    const SchedulerConfig& config() const noexcept { return config_; }

    // In an episode or has one queued.
    bool busy() const noexcept { return state_.is_active() || !queue_.empty(); }
    std::size_t queued() const noexcept { return queue_.size(); }

    // Next passive clip, due at state().until_ms while typing.
    PassiveAction pending_passive() const noexcept { return pending_passive_; }

private:
    struct Episode {
        ActiveAction action;
        std::int64_t continuing_ms;
    };

    void revert_to_typing(std::int64_t at_ms, std::vector<ActionChange>& out, bool keep_screen_paused);
    void start_episode(const Episode& episode, std::int64_t at_ms, std::vector<ActionChange>& out);
    void set_screen(bool playing, std::int64_t at_ms, ActionChange& change);

    SchedulerConfig config_;
    Rng rng_;
    ActionState state_;
    SharedScreenTrack screen_;
    PassiveAction pending_passive_ = PassiveAction::watching;
    std::int64_t current_continuing_ms_ = 0;
    std::deque<Episode> queue_;
    std::int64_t last_tick_ms_ = 0;
};

} // namespace costudy
