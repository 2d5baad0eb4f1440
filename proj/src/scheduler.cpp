#include "costudy/scheduler.hpp"

#include "costudy/errors.hpp"

#include <algorithm>
#include <cmath>

namespace costudy {

void SchedulerConfig::validate() const {
    if (passive_interval_ms.lo < 0 || passive_interval_ms.lo > passive_interval_ms.hi) {
        throw ConfigError("scheduler.passive_interval_ms: need 0 <= lo <= hi");
    }
    if (!(break_probability >= 0.0 && break_probability <= 1.0)) {
        throw ConfigError("scheduler.break_probability: must be within [0, 1]");
    }
    if (!(active_rate_wps > 0.0)) {
        throw ConfigError("scheduler.active_rate_wps: must be positive");
    }
    if (active_clamp_ms.lo < 0 || active_clamp_ms.lo > active_clamp_ms.hi) {
        throw ConfigError("scheduler.active_clamp_ms: need 0 <= min <= max");
    }
    if (starting_ms <= 0 || ending_ms <= 0) {
        throw ConfigError("scheduler.phase_ms: starting and ending must be positive");
    }
    if (shared_screen_len_ms <= 0) {
        throw ConfigError("scheduler.shared_screen_len_ms: must be positive");
    }
    if (passive_action_ms <= 0) {
        throw ConfigError("scheduler.passive_action_ms: must be positive");
    }
    // A zero-length typing segment would let tick() spin on one boundary.
    if (passive_interval_ms.lo == 0) {
        throw ConfigError("scheduler.passive_interval_ms: lo must be positive");
    }
}

PassiveTransition next_passive_transition(Rng& rng, const SchedulerConfig& config) {
    PassiveTransition t;
    t.delay_ms = rng.uniform_int(config.passive_interval_ms.lo, config.passive_interval_ms.hi);
    if (rng.chance(config.break_probability)) {
        t.action = kBreakActions[rng.index(kBreakActions.size())];
    } else {
        t.action = kStudyActions[rng.index(kStudyActions.size())];
    }
    return t;
}

std::int64_t continuing_duration_ms(const ReplyLength& length, const SchedulerConfig& config) {
    if (length.audio_ms) {
        return *length.audio_ms;
    }
    const double raw = static_cast<double>(length.words) / config.active_rate_wps * 1000.0;
    const auto ms = static_cast<std::int64_t>(std::llround(raw));
    return std::clamp(ms, config.active_clamp_ms.lo, config.active_clamp_ms.hi);
}

void SharedScreenTrack::pause(std::int64_t now_ms) {
    if (!playing) return;
    position_ms = shared_screen_position(*this, now_ms);
    anchor_ms = now_ms;
    playing = false;
}

void SharedScreenTrack::resume(std::int64_t now_ms) {
    if (playing) return;
    anchor_ms = now_ms;
    playing = true;
}

std::int64_t shared_screen_position(const SharedScreenTrack& track, std::int64_t now_ms) {
    if (track.length_ms <= 0) return 0;
    std::int64_t pos = track.position_ms;
    if (track.playing && now_ms > track.anchor_ms) {
        pos += now_ms - track.anchor_ms;
    }
    return pos % track.length_ms;
}

bool ActionState::is_break() const {
    const auto* passive = std::get_if<PassiveAction>(&current);
    return passive && costudy::is_break(*passive);
}

std::string ActionState::label() const {
    if (const auto* passive = std::get_if<PassiveAction>(&current)) {
        return std::string(to_string(*passive));
    }
    const auto& seg = std::get<ActiveSegment>(current);
    return std::string(to_string(seg.action)) + "." + std::string(to_string(seg.phase));
}

ActionScheduler::ActionScheduler(SchedulerConfig config, Rng rng, std::int64_t start_ms)
    : config_(config), rng_(std::move(rng)), last_tick_ms_(start_ms) {
    config_.validate();
    screen_.length_ms = config_.shared_screen_len_ms;
    screen_.anchor_ms = start_ms;
    const auto first = next_passive_transition(rng_, config_);
    pending_passive_ = first.action;
    state_.current = PassiveAction::typing;
    state_.until_ms = start_ms + first.delay_ms;
}

void ActionScheduler::set_screen(bool playing, std::int64_t at_ms, ActionChange& change) {
    if (playing) {
        screen_.resume(at_ms);
    } else {
        screen_.pause(at_ms);
    }
    state_.paused_shared_screen = !playing;
    change.screen_playing = playing;
    change.screen_position_ms = shared_screen_position(screen_, at_ms);
}

void ActionScheduler::revert_to_typing(std::int64_t at_ms, std::vector<ActionChange>& out, bool keep_screen_paused) {
    ActionChange change;
    change.at_ms = at_ms;
    change.action = PassiveAction::typing;
    state_.current = PassiveAction::typing;
    if (keep_screen_paused) {
        // A queued episode starts at this same boundary.
        state_.until_ms = at_ms;
        change.duration_ms = 0;
    } else {
        const auto next = next_passive_transition(rng_, config_);
        pending_passive_ = next.action;
        state_.until_ms = at_ms + next.delay_ms;
        change.duration_ms = next.delay_ms;
        if (!screen_.playing) set_screen(true, at_ms, change);
    }
    out.push_back(change);
}

void ActionScheduler::start_episode(const Episode& episode, std::int64_t at_ms, std::vector<ActionChange>& out) {
    ActionChange change;
    change.at_ms = at_ms;
    change.action = ActiveSegment{episode.action, Phase::starting};
    change.duration_ms = config_.starting_ms;
    state_.current = ActiveSegment{episode.action, Phase::starting};
    state_.until_ms = at_ms + config_.starting_ms;
    current_continuing_ms_ = episode.continuing_ms;
    if (screen_.playing) set_screen(false, at_ms, change);
    out.push_back(change);
}

std::vector<ActionChange> ActionScheduler::tick(std::int64_t now_ms) {
    std::vector<ActionChange> out;
    now_ms = std::max(now_ms, last_tick_ms_);
    while (state_.until_ms <= now_ms) {
        const std::int64_t t = state_.until_ms;
        if (const auto* passive = std::get_if<PassiveAction>(&state_.current)) {
            if (*passive == PassiveAction::typing) {
                ActionChange change;
                change.at_ms = t;
                change.action = pending_passive_;
                change.duration_ms = config_.passive_action_ms;
                state_.current = pending_passive_;
                state_.until_ms = t + config_.passive_action_ms;
                if (costudy::is_break(pending_passive_)) set_screen(false, t, change);
                out.push_back(change);
            } else {
                revert_to_typing(t, out, false);
            }
            continue;
        }

        auto& seg = std::get<ActiveSegment>(state_.current);
        if (seg.phase == Phase::starting) {
            seg.phase = Phase::continuing;
            state_.until_ms = t + current_continuing_ms_;
            out.push_back(ActionChange{t, seg, current_continuing_ms_, std::nullopt, 0});
        } else if (seg.phase == Phase::continuing) {
            seg.phase = Phase::ending;
            state_.until_ms = t + config_.ending_ms;
            out.push_back(ActionChange{t, seg, config_.ending_ms, std::nullopt, 0});
        } else if (queue_.empty()) {
            revert_to_typing(t, out, false);
        } else {
            revert_to_typing(t, out, true);
            const Episode next = queue_.front();
            queue_.pop_front();
            start_episode(next, t, out);
        }
    }
    last_tick_ms_ = now_ms;
    return out;
}

std::vector<ActionChange> ActionScheduler::begin_active(ActiveAction action, ReplyLength length, std::int64_t now_ms) {
    auto out = tick(now_ms);
    const Episode episode{action, continuing_duration_ms(length, config_)};
    if (state_.is_active()) {
        queue_.push_back(episode);
    } else {
        // Whatever passive segment was playing is dropped; a fresh passive
        // transition is drawn once the episode ends.
        start_episode(episode, std::max(now_ms, last_tick_ms_), out);
    }
    return out;
}

} // namespace costudy
