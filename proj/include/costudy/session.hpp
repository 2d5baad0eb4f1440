#pragma once

#include "costudy/activity.hpp"
#include "costudy/agent.hpp"
#include "costudy/config.hpp"
#include "costudy/event.hpp"
#include "costudy/provider.hpp"
#include "costudy/rng.hpp"
#include "costudy/scheduler.hpp"
#include "costudy/transcript.hpp"
#include "costudy/usage.hpp"

#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace costudy {

enum class Modality { text, audio, brush_reply, shared_notes, code_review, progress_inquiry };

std::string_view to_string(Modality m);
std::optional<Modality> modality_from_string(std::string_view s);

inline constexpr std::string_view kGroupRoom = "group";
inline constexpr std::string_view kUserSender = "user";
inline constexpr std::string_view kSystemSender = "system";

std::string private_room_id(std::string_view agent_id);

struct ChatMessage {
    std::uint64_t seq = 0;
    std::string sender;
    std::string text;
    std::int64_t at_ms = 0;
    Modality modality = Modality::text;
    std::optional<std::uint64_t> cause;
};

// Private rooms admit the user and their one agent; the group room admits everyone.
struct ChatRoom {
    std::string id;
    std::vector<ChatMessage> messages;
};

struct TextDocument {
    std::string text;
    std::optional<std::int64_t> last_edit_ms;
};

// Root aggregate of one co-study session. Every mutation goes through
// append_event(), which assigns the next seq and the current clock, applies
// the baseline gate and updates the chat-room and document projections.
//
// Single writer: callers serialize access.
class Session {
public:
    // Parses the transcript, builds one co-learner per persona and, in full
    // mode, generates their notes and profiles. Throws ParseError for a bad
    // transcript and ConfigError for an invalid config.
    static Session create(SessionConfig config, std::string_view transcript_text,
                          std::shared_ptr<Provider> provider, std::string session_id = "session");

    const std::string& id() const noexcept { return id_; }
    Mode mode() const noexcept { return config_.mode; }
    const SessionConfig& config() const noexcept { return config_; }
    const Transcript& transcript() const noexcept { return transcript_; }
    std::uint64_t rng_seed() const noexcept { return config_.seed; }

    std::int64_t clock() const noexcept { return clock_ms_; }
    // Moves the clock forward; earlier values are ignored.
    void set_clock(std::int64_t now_ms);

    // Appends at the current clock. In baseline mode agent-authored payloads
    // are replaced by a "gated" marker naming the blocked kind.
    SessionEvent append_event(EventKind kind, Json data, std::optional<std::uint64_t> cause);

    const UsageCounters& record_usage(Feature feature, std::optional<std::uint64_t> cause);
    // Throws ValidationError for an unknown feature name.
    const UsageCounters& record_usage(std::string_view feature, std::optional<std::uint64_t> cause);

    void export_log(std::ostream& out) const;
    std::string export_log() const;

    const std::vector<SessionEvent>& log() const noexcept { return log_; }
    std::uint64_t last_seq() const noexcept { return log_.empty() ? 0 : log_.back().seq; }
    const UsageCounters& usage() const noexcept { return usage_; }

    std::size_t roster_size() const noexcept { return agents_.size(); }
    std::vector<CoLearner>& agents() noexcept { return agents_; }
    const std::vector<CoLearner>& agents() const noexcept { return agents_; }
    // Throws ValidationError("agent_id") for an unknown id.
    std::size_t agent_index(std::string_view agent_id) const;
    CoLearner& agent(std::string_view agent_id) { return agents_[agent_index(agent_id)]; }

    ActionScheduler& scheduler(std::size_t agent_index) { return schedulers_.at(agent_index); }
    const ActionScheduler& scheduler(std::size_t agent_index) const { return schedulers_.at(agent_index); }

    const std::map<std::string, ChatRoom>& rooms() const noexcept { return rooms_; }
    const ChatRoom& room(std::string_view room_id) const;

    const TextDocument& notes_doc() const noexcept { return notes_doc_; }
    const TextDocument& code_doc() const noexcept { return code_doc_; }

    ActivityTrack& activity() noexcept { return activity_; }
    const ActivityTrack& activity() const noexcept { return activity_; }

    Provider& provider() { return *provider_; }
    const std::shared_ptr<Provider>& provider_handle() const noexcept { return provider_; }
    Rng& router_rng() noexcept { return router_rng_; }

    std::int64_t next_forward_ms() const noexcept { return next_forward_ms_; }
    void schedule_forward(std::int64_t from_ms);

    // Synthesized replies, referenced from agent_audio events by clip id.
    std::string store_clip(SpeechClip clip);
    const SpeechClip* clip(std::string_view clip_id) const;

    // Turns scheduler transitions into action_change (and, when the shared
    // screen toggled, shared_screen_control) events.
    void emit_action_changes(std::size_t agent_index, const std::vector<ActionChange>& changes,
                             std::optional<std::uint64_t> cause);

    Json snapshot() const;

private:
    Session() = default;
    void apply(const SessionEvent& event);

    std::string id_;
    SessionConfig config_;
    Transcript transcript_;
    std::shared_ptr<Provider> provider_;
    std::vector<CoLearner> agents_;
    std::vector<ActionScheduler> schedulers_;
    std::map<std::string, ChatRoom> rooms_;
    TextDocument notes_doc_;
    TextDocument code_doc_;
    std::vector<SessionEvent> log_;
    UsageCounters usage_;
    ActivityTrack activity_;
    Rng router_rng_;
    std::int64_t clock_ms_ = 0;
    std::int64_t next_forward_ms_ = 0;
    std::map<std::string, SpeechClip> clips_;
};

} // namespace costudy
