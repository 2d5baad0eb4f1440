#pragma once

#include "costudy/actions.hpp"
#include "costudy/provider.hpp"
#include "costudy/transcript.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace costudy {

struct Persona {
    std::string name;
    std::string tone;
    std::string interaction_style;
    std::string characteristic;
    std::string voice_id;

    // All four text attributes must be non-empty. Throws ConfigError.
    void validate() const;

    bool operator==(const Persona&) const = default;
};

struct PersonaChanges {
    std::optional<std::string> name;
    std::optional<std::string> tone;
    std::optional<std::string> interaction_style;
    std::optional<std::string> characteristic;
};

// The shipped six-agent roster.
std::vector<Persona> default_roster();

// Fills the co-learner prompt template with the persona and appends the
// timestamped transcript.
std::string assemble_system_prompt(const Persona& persona, const Transcript& transcript);

struct AgentReply {
    ActiveAction action = ActiveAction::chatting;
    std::string text;

    bool operator==(const AgentReply&) const = default;
};

// "<explaining> body" -> (explaining, "body"). Untagged or unknown-tag input
// falls back to chatting with the whole text. Throws EmptyReplyError when no
// body remains.
AgentReply parse_action_tag(std::string_view raw);

struct Exchange {
    std::string speaker;
    std::string text;

    bool operator==(const Exchange&) const = default;
};

// Rolling summary plus the most recent exchanges, bounded by a token budget.
struct MemoryBuffer {
    std::string running_summary;
    std::vector<Exchange> recent_exchanges;
    std::int64_t token_budget = 2000;

    std::int64_t token_estimate() const;
};

// Folds the oldest exchanges into the summary through a summarization call
// until the buffer fits its budget. On provider failure the buffer is left
// untouched and the error propagates.
void condense_memory(MemoryBuffer& memory, Provider& provider, double temperature = 0.9);

// Instructions sent with every summarization call.
extern const std::string_view kSummaryPrompt;

enum class StimulusKind { private_chat, group_chat, brush, audio_text, idle_probe, code_review, forwarded_peer_msg };

std::string_view to_string(StimulusKind kind);

struct Stimulus {
    StimulusKind kind = StimulusKind::private_chat;
    std::string text;
    std::optional<Image> image;
    // Who the stimulus is attributed to in memory.
    std::string from = "learner";
};

struct AgentSettings {
    double temperature = 0.9;
    int max_reply_tokens = 300;
    std::int64_t token_budget = 2000;
};

// One generative co-learner. Not thread-safe: callers serialize access to a
// given instance, while distinct instances may run in parallel.
class CoLearner {
public:
    CoLearner(std::string agent_id, Persona persona, Transcript transcript, AgentSettings settings = {});

    const std::string& id() const noexcept { return id_; }
    const Persona& persona() const noexcept { return persona_; }
    const std::string& system_prompt() const noexcept { return system_prompt_; }
    const MemoryBuffer& memory() const noexcept { return memory_; }
    const std::string& notes() const noexcept { return notes_; }
    const std::string& profile() const noexcept { return profile_; }
    const AgentSettings& settings() const noexcept { return settings_; }

    // Records the stimulus and the reply into memory (two exchanges), then
    // condenses if over budget. A failed condense keeps the reply.
    AgentReply respond(Provider& provider, const Stimulus& stimulus);

    void condense_memory(Provider& provider);

    const std::string& generate_notes(Provider& provider);
    const std::string& generate_profile(Provider& provider);

    // Applies the changes and rebuilds the prompt without any provider call.
    // Returns false for a no-op change set. Throws ValidationError for a name
    // change or an empty value.
    bool apply_persona_changes(const PersonaChanges& changes);

    // apply_persona_changes plus regenerated notes and profile.
    bool update_persona(Provider& provider, const PersonaChanges& changes);

private:
    std::string ask(Provider& provider, Purpose purpose, std::string user_text, int max_reply_tokens);

    std::string id_;
    Persona persona_;
    Transcript transcript_;
    AgentSettings settings_;
    std::string system_prompt_;
    MemoryBuffer memory_;
    std::string notes_;
    std::string profile_;
};

} // namespace costudy
