#include "costudy/agent.hpp"

#include "costudy/errors.hpp"
#include "costudy/text.hpp"

#include <cctype>

namespace costudy {

const std::string_view kSummaryPrompt =
    "You keep a running summary of a study-group conversation. Merge the current summary and the "
    "new lines into one short paragraph in the third person. Keep names, questions asked and "
    "conclusions reached; drop greetings and filler.";

namespace {

constexpr std::string_view kPromptPreamble =
    "Act as if you're a student enrolled in an online Python course focused on data structures and "
    "algorithms. You're currently engaged in watching a video tutorial on the subject. Your "
    "responsibilities include responding to queries from your peers, participating in discussion "
    "groups, and interacting with other students via chat. During these discussions, you should "
    "proactively engage with the material presented in the tutorial, contribute to the conversation "
    "by discussing the content, and initiate new topics that are relevant to the tutorial's subject "
    "matter. Your identity in this scenario is defined by the following attributes.";

constexpr std::string_view kPromptActions =
    "When responding to a user's prompt, select the most appropriate action from the following "
    "list: \"asking\", \"chatting\", \"encouraging\", \"exciting\", \"explaining\", \"welcoming\", "
    "put the selected action in a <> and append it at the beginning of your response. Ensure your "
    "responses are clear and to the point. The transcript of the video you are watching is provided "
    "below for reference:";

constexpr std::string_view kNotesRequest =
    "Write concise study notes on the tutorial transcript below, one bullet per key point, each "
    "bullet starting with its timestamp.\n";

constexpr std::string_view kProfileRequest =
    "Write a short first-person self-introduction for your classmates. Mention your name, how you "
    "like to study and what you hope to get out of this tutorial.";

std::string frame(const Stimulus& s) {
    switch (s.kind) {
    case StimulusKind::private_chat:
    case StimulusKind::audio_text:
        return s.text;
    case StimulusKind::group_chat:
        return "In the group chat, the learner says: " + s.text;
    case StimulusKind::brush:
        return "I highlighted a region of the tutorial video (image attached). My question: " + s.text;
    case StimulusKind::idle_probe:
        return "(The learner has been idle for a while.) " + s.text;
    case StimulusKind::code_review:
        return "Please review my code and point out any mistakes:\n```\n" + s.text +
               (s.text.empty() || s.text.back() != '\n' ? "\n```" : "```");
    case StimulusKind::forwarded_peer_msg:
        return s.from + " wrote in the group chat: " + s.text;
    }
    return s.text;
}

std::int64_t exchange_tokens(const std::vector<Exchange>& exchanges) {
    std::int64_t total = 0;
    for (const auto& e : exchanges) total += estimate_tokens(e.text);
    return total;
}

} // namespace

void Persona::validate() const {
    if (trim(name).empty()) throw ConfigError("persona.name: must not be empty");
    if (trim(tone).empty()) throw ConfigError("persona " + name + ": tone must not be empty");
    if (trim(interaction_style).empty()) throw ConfigError("persona " + name + ": interaction_style must not be empty");
    if (trim(characteristic).empty()) throw ConfigError("persona " + name + ": characteristic must not be empty");
}

std::vector<Persona> default_roster() {
    return {
        {"Ava", "warm and upbeat", "asks follow-up questions", "curious about why things work", "nova"},
        {"Ben", "calm and precise", "explains step by step", "detail-oriented", "onyx"},
        {"Chloe", "playful", "shares examples and analogies", "creative", "shimmer"},
        {"Daniel", "casual", "thinks out loud", "a bit unsure but persistent", "echo"},
        {"Emma", "encouraging", "checks in on others", "supportive", "fable"},
        {"Felix", "energetic", "jumps into discussions", "competitive about solving problems fast", "alloy"},
    };
}

std::string assemble_system_prompt(const Persona& persona, const Transcript& transcript) {
    std::string prompt(kPromptPreamble);
    prompt += " Your name is " + persona.name + ".";
    prompt += " Your tone is " + persona.tone + ".";
    prompt += " Your interaction style is " + persona.interaction_style + ".";
    prompt += " Your characteristic is " + persona.characteristic + ". ";
    prompt += kPromptActions;
    prompt += '\n';
    prompt += transcript_lines(transcript);
    return prompt;
}

AgentReply parse_action_tag(std::string_view raw) {
    std::string_view rest = raw;
    while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.front()))) rest.remove_prefix(1);

    AgentReply reply;
    if (!rest.empty() && rest.front() == '<') {
        const auto close = rest.find('>');
        if (close != std::string_view::npos) {
            if (const auto action = active_action_from_string(trim(rest.substr(1, close - 1)))) {
                reply.action = *action;
                rest.remove_prefix(close + 1);
            }
        }
    }
    reply.text = trim(rest);
    if (reply.text.empty()) throw EmptyReplyError();
    return reply;
}

std::int64_t MemoryBuffer::token_estimate() const {
    return estimate_tokens(running_summary) + exchange_tokens(recent_exchanges);
}

void condense_memory(MemoryBuffer& memory, Provider& provider, double temperature) {
    if (memory.token_estimate() <= memory.token_budget) return;

    MemoryBuffer next = memory;
    std::vector<Exchange> folded;
    // Keep at most half the budget as verbatim exchanges; the rest is for the summary.
    const std::int64_t verbatim_budget = memory.token_budget / 2;
    std::size_t drop = 0;
    std::int64_t verbatim = exchange_tokens(next.recent_exchanges);
    while (drop < next.recent_exchanges.size() && verbatim > verbatim_budget) {
        verbatim -= estimate_tokens(next.recent_exchanges[drop].text);
        folded.push_back(next.recent_exchanges[drop]);
        ++drop;
    }
    next.recent_exchanges.erase(next.recent_exchanges.begin(),
                                next.recent_exchanges.begin() + static_cast<std::ptrdiff_t>(drop));
    const std::int64_t summary_budget = memory.token_budget - verbatim;

    if (!folded.empty()) {
        std::string lines = "Current summary:\n" + memory.running_summary + "\n\nNew lines:\n";
        for (const auto& e : folded) lines += e.speaker + ": " + e.text + "\n";
        ChatRequest req;
        req.system_prompt = std::string(kSummaryPrompt);
        req.messages.push_back(ChatTurn{Role::user, std::move(lines), std::nullopt});
        req.temperature = temperature;
        req.max_reply_tokens = static_cast<int>(std::max<std::int64_t>(1, summary_budget));
        req.purpose = Purpose::summary;
        const std::string raw = provider.complete(req);
        try {
            next.running_summary = parse_action_tag(raw).text;
        } catch (const EmptyReplyError&) {
            next.running_summary.clear();
        }
    }
    if (estimate_tokens(next.running_summary) > summary_budget) {
        next.running_summary = truncate_to_tokens(next.running_summary, summary_budget);
    }
    memory = std::move(next);
}

std::string_view to_string(StimulusKind kind) {
    switch (kind) {
    case StimulusKind::private_chat: return "private_chat";
    case StimulusKind::group_chat: return "group_chat";
    case StimulusKind::brush: return "brush";
    case StimulusKind::audio_text: return "audio_text";
    case StimulusKind::idle_probe: return "idle_probe";
    case StimulusKind::code_review: return "code_review";
    case StimulusKind::forwarded_peer_msg: return "forwarded_peer_msg";
    }
    return "private_chat";
}

CoLearner::CoLearner(std::string agent_id, Persona persona, Transcript transcript, AgentSettings settings)
    : id_(std::move(agent_id)), persona_(std::move(persona)), transcript_(std::move(transcript)), settings_(settings) {
    persona_.validate();
    if (transcript_.empty()) throw ConfigError("agent " + id_ + ": transcript must not be empty");
    if (settings_.token_budget < 1) throw ConfigError("memory.token_budget: must be at least 1");
    memory_.token_budget = settings_.token_budget;
    system_prompt_ = assemble_system_prompt(persona_, transcript_);
}

AgentReply CoLearner::respond(Provider& provider, const Stimulus& stimulus) {
    if (trim(stimulus.text).empty()) throw ValidationError("text", "stimulus text must not be empty");
    if (stimulus.kind == StimulusKind::brush && !stimulus.image) {
        throw ValidationError("image", "brush stimulus requires an image");
    }

    ChatRequest req;
    req.system_prompt = system_prompt_;
    req.temperature = settings_.temperature;
    req.max_reply_tokens = settings_.max_reply_tokens;
    if (!memory_.running_summary.empty()) {
        req.messages.push_back(
            ChatTurn{Role::system, "Summary of the conversation so far: " + memory_.running_summary, std::nullopt});
    }
    for (const auto& e : memory_.recent_exchanges) {
        if (e.speaker == persona_.name) {
            req.messages.push_back(ChatTurn{Role::assistant, e.text, std::nullopt});
        } else {
            req.messages.push_back(ChatTurn{Role::user, e.speaker + ": " + e.text, std::nullopt});
        }
    }
    req.messages.push_back(ChatTurn{Role::user, frame(stimulus), stimulus.image});

    AgentReply reply = parse_action_tag(provider.complete(req));

    memory_.recent_exchanges.push_back(Exchange{stimulus.from, stimulus.text});
    memory_.recent_exchanges.push_back(Exchange{persona_.name, reply.text});
    try {
        condense_memory(provider);
    } catch (const ProviderError&) {
        // Retried on the next reply.
    }
    return reply;
}

void CoLearner::condense_memory(Provider& provider) {
    costudy::condense_memory(memory_, provider, settings_.temperature);
}

std::string CoLearner::ask(Provider& provider, Purpose purpose, std::string user_text, int max_reply_tokens) {
    ChatRequest req;
    req.system_prompt = system_prompt_;
    req.messages.push_back(ChatTurn{Role::user, std::move(user_text), std::nullopt});
    req.temperature = settings_.temperature;
    req.max_reply_tokens = max_reply_tokens;
    req.purpose = purpose;
    return parse_action_tag(provider.complete(req)).text;
}

const std::string& CoLearner::generate_notes(Provider& provider) {
    notes_ = ask(provider, Purpose::notes, std::string(kNotesRequest) + transcript_lines(transcript_),
                 std::max(settings_.max_reply_tokens, 600));
    return notes_;
}

const std::string& CoLearner::generate_profile(Provider& provider) {
    profile_ = ask(provider, Purpose::profile, std::string(kProfileRequest), settings_.max_reply_tokens);
    return profile_;
}

bool CoLearner::apply_persona_changes(const PersonaChanges& changes) {
    if (changes.name && *changes.name != persona_.name) {
        throw ValidationError("name", "co-learner names cannot be changed");
    }
    Persona next = persona_;
    auto apply = [](const std::optional<std::string>& value, std::string& field, const char* label) {
        if (!value) return;
        if (trim(*value).empty()) throw ValidationError(label, "must not be empty");
        field = *value;
    };
    apply(changes.tone, next.tone, "tone");
    apply(changes.interaction_style, next.interaction_style, "interaction_style");
    apply(changes.characteristic, next.characteristic, "characteristic");
    if (next == persona_) return false;
    persona_ = std::move(next);
    system_prompt_ = assemble_system_prompt(persona_, transcript_);
    return true;
}

bool CoLearner::update_persona(Provider& provider, const PersonaChanges& changes) {
    if (!apply_persona_changes(changes)) return false;
    generate_profile(provider);
    generate_notes(provider);
    return true;
}

} // namespace costudy
