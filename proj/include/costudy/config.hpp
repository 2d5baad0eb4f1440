#pragma once

#include "costudy/activity.hpp"
#include "costudy/agent.hpp"
#include "costudy/json.hpp"
#include "costudy/provider.hpp"
#include "costudy/scheduler.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace costudy {

enum class Mode { full, baseline };

std::string_view to_string(Mode mode);
std::optional<Mode> mode_from_string(std::string_view s);

struct RouterConfig {
    int min_responders = 1;
    int max_responders = 3;
    MsRange forward_interval_ms{45'000, 90'000};
    std::vector<std::string> predefined_prompts{"Explain this part", "Why is this correct?", "Give an example"};
};

struct VideoFrame {
    int width = 1280;
    int height = 720;
};

struct SessionConfig {
    Mode mode = Mode::full;
    std::uint64_t seed = 0;
    std::vector<Persona> roster = default_roster();
    SchedulerConfig scheduler;
    RouterConfig router;
    IdleThresholds idle;
    AgentSettings agent;
    ProviderConfig provider;
    VideoFrame video;
    // Resolved against the config file's directory when loaded from disk.
    std::string transcript_path;

    // Throws ConfigError, e.g. for an empty roster or duplicate names.
    void validate() const;
};

// Missing keys keep their defaults; unknown keys are ignored.
SessionConfig session_config_from_json(const Json& j);
Json to_json(const SessionConfig& config);

SessionConfig load_session_config(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

} // namespace costudy
