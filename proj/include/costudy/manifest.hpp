#pragma once

#include "costudy/json.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace costudy {

// Clip paths per agent: one per passive action ("typing"), one per active
// action and phase ("explaining.starting"), plus the shared-screen loop.
struct AgentAssets {
    std::map<std::string, std::string> actions;
    std::string shared_screen;
};

struct AssetManifest {
    std::map<std::string, AgentAssets> agents;
};

// The 28 action keys every agent needs.
std::vector<std::string> required_action_keys();

// {"agents": {"agent-1": {"actions": {...}, "shared_screen": "..."}}}
AssetManifest manifest_from_json(const Json& j);
Json to_json(const AssetManifest& manifest);
AssetManifest load_manifest(const std::filesystem::path& path);

// "agent-2: explaining.ending" style entries for every gap.
std::vector<std::string> missing_assets(const AssetManifest& manifest, const std::vector<std::string>& agent_ids);

// Throws ConfigError listing the missing entries.
void validate_manifest(const AssetManifest& manifest, const std::vector<std::string>& agent_ids);

} // namespace costudy
