#include "costudy/manifest.hpp"

#include "costudy/actions.hpp"
#include "costudy/config.hpp"
#include "costudy/errors.hpp"

namespace costudy {

std::vector<std::string> required_action_keys() {
    std::vector<std::string> keys;
    for (const auto a : kPassiveActions) keys.emplace_back(to_string(a));
    for (const auto a : kActiveActions) {
        for (const auto p : kPhases) keys.push_back(std::string(to_string(a)) + "." + std::string(to_string(p)));
    }
    return keys;
}

AssetManifest manifest_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("agents") || !j["agents"].is_object()) {
        throw ConfigError("manifest: expected an \"agents\" object");
    }
    AssetManifest m;
    for (auto it = j["agents"].begin(); it != j["agents"].end(); ++it) {
        const Json& entry = it.value();
        if (!entry.is_object()) throw ConfigError("manifest: entry for " + it.key() + " must be an object");
        AgentAssets assets;
        if (entry.contains("actions")) {
            if (!entry["actions"].is_object()) throw ConfigError("manifest: " + it.key() + ".actions must be an object");
            for (auto a = entry["actions"].begin(); a != entry["actions"].end(); ++a) {
                if (!a.value().is_string()) throw ConfigError("manifest: " + it.key() + "." + a.key() + " must be a path");
                assets.actions[a.key()] = a.value().get<std::string>();
            }
        }
        assets.shared_screen = entry.value("shared_screen", std::string());
        m.agents[it.key()] = std::move(assets);
    }
    return m;
}

Json to_json(const AssetManifest& manifest) {
    Json agents = Json::object();
    for (const auto& [id, assets] : manifest.agents) {
        Json actions = Json::object();
        for (const auto& [key, path] : assets.actions) actions[key] = path;
        agents[id] = Json{{"actions", std::move(actions)}, {"shared_screen", assets.shared_screen}};
    }
    return Json{{"agents", std::move(agents)}};
}

AssetManifest load_manifest(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::exception& e) {
        throw ConfigError("manifest " + path.string() + ": " + e.what());
    }
    return manifest_from_json(j);
}

std::vector<std::string> missing_assets(const AssetManifest& manifest, const std::vector<std::string>& agent_ids) {
    std::vector<std::string> missing;
    const auto keys = required_action_keys();
    for (const auto& id : agent_ids) {
        const auto it = manifest.agents.find(id);
        if (it == manifest.agents.end()) {
            missing.push_back(id);
            continue;
        }
        for (const auto& key : keys) {
            const auto a = it->second.actions.find(key);
            if (a == it->second.actions.end() || a->second.empty()) missing.push_back(id + ": " + key);
        }
        if (it->second.shared_screen.empty()) missing.push_back(id + ": shared_screen");
    }
    return missing;
}

void validate_manifest(const AssetManifest& manifest, const std::vector<std::string>& agent_ids) {
    const auto missing = missing_assets(manifest, agent_ids);
    if (missing.empty()) return;
    std::string msg = "asset manifest incomplete (" + std::to_string(missing.size()) + " missing):";
    const std::size_t shown = std::min<std::size_t>(missing.size(), 8);
    for (std::size_t i = 0; i < shown; ++i) msg += " " + missing[i] + (i + 1 < shown ? "," : "");
    if (shown < missing.size()) msg += " ...";
    throw ConfigError(msg);
}

} // namespace costudy
