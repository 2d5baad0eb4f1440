#include "costudy/config.hpp"

#include "costudy/errors.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace costudy {

std::string_view to_string(Mode mode) {
    return mode == Mode::baseline ? "baseline" : "full";
}

std::optional<Mode> mode_from_string(std::string_view s) {
    if (s == "full") return Mode::full;
    if (s == "baseline") return Mode::baseline;
    return std::nullopt;
}

void SessionConfig::validate() const {
    if (roster.empty()) throw ConfigError("roster: at least one co-learner is required");
    std::set<std::string> names;
    for (const auto& p : roster) {
        p.validate();
        if (!names.insert(p.name).second) throw ConfigError("roster: duplicate persona name \"" + p.name + "\"");
    }
    scheduler.validate();
    idle.validate();
    provider.validate();
    if (router.min_responders < 1 || router.min_responders > router.max_responders) {
        throw ConfigError("router.group_responders: need 1 <= lo <= hi");
    }
    if (router.forward_interval_ms.lo <= 0 || router.forward_interval_ms.lo > router.forward_interval_ms.hi) {
        throw ConfigError("router.forward_interval_ms: need 0 < lo <= hi");
    }
    if (agent.token_budget < 1) throw ConfigError("memory.token_budget: must be at least 1");
    if (video.width <= 0 || video.height <= 0) throw ConfigError("video: width and height must be positive");
}

namespace {

template <class T>
void read(const Json& j, const char* key, T& out) {
    if (j.is_object() && j.contains(key) && !j[key].is_null()) {
        try {
            out = j[key].get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(std::string(key) + ": wrong type");
        }
    }
}

void read_range(const Json& j, const char* key, MsRange& out) {
    if (!j.is_object() || !j.contains(key)) return;
    const auto& v = j[key];
    if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
        throw ConfigError(std::string(key) + ": expected [lo, hi]");
    }
    out = MsRange{v[0].get<std::int64_t>(), v[1].get<std::int64_t>()};
}

Json range_json(const MsRange& r) {
    return Json::array({r.lo, r.hi});
}

const Json& section(const Json& j, const char* key) {
    static const Json empty = Json::object();
    if (j.is_object() && j.contains(key)) {
        if (!j[key].is_object()) throw ConfigError(std::string(key) + ": expected an object");
        return j[key];
    }
    return empty;
}

} // namespace

SessionConfig session_config_from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("session config must be a JSON object");
    SessionConfig c;

    std::string mode = std::string(to_string(c.mode));
    read(j, "mode", mode);
    const auto m = mode_from_string(mode);
    if (!m) throw ConfigError("mode: expected \"full\" or \"baseline\"");
    c.mode = *m;
    read(j, "seed", c.seed);
    read(j, "transcript_path", c.transcript_path);

    if (j.contains("roster")) {
        if (!j["roster"].is_array()) throw ConfigError("roster: expected an array");
        c.roster.clear();
        for (const auto& p : j["roster"]) {
            Persona persona;
            read(p, "name", persona.name);
            read(p, "tone", persona.tone);
            read(p, "interaction_style", persona.interaction_style);
            read(p, "characteristic", persona.characteristic);
            read(p, "voice_id", persona.voice_id);
            c.roster.push_back(std::move(persona));
        }
    }

    const auto& s = section(j, "scheduler");
    read_range(s, "passive_interval_ms", c.scheduler.passive_interval_ms);
    read(s, "break_probability", c.scheduler.break_probability);
    read(s, "active_rate_wps", c.scheduler.active_rate_wps);
    read_range(s, "active_clamp_ms", c.scheduler.active_clamp_ms);
    read(s, "starting_ms", c.scheduler.starting_ms);
    read(s, "ending_ms", c.scheduler.ending_ms);
    read(s, "shared_screen_len_ms", c.scheduler.shared_screen_len_ms);
    read(s, "passive_action_ms", c.scheduler.passive_action_ms);

    const auto& r = section(j, "router");
    if (r.contains("group_responders")) {
        MsRange resp{c.router.min_responders, c.router.max_responders};
        read_range(r, "group_responders", resp);
        c.router.min_responders = static_cast<int>(resp.lo);
        c.router.max_responders = static_cast<int>(resp.hi);
    }
    read_range(r, "forward_interval_ms", c.router.forward_interval_ms);
    read(r, "predefined_prompts", c.router.predefined_prompts);

    const auto& idle = section(j, "idle");
    read(idle, "mouse_idle_ms", c.idle.mouse_idle_ms);
    read(idle, "notes_idle_ms", c.idle.notes_idle_ms);
    read(idle, "code_idle_ms", c.idle.code_idle_ms);

    const auto& mem = section(j, "memory");
    read(mem, "token_budget", c.agent.token_budget);

    const auto& p = section(j, "provider");
    std::string backend = c.provider.backend == Backend::http ? "http" : "stub";
    read(p, "backend", backend);
    if (backend == "http") {
        c.provider.backend = Backend::http;
    } else if (backend == "stub") {
        c.provider.backend = Backend::stub;
    } else {
        throw ConfigError("provider.backend: expected \"http\" or \"stub\"");
    }
    if (p.contains("api_key")) {
        throw ConfigError("provider.api_key: keys are not accepted in config files; set api_key_env instead");
    }
    read(p, "base_url", c.provider.base_url);
    read(p, "api_key_env", c.provider.api_key_env);
    const auto& models = section(p, "models");
    read(models, "chat", c.provider.models.chat);
    read(models, "stt", c.provider.models.stt);
    read(models, "tts", c.provider.models.tts);
    read(p, "timeout_ms", c.provider.timeout_ms);
    const auto& retry = section(p, "retry");
    read(retry, "max_attempts", c.provider.retry.max_attempts);
    read(retry, "backoff_ms", c.provider.retry.backoff_ms);
    read(p, "temperature", c.provider.temperature);
    read(p, "max_reply_tokens", c.provider.max_reply_tokens);
    read(p, "max_in_flight", c.provider.max_in_flight);
    c.provider.seed = c.seed;
    read(p, "seed", c.provider.seed);

    c.agent.temperature = c.provider.temperature;
    c.agent.max_reply_tokens = c.provider.max_reply_tokens;

    const auto& v = section(j, "video");
    read(v, "width", c.video.width);
    read(v, "height", c.video.height);

    c.validate();
    return c;
}

Json to_json(const SessionConfig& c) {
    Json roster = Json::array();
    for (const auto& p : c.roster) {
        roster.push_back(Json{{"name", p.name},
                              {"tone", p.tone},
                              {"interaction_style", p.interaction_style},
                              {"characteristic", p.characteristic},
                              {"voice_id", p.voice_id}});
    }
    return Json{
        {"mode", to_string(c.mode)},
        {"seed", c.seed},
        {"transcript_path", c.transcript_path},
        {"roster", std::move(roster)},
        {"scheduler",
         Json{{"passive_interval_ms", range_json(c.scheduler.passive_interval_ms)},
              {"break_probability", c.scheduler.break_probability},
              {"active_rate_wps", c.scheduler.active_rate_wps},
              {"active_clamp_ms", range_json(c.scheduler.active_clamp_ms)},
              {"starting_ms", c.scheduler.starting_ms},
              {"ending_ms", c.scheduler.ending_ms},
              {"shared_screen_len_ms", c.scheduler.shared_screen_len_ms},
              {"passive_action_ms", c.scheduler.passive_action_ms}}},
        {"router",
         Json{{"group_responders", Json::array({c.router.min_responders, c.router.max_responders})},
              {"forward_interval_ms", range_json(c.router.forward_interval_ms)},
              {"predefined_prompts", c.router.predefined_prompts}}},
        {"idle",
         Json{{"mouse_idle_ms", c.idle.mouse_idle_ms},
              {"notes_idle_ms", c.idle.notes_idle_ms},
              {"code_idle_ms", c.idle.code_idle_ms}}},
        {"memory", Json{{"token_budget", c.agent.token_budget}}},
        {"provider",
         Json{{"backend", c.provider.backend == Backend::http ? "http" : "stub"},
              {"base_url", c.provider.base_url},
              {"api_key_env", c.provider.api_key_env},
              {"models",
               Json{{"chat", c.provider.models.chat}, {"stt", c.provider.models.stt}, {"tts", c.provider.models.tts}}},
              {"timeout_ms", c.provider.timeout_ms},
              {"retry", Json{{"max_attempts", c.provider.retry.max_attempts}, {"backoff_ms", c.provider.retry.backoff_ms}}},
              {"temperature", c.provider.temperature},
              {"max_reply_tokens", c.provider.max_reply_tokens},
              {"max_in_flight", c.provider.max_in_flight},
              {"seed", c.provider.seed}}},
        {"video", Json{{"width", c.video.width}, {"height", c.video.height}}},
    };
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

SessionConfig load_session_config(const std::filesystem::path& path) {
    const auto j = Json::parse(read_file(path), nullptr, false);
    if (j.is_discarded()) throw ConfigError(path.string() + ": not valid JSON");
    SessionConfig c = session_config_from_json(j);
    if (!c.transcript_path.empty()) {
        std::filesystem::path t(c.transcript_path);
        if (t.is_relative()) c.transcript_path = (path.parent_path() / t).string();
    }
    return c;
}

} // namespace costudy
