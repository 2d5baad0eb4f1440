// costudy: run the co-study server or work with session logs offline.
//
//   costudy serve --config config/server.json [--port N] [--seed N] [--mode full|baseline] [--provider http|stub]
//   costudy simulate --config config/session.json [--seed N] [--mode M] [--out FILE]
//   costudy replay --config config/session.json --log FILE [--out FILE] [--check]
//   costudy validate-manifest --manifest config/assets.json [--config config/session.json]

#include "costudy/config.hpp"
#include "costudy/engine.hpp"
#include "costudy/errors.hpp"
#include "costudy/manifest.hpp"
#include "costudy/script.hpp"
#include "costudy/server.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <map>

using namespace costudy;

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;
    std::optional<std::string> provider;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--seed", seed, "RNG seed for every session");
        cmd->add_option("--mode", mode, "Condition")->check(CLI::IsMember({"full", "baseline"}));
        cmd->add_option("--provider", provider, "Model backend")->check(CLI::IsMember({"http", "stub"}));
    }

    void apply(SessionConfig& c) const {
        if (seed) c.seed = *seed;
        if (mode) c.mode = *mode_from_string(*mode);
        if (provider) c.provider.backend = *provider == "http" ? Backend::http : Backend::stub;
        if (seed || provider) c.provider.seed = 0;
        if (c.provider.seed == 0) c.provider.seed = c.seed;
    }
};

std::vector<std::string> agent_ids(const SessionConfig& c) {
    std::vector<std::string> ids;
    for (std::size_t i = 1; i <= c.roster.size(); ++i) ids.push_back("agent-" + std::to_string(i));
    return ids;
}

void write_output(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw Error("cannot write " + path);
}

int serve(const std::string& config_path, std::optional<int> port, const Overrides& ov) {
    ServerConfig sc = load_server_config(config_path);
    if (port) sc.port = *port;
    sc.validate();

    SessionConfig cfg = load_session_config(sc.session_config_path);
    ov.apply(cfg);
    cfg.validate();
    const std::string transcript = read_file(cfg.transcript_path);
    AssetManifest manifest = load_manifest(sc.manifest_path);
    validate_manifest(manifest, agent_ids(cfg));

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    SessionHub hub(cfg, transcript, sc.log_dir, steady_clock_ms());
    ApiServer server(sc, hub, std::move(manifest));
    const int bound = server.start();
    std::cout << "costudy listening on http://" << sc.host << ":" << bound << " (" << to_string(cfg.mode) << ", "
              << (cfg.provider.backend == Backend::http ? "http" : "stub") << " provider)" << std::endl;

    int sig = 0;
    sigwait(&signals, &sig);
    std::cout << "shutting down" << std::endl;
    server.stop();
    return 0;
}

int simulate(const std::string& config_path, const Overrides& ov, const std::string& out) {
    SessionConfig cfg = load_session_config(config_path);
    ov.apply(cfg);
    Session session = Session::create(cfg, read_file(cfg.transcript_path), make_provider(cfg.provider));
    run_script(session, demo_script());
    write_output(session.export_log(), out);
    return 0;
}

int replay_log(const std::string& config_path, const Overrides& ov, const std::string& log_path,
               const std::string& out, bool check) {
    SessionConfig cfg = load_session_config(config_path);
    ov.apply(cfg);
    const std::string original = read_file(log_path);
    const auto events = read_log(original);
    const Session session = replay(cfg, read_file(cfg.transcript_path), make_provider(cfg.provider), events);
    const std::string rebuilt = session.export_log();
    if (check) {
        if (rebuilt != original) {
            std::cerr << "replay diverges from " << log_path << '\n';
            return 1;
        }
        std::cerr << "replay matches " << log_path << " (" << events.size() << " events)\n";
        return 0;
    }
    write_output(rebuilt, out);
    return 0;
}

int check_manifest(const std::string& manifest_path, const std::string& config_path) {
    SessionConfig cfg = config_path.empty() ? SessionConfig{} : load_session_config(config_path);
    const auto manifest = load_manifest(manifest_path);
    const auto ids = agent_ids(cfg);
    const auto missing = missing_assets(manifest, ids);
    if (!missing.empty()) {
        std::cerr << missing.size() << " missing asset(s):\n";
        for (const auto& m : missing) std::cerr << "  " << m << '\n';
        return 1;
    }
    std::cout << "manifest complete for " << ids.size() << " agents\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Co-study session server and log tools"};
    app.require_subcommand(1);

    std::string config, log, out, manifest;
    std::optional<int> port;
    bool check = false;
    Overrides ov;

    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP server");
    serve_cmd->add_option("--config", config, "Server config (JSON)")->required()->check(CLI::ExistingFile);
    serve_cmd->add_option("--port", port, "Listen port (0 picks a free one)")->check(CLI::Range(0, 65535));
    ov.add_to(serve_cmd);

    auto* sim_cmd = app.add_subcommand("simulate", "Run the scripted five-minute session and print its log");
    sim_cmd->add_option("--config", config, "Session config (JSON)")->required()->check(CLI::ExistingFile);
    sim_cmd->add_option("--out", out, "Output file (default stdout)");
    ov.add_to(sim_cmd);

    auto* replay_cmd = app.add_subcommand("replay", "Rebuild a session from its log");
    replay_cmd->add_option("--config", config, "Session config (JSON)")->required()->check(CLI::ExistingFile);
    replay_cmd->add_option("--log", log, "Session log (JSONL)")->required()->check(CLI::ExistingFile);
    replay_cmd->add_option("--out", out, "Output file (default stdout)");
    replay_cmd->add_flag("--check", check, "Compare the rebuilt log with the input instead of printing it");
    ov.add_to(replay_cmd);

    auto* manifest_cmd = app.add_subcommand("validate-manifest", "Check an asset manifest for completeness");
    manifest_cmd->add_option("--manifest", manifest, "Asset manifest (JSON)")->required()->check(CLI::ExistingFile);
    manifest_cmd->add_option("--config", config, "Session config giving the roster size")->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*serve_cmd) return serve(config, port, ov);
        if (*sim_cmd) return simulate(config, ov, out);
        if (*replay_cmd) return replay_log(config, ov, log, out, check);
        if (*manifest_cmd) return check_manifest(manifest, config);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
