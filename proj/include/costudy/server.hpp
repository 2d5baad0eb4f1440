#pragma once

#include "costudy/config.hpp"
#include "costudy/engine.hpp"
#include "costudy/errors.hpp"
#include "costudy/manifest.hpp"
#include "costudy/session.hpp"

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace costudy {

inline constexpr int kProtocolVersion = 1;

struct ServerConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path session_config_path;
    std::filesystem::path manifest_path;
    std::filesystem::path asset_dir;
    std::filesystem::path log_dir = "logs";
    std::int64_t heartbeat_ms = 15'000;
    // Scheduler and idle-trigger resolution.
    std::int64_t tick_ms = 250;
    // Open sessions are flushed to disk at this interval when they changed.
    std::int64_t persist_interval_ms = 5'000;
    // Stream writes that stall longer than this drop the subscriber.
    std::int64_t write_timeout_ms = 5'000;

    // Command-line overrides applied to every session.
    std::optional<std::uint64_t> seed;
    std::optional<Mode> mode;
    std::optional<Backend> backend;

    // Throws ConfigError.
    void validate() const;
};

// Relative paths resolve against base_dir.
ServerConfig server_config_from_json(const Json& j, const std::filesystem::path& base_dir = {});
ServerConfig load_server_config(const std::filesystem::path& path);

// WireEvent rendering: the log line fields plus protocol_version.
Json to_wire(const SessionEvent& event);

// Writes {log_dir}/{session_id}.jsonl through a temp file and a rename.
// Tests inject a fault between the two steps through the hook.
std::filesystem::path persist_log(const std::filesystem::path& log_dir, const std::string& session_id,
                                  const std::string& jsonl,
                                  const std::function<void(const std::filesystem::path&)>& before_rename = {});

class NotFound : public Error {
public:
    using Error::Error;
};

// Milliseconds on a monotonic host clock.
using ClockFn = std::function<std::int64_t()>;
ClockFn steady_clock_ms();

// Owns every session of a server process. Each session has its own mutex;
// ingest, ticks and reads of one session are serialized, distinct sessions
// proceed in parallel. Session clocks start at zero on creation.
class SessionHub {
public:
    SessionHub(SessionConfig base, std::string transcript_text, std::filesystem::path log_dir, ClockFn clock);
    ~SessionHub();

    SessionHub(const SessionHub&) = delete;
    SessionHub& operator=(const SessionHub&) = delete;

    // Body fields: optional "seed", "mode" and "config" (a full session
    // config document). Throws ConfigError or ValidationError.
    Json create(const Json& request);

    // Throws NotFound for unknown or closed sessions, ValidationError for a
    // bad payload.
    IngestResult ingest(const std::string& id, const Json& wire);

    Json snapshot(const std::string& id);
    std::string export_log(const std::string& id);
    std::optional<SpeechClip> clip(const std::string& id, const std::string& clip_id);

    // Persists and closes; the log stays readable.
    std::filesystem::path close(const std::string& id);
    std::filesystem::path persist(const std::string& id);
    void persist_all();

    // Advances every open session to the current clock.
    void tick_all();

    struct Batch {
        std::vector<SessionEvent> events;
        bool closed = false;
        bool timed_out = false;
        std::uint64_t last_seq = 0;
    };
    // Events with seq > after, waiting up to wait_ms for new ones.
    Batch wait_events(const std::string& id, std::uint64_t after, std::int64_t wait_ms, std::size_t max_events = 512);

    bool exists(const std::string& id);
    std::vector<std::string> session_ids();
    // Wakes every waiting subscriber, e.g. on shutdown.
    void shutdown();

    std::int64_t now() const { return clock_(); }

private:
    struct Hosted {
        std::mutex mu;
        std::condition_variable cv;
        std::optional<Session> session;
        // Archived logs loaded from disk, and closed sessions.
        std::vector<SessionEvent> frozen;
        std::int64_t started_ms = 0;
        std::uint64_t persisted_seq = 0;
        bool closed = false;
    };

    std::shared_ptr<Hosted> find(const std::string& id);
    std::string next_id(std::uint64_t seed);
    void load_archives();

    SessionConfig base_;
    std::string transcript_;
    std::filesystem::path log_dir_;
    ClockFn clock_;
    std::mutex mu_;
    std::map<std::string, std::shared_ptr<Hosted>> sessions_;
    std::uint64_t created_ = 0;
    std::atomic<bool> stopping_{false};
};

// HTTP front end over a hub.
//
//   POST   /sessions                       201 {session_id, ...}
//   GET    /sessions/{id}                  snapshot
//   POST   /sessions/{id}/events           {seq} | 400 {error, field} | 404
//   GET    /sessions/{id}/stream           text/event-stream, ?from_seq=N or Last-Event-ID
//   GET    /sessions/{id}/log              application/x-ndjson
//   GET    /sessions/{id}/audio/{clip_id}  synthesized speech
//   DELETE /sessions/{id}                  persist and close
//   GET    /manifest                       asset manifest
//   GET    /assets/...                     static clips
class ApiServer {
public:
    ApiServer(ServerConfig config, SessionHub& hub, AssetManifest manifest);
    ~ApiServer();

    // Binds (port 0 picks a free one) and starts the listener and ticker
    // threads. Throws Error on bind failure.
    int start();
    void stop();
    // Blocks until stop().
    void wait();
    int port() const noexcept { return port_; }

private:
    void routes();
    void ticker();

    ServerConfig config_;
    SessionHub& hub_;
    AssetManifest manifest_;
    std::unique_ptr<httplib::Server> http_;
    std::thread listener_;
    std::thread ticker_;
    std::mutex stop_mu_;
    std::condition_variable stop_cv_;
    bool stopped_ = false;
    int port_ = 0;
};

} // namespace costudy
