#include "costudy/server.hpp"

#include "costudy/errors.hpp"
#include "costudy/rng.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace costudy {

namespace fs = std::filesystem;

void ServerConfig::validate() const {
    if (port < 0 || port > 65535) throw ConfigError("server: port must be in [0, 65535]");
    if (host.empty()) throw ConfigError("server: host must not be empty");
    if (heartbeat_ms <= 0) throw ConfigError("server: heartbeat_ms must be positive");
    if (tick_ms <= 0) throw ConfigError("server: tick_ms must be positive");
    if (persist_interval_ms <= 0) throw ConfigError("server: persist_interval_ms must be positive");
    if (write_timeout_ms <= 0) throw ConfigError("server: write_timeout_ms must be positive");
    if (log_dir.empty()) throw ConfigError("server: log_dir must not be empty");
    if (session_config_path.empty()) throw ConfigError("server: session_config is required");
    if (!fs::is_regular_file(session_config_path)) {
        throw ConfigError("server: cannot read session config " + session_config_path.string());
    }
    if (manifest_path.empty()) throw ConfigError("server: manifest is required");
    if (!fs::is_regular_file(manifest_path)) throw ConfigError("server: cannot read manifest " + manifest_path.string());
}

ServerConfig server_config_from_json(const Json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw ConfigError("server config: expected a JSON object");
    auto path = [&](const char* key, const fs::path& fallback) -> fs::path {
        if (!j.contains(key)) return fallback;
        if (!j[key].is_string()) throw ConfigError(std::string("server config: ") + key + " must be a string");
        fs::path p = j[key].get<std::string>();
        return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    };
    ServerConfig c;
    try {
        c.host = j.value("host", c.host);
        c.port = j.value("port", c.port);
        c.heartbeat_ms = j.value("heartbeat_ms", c.heartbeat_ms);
        c.tick_ms = j.value("tick_ms", c.tick_ms);
        c.persist_interval_ms = j.value("persist_interval_ms", c.persist_interval_ms);
        c.write_timeout_ms = j.value("write_timeout_ms", c.write_timeout_ms);
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("server config: ") + e.what());
    }
    c.session_config_path = path("session_config", {});
    c.manifest_path = path("manifest", {});
    c.asset_dir = path("asset_dir", {});
    c.log_dir = path("log_dir", base_dir.empty() ? fs::path("logs") : base_dir / "logs");
    return c;
}

ServerConfig load_server_config(const fs::path& path) {
    const std::string text = read_file(path);
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::exception& e) {
        throw ConfigError("server config " + path.string() + ": " + e.what());
    }
    return server_config_from_json(j, path.parent_path());
}

Json to_wire(const SessionEvent& event) {
    Json j = to_json(event);
    j["protocol_version"] = kProtocolVersion;
    return j;
}

fs::path persist_log(const fs::path& log_dir, const std::string& session_id, const std::string& jsonl,
                     const std::function<void(const fs::path&)>& before_rename) {
    std::error_code ec;
    fs::create_directories(log_dir, ec);
    if (ec) throw Error("persist: cannot create " + log_dir.string() + ": " + ec.message());
    const fs::path target = log_dir / (session_id + ".jsonl");
    const fs::path temp = log_dir / (session_id + ".jsonl.tmp");
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        out.write(jsonl.data(), static_cast<std::streamsize>(jsonl.size()));
        out.flush();
        if (!out) throw Error("persist: write failed for " + temp.string());
    }
    if (before_rename) before_rename(temp);
    fs::rename(temp, target, ec);
    if (ec) throw Error("persist: rename failed for " + target.string() + ": " + ec.message());
    return target;
}

ClockFn steady_clock_ms() {
    const auto origin = std::chrono::steady_clock::now();
    return [origin] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - origin).count();
    };
}

// ---------------------------------------------------------------------------

SessionHub::SessionHub(SessionConfig base, std::string transcript_text, fs::path log_dir, ClockFn clock)
    : base_(std::move(base)), transcript_(std::move(transcript_text)), log_dir_(std::move(log_dir)),
      clock_(std::move(clock)) {
    base_.validate();
    parse_transcript(transcript_);
    load_archives();
}

SessionHub::~SessionHub() { shutdown(); }

void SessionHub::load_archives() {
    std::error_code ec;
    if (!fs::is_directory(log_dir_, ec)) return;
    for (const auto& entry : fs::directory_iterator(log_dir_, ec)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".jsonl") continue;
        auto hosted = std::make_shared<Hosted>();
        try {
            hosted->frozen = read_log(read_file(entry.path()));
        } catch (const Error& e) {
            std::cerr << "skipping unreadable log " << entry.path() << ": " << e.what() << '\n';
            continue;
        }
        hosted->closed = true;
        hosted->persisted_seq = hosted->frozen.empty() ? 0 : hosted->frozen.back().seq;
        sessions_[entry.path().stem().string()] = std::move(hosted);
    }
}

std::string SessionHub::next_id(std::uint64_t seed) {
    for (;;) {
        const std::uint64_t h = derive_seed(seed, "session/" + std::to_string(++created_));
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        std::string id = "s-" + std::string(buf, 12);
        if (!sessions_.count(id)) return id;
    }
}

Json SessionHub::create(const Json& request) {
    if (!request.is_null() && !request.is_object()) throw ValidationError("body", "must be a JSON object");
    SessionConfig cfg = base_;
    if (request.is_object()) {
        if (request.contains("config")) {
            if (!request["config"].is_object()) throw ValidationError("config", "must be an object");
            cfg = session_config_from_json(request["config"]);
        }
        if (request.contains("seed")) {
            const auto& seed = request["seed"];
            if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0))
                throw ValidationError("seed", "must be a non-negative integer");
            cfg.seed = request["seed"].get<std::uint64_t>();
            cfg.provider.seed = cfg.seed;
        }
        if (request.contains("mode")) {
            const auto m = request["mode"].is_string() ? mode_from_string(request["mode"].get<std::string>())
                                                       : std::nullopt;
            if (!m) throw ValidationError("mode", "must be \"full\" or \"baseline\"");
            cfg.mode = *m;
        }
    }
    if (cfg.provider.seed == 0) cfg.provider.seed = cfg.seed;
    cfg.validate();
    auto provider = make_provider(cfg.provider);

    std::string id;
    {
        std::lock_guard lock(mu_);
        id = next_id(cfg.seed);
        sessions_[id] = nullptr; // reserve
    }
    auto hosted = std::make_shared<Hosted>();
    try {
        hosted->session.emplace(Session::create(cfg, transcript_, provider, id));
    } catch (...) {
        std::lock_guard lock(mu_);
        sessions_.erase(id);
        throw;
    }
    hosted->started_ms = clock_();
    const Session& s = *hosted->session;
    Json roster = Json::array();
    for (const auto& a : s.agents()) {
        roster.push_back(Json{{"agent_id", a.id()}, {"name", a.persona().name}, {"voice_id", a.persona().voice_id}});
    }
    Json reply{{"session_id", id},
               {"mode", to_string(s.mode())},
               {"seed", s.rng_seed()},
               {"roster", std::move(roster)},
               {"stream", "/sessions/" + id + "/stream"},
               {"protocol_version", kProtocolVersion}};
    std::lock_guard lock(mu_);
    sessions_[id] = std::move(hosted);
    return reply;
}

std::shared_ptr<SessionHub::Hosted> SessionHub::find(const std::string& id) {
    std::lock_guard lock(mu_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end() || !it->second) throw NotFound("unknown session \"" + id + "\"");
    return it->second;
}

bool SessionHub::exists(const std::string& id) {
    std::lock_guard lock(mu_);
    const auto it = sessions_.find(id);
    return it != sessions_.end() && it->second;
}

std::vector<std::string> SessionHub::session_ids() {
    std::lock_guard lock(mu_);
    std::vector<std::string> ids;
    for (const auto& [id, h] : sessions_) {
        if (h) ids.push_back(id);
    }
    return ids;
}

IngestResult SessionHub::ingest(const std::string& id, const Json& wire) {
    auto h = find(id);
    std::lock_guard lock(h->mu);
    if (h->closed || !h->session) throw NotFound("session \"" + id + "\" is closed");
    IngestResult r = costudy::ingest(*h->session, wire, clock_() - h->started_ms);
    h->cv.notify_all();
    return r;
}

Json SessionHub::snapshot(const std::string& id) {
    auto h = find(id);
    std::lock_guard lock(h->mu);
    if (h->session) return h->session->snapshot();
    return Json{{"session_id", id},
                {"closed", true},
                {"last_seq", h->frozen.empty() ? 0 : h->frozen.back().seq},
                {"event_count", h->frozen.size()}};
}

std::string SessionHub::export_log(const std::string& id) {
    auto h = find(id);
    std::lock_guard lock(h->mu);
    if (h->session) return h->session->export_log();
    std::string out;
    for (const auto& ev : h->frozen) out += to_jsonl(ev) + '\n';
    return out;
}

std::optional<SpeechClip> SessionHub::clip(const std::string& id, const std::string& clip_id) {
    auto h = find(id);
    std::lock_guard lock(h->mu);
    if (!h->session) return std::nullopt;
    const SpeechClip* c = h->session->clip(clip_id);
    if (!c) return std::nullopt;
    return *c;
}

fs::path SessionHub::persist(const std::string& id) {
    auto h = find(id);
    std::lock_guard lock(h->mu);
    std::string jsonl;
    std::uint64_t last = 0;
    if (h->session) {
        jsonl = h->session->export_log();
        last = h->session->last_seq();
    } else {
        for (const auto& ev : h->frozen) jsonl += to_jsonl(ev) + '\n';
        last = h->frozen.empty() ? 0 : h->frozen.back().seq;
    }
    const auto path = persist_log(log_dir_, id, jsonl);
    h->persisted_seq = last;
    return path;
}

void SessionHub::persist_all() {
    for (const auto& id : session_ids()) {
        auto h = find(id);
        bool dirty = false;
        {
            std::lock_guard lock(h->mu);
            dirty = h->session && h->session->last_seq() != h->persisted_seq;
        }
        if (dirty) {
            try {
                persist(id);
            } catch (const Error& e) {
                std::cerr << "persist " << id << ": " << e.what() << '\n';
            }
        }
    }
}

fs::path SessionHub::close(const std::string& id) {
    auto h = find(id);
    {
        std::lock_guard lock(h->mu);
        if (h->session) {
            h->frozen = h->session->log();
            h->session.reset();
        }
        h->closed = true;
    }
    const auto path = persist(id);
    h->cv.notify_all();
    return path;
}

void SessionHub::tick_all() {
    for (const auto& id : session_ids()) {
        std::shared_ptr<Hosted> h;
        try {
            h = find(id);
        } catch (const NotFound&) {
            continue;
        }
        std::lock_guard lock(h->mu);
        if (!h->session) continue;
        if (!advance(*h->session, clock_() - h->started_ms).empty()) h->cv.notify_all();
    }
}

SessionHub::Batch SessionHub::wait_events(const std::string& id, std::uint64_t after, std::int64_t wait_ms,
                                          std::size_t max_events) {
    auto h = find(id);
    std::unique_lock lock(h->mu);
    auto log = [&]() -> const std::vector<SessionEvent>& { return h->session ? h->session->log() : h->frozen; };
    auto last = [&] { return log().empty() ? std::uint64_t{0} : log().back().seq; };
    const bool ready = h->cv.wait_for(lock, std::chrono::milliseconds(wait_ms),
                                      [&] { return last() > after || h->closed || stopping_; });
    Batch b;
    b.timed_out = !ready;
    b.closed = h->closed || stopping_;
    b.last_seq = last();
    const auto& events = log();
    for (std::size_t i = after; i < events.size() && b.events.size() < max_events; ++i) b.events.push_back(events[i]);
    return b;
}

void SessionHub::shutdown() {
    stopping_ = true;
    std::lock_guard lock(mu_);
    for (auto& [id, h] : sessions_) {
        if (h) h->cv.notify_all();
    }
}

// ---------------------------------------------------------------------------

namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message,
                const std::optional<std::string>& field = std::nullopt) {
    Json body{{"error", message}};
    if (field) body["field"] = *field;
    send_json(res, status, body);
}

template <class Fn>
void guarded(httplib::Response& res, Fn&& fn) {
    try {
        fn();
    } catch (const NotFound& e) {
        send_error(res, 404, e.what());
    } catch (const ValidationError& e) {
        send_error(res, 400, e.what(), e.field());
    } catch (const ConfigError& e) {
        send_error(res, 400, e.what(), "config");
    } catch (const ParseError& e) {
        send_error(res, 400, e.what(), "config");
    } catch (const std::exception& e) {
        send_error(res, 500, e.what());
    }
}

Json parse_body(const httplib::Request& req, bool allow_empty) {
    if (req.body.empty()) {
        if (allow_empty) return Json();
        throw ValidationError("body", "request body is empty");
    }
    try {
        return Json::parse(req.body);
    } catch (const Json::exception&) {
        throw ValidationError("body", "malformed JSON");
    }
}

std::string sse_frame(const SessionEvent& ev) {
    return "id: " + std::to_string(ev.seq) + "\ndata: " + to_wire(ev).dump(-1, ' ', false, Json::error_handler_t::replace) +
           "\n\n";
}

std::string hb_frame(std::uint64_t last_seq) {
    return "event: hb\ndata: " + Json{{"type", "hb"}, {"last_seq", last_seq}}.dump() + "\n\n";
}

std::optional<std::uint64_t> parse_seq(const std::string& s) {
    if (s.empty() || s.size() > 19) return std::nullopt;
    std::uint64_t v = 0;
    for (const char c : s) {
        if (c < '0' || c > '9') return std::nullopt;
        v = v * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return v;
}

} // namespace

ApiServer::ApiServer(ServerConfig config, SessionHub& hub, AssetManifest manifest)
    : config_(std::move(config)), hub_(hub), manifest_(std::move(manifest)), http_(std::make_unique<httplib::Server>()) {
    http_->new_task_queue = [] { return new httplib::ThreadPool(64); };
    const auto wt = config_.write_timeout_ms;
    http_->set_write_timeout(static_cast<time_t>(wt / 1000), static_cast<time_t>((wt % 1000) * 1000));
    routes();
}

ApiServer::~ApiServer() { stop(); }

void ApiServer::routes() {
    auto& s = *http_;

    s.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 201, hub_.create(parse_body(req, true))); });
    });

    s.Get(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, hub_.snapshot(req.matches[1])); });
    });

    s.Delete(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const std::string id = req.matches[1];
            hub_.close(id);
            send_json(res, 200, Json{{"session_id", id}, {"closed", true}});
        });
    });

    s.Post(R"(/sessions/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const std::string id = req.matches[1];
            if (!hub_.exists(id)) throw NotFound("unknown session \"" + id + "\"");
            const auto r = hub_.ingest(id, parse_body(req, false));
            send_json(res, 200, Json{{"seq", r.seq}});
        });
    });

    s.Get(R"(/sessions/([^/]+)/log)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { res.set_content(hub_.export_log(req.matches[1]), "application/x-ndjson"); });
    });

    s.Get(R"(/sessions/([^/]+)/audio/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto clip = hub_.clip(req.matches[1], req.matches[2]);
            if (!clip) throw NotFound("unknown clip \"" + std::string(req.matches[2]) + "\"");
            res.set_content(clip->bytes, clip->mime);
        });
    });

    s.Get(R"(/sessions/([^/]+)/stream)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const std::string id = req.matches[1];
            if (!hub_.exists(id)) throw NotFound("unknown session \"" + id + "\"");
            std::uint64_t from = 0;
            const std::string resume =
                req.has_param("from_seq") ? req.get_param_value("from_seq") : req.get_header_value("Last-Event-ID");
            if (!resume.empty()) {
                const auto v = parse_seq(resume);
                if (!v) throw ValidationError("from_seq", "must be a non-negative integer");
                from = *v;
            }
            auto next = std::make_shared<std::uint64_t>(from);
            res.set_header("Cache-Control", "no-cache");
            res.set_chunked_content_provider("text/event-stream", [this, id, next](std::size_t, httplib::DataSink& sink) {
                SessionHub::Batch batch;
                try {
                    batch = hub_.wait_events(id, *next, config_.heartbeat_ms);
                } catch (const NotFound&) {
                    return false;
                }
                if (batch.events.empty() && batch.timed_out) {
                    const std::string hb = hb_frame(batch.last_seq);
                    return sink.write(hb.data(), hb.size());
                }
                for (const auto& ev : batch.events) {
                    const std::string frame = sse_frame(ev);
                    if (!sink.write(frame.data(), frame.size())) return false;
                    *next = ev.seq;
                }
                if (batch.closed && *next >= batch.last_seq) sink.done();
                return true;
            });
        });
    });

    s.Get("/manifest", [this](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, to_json(manifest_));
    });

    if (!config_.asset_dir.empty() && fs::is_directory(config_.asset_dir)) {
        s.set_mount_point("/assets", config_.asset_dir.string());
    }
}

int ApiServer::start() {
    if (config_.port == 0) {
        port_ = http_->bind_to_any_port(config_.host);
        if (port_ <= 0) throw Error("cannot bind " + config_.host);
    } else {
        if (!http_->bind_to_port(config_.host, config_.port)) {
            throw Error("cannot bind " + config_.host + ":" + std::to_string(config_.port));
        }
        port_ = config_.port;
    }
    listener_ = std::thread([this] { http_->listen_after_bind(); });
    ticker_ = std::thread([this] { ticker(); });
    http_->wait_until_ready();
    return port_;
}

void ApiServer::ticker() {
    std::int64_t last_persist = hub_.now();
    std::unique_lock lock(stop_mu_);
    while (!stopped_) {
        stop_cv_.wait_for(lock, std::chrono::milliseconds(config_.tick_ms));
        if (stopped_) break;
        lock.unlock();
        hub_.tick_all();
        if (hub_.now() - last_persist >= config_.persist_interval_ms) {
            hub_.persist_all();
            last_persist = hub_.now();
        }
        lock.lock();
    }
}

void ApiServer::stop() {
    {
        std::lock_guard lock(stop_mu_);
        if (stopped_ && !listener_.joinable() && !ticker_.joinable()) return;
        stopped_ = true;
    }
    stop_cv_.notify_all();
    hub_.shutdown();
    http_->stop();
    if (listener_.joinable()) listener_.join();
    if (ticker_.joinable()) ticker_.join();
    hub_.persist_all();
}

void ApiServer::wait() {
    std::unique_lock lock(stop_mu_);
    stop_cv_.wait(lock, [this] { return stopped_; });
}

} // namespace costudy
