#pragma once

#include "costudy/audio.hpp"
#include "costudy/config.hpp"
#include "costudy/json.hpp"

#include <httplib.h>

#include <filesystem>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace costudy::test {

inline Json fixture(const std::string& name) {
    return Json::parse(read_file(std::filesystem::path(COSTUDY_FIXTURE_DIR) / name));
}

// Local stand-in for the hosted API. Responds from a status script, then 200.
class FakeApi {
public:
    FakeApi() {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            record(req);
            if (fail(res)) return;
            res.set_content(fixture("chat_completion_response.json").dump(), "application/json");
        });
        server_.Post("/v1/audio/transcriptions", [this](const httplib::Request& req, httplib::Response& res) {
            record(req);
            {
                std::lock_guard lock(mu_);
                has_file_ = req.has_file("file") && req.get_file_value("file").content.size() > 44;
                model_field_ = req.has_file("model") ? req.get_file_value("model").content : "";
            }
            if (fail(res)) return;
            res.set_content(fixture("transcription_response.json").dump(), "application/json");
        });
        server_.Post("/v1/audio/speech", [this](const httplib::Request& req, httplib::Response& res) {
            record(req);
            if (fail(res)) return;
            res.set_content(make_wav(3200), "audio/wav");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeApi() {
        server_.stop();
        thread_.join();
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

    void script(std::vector<int> statuses, std::string error_body = "") {
        std::lock_guard lock(mu_);
        statuses_ = std::move(statuses);
        error_body_ = std::move(error_body);
    }
    int hits() {
        std::lock_guard lock(mu_);
        return hits_;
    }
    std::string last_body() {
        std::lock_guard lock(mu_);
        return last_body_;
    }
    std::string last_auth() {
        std::lock_guard lock(mu_);
        return last_auth_;
    }
    bool has_file() {
        std::lock_guard lock(mu_);
        return has_file_;
    }
    std::string model_field() {
        std::lock_guard lock(mu_);
        return model_field_;
    }

private:
    void record(const httplib::Request& req) {
        std::lock_guard lock(mu_);
        ++hits_;
        last_body_ = req.body;
        last_auth_ = req.get_header_value("Authorization");
    }
    bool fail(httplib::Response& res) {
        std::lock_guard lock(mu_);
        if (statuses_.empty()) return false;
        res.status = statuses_.front();
        statuses_.erase(statuses_.begin());
        res.set_content(error_body_, "application/json");
        return true;
    }

    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::mutex mu_;
    std::vector<int> statuses_;
    std::string error_body_;
    int hits_ = 0;
    std::string last_body_;
    std::string last_auth_;
    bool has_file_ = false;
    std::string model_field_;
};

} // namespace costudy::test
