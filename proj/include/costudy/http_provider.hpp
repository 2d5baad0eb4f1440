#pragma once

#include "costudy/provider.hpp"

#include <atomic>
#include <chrono>
#include <functional>

namespace costudy {

// Chat-completions style JSON backend. See docs/provider-http.md for the
// request and response shapes.
//
// Transport errors, timeouts, 429 and 5xx are retried up to
// retry.max_attempts with backoff_ms doubling per attempt; other non-2xx
// answers fail at once. The key is read from the environment variable
// named in the config and is scrubbed from every error message.
class HttpProvider final : public Provider {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    explicit HttpProvider(ProviderConfig config, Sleeper sleeper = {});

    std::string complete(const ChatRequest& request) override;
    std::string transcribe(std::string_view audio, std::string_view mime) override;
    SpeechClip synthesize(std::string_view text, std::string_view voice_id) override;
    std::vector<std::string> voices() const override { return default_voices(); }

    // Transport attempts made so far, across all calls.
    std::uint64_t attempts() const noexcept { return attempts_.load(); }

    // Request bodies, exposed for fixture tests.
    static Json chat_payload(const ChatRequest& request, const ModelIds& models);
    static Json speech_payload(std::string_view text, std::string_view voice_id, const ModelIds& models);

private:
    struct Response {
        int status = 0;
        std::string body;
    };

    template <class Attempt>
    Response with_retry(std::string_view op, Attempt&& attempt);
    std::string scrub(std::string message) const;

    ProviderConfig config_;
    std::string api_key_;
    std::string origin_;
    std::string path_prefix_;
    Sleeper sleeper_;
    std::atomic<std::uint64_t> attempts_{0};
};

} // namespace costudy
