#include "costudy/provider.hpp"

#include "costudy/errors.hpp"
#include "costudy/http_provider.hpp"
#include "costudy/stub_provider.hpp"

#include <algorithm>

namespace costudy {

std::string_view to_string(Role role) {
    switch (role) {
    case Role::system: return "system";
    case Role::assistant: return "assistant";
    case Role::user: return "user";
    }
    return "user";
}

void ChatRequest::validate() const {
    if (!last_user_turn()) throw ValidationError("messages", "at least one user message is required");
    if (!(temperature >= 0.0 && temperature <= 2.0)) {
        throw ValidationError("temperature", "must be within [0, 2]");
    }
    if (max_reply_tokens <= 0) throw ValidationError("max_reply_tokens", "must be positive");
}

const ChatTurn* ChatRequest::last_user_turn() const {
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->role == Role::user) return &*it;
    }
    return nullptr;
}

void ProviderConfig::validate() const {
    if (backend == Backend::http) {
        if (base_url.empty()) throw ConfigError("provider.base_url: required for the http backend");
        if (api_key_env.empty()) throw ConfigError("provider.api_key_env: required for the http backend");
    }
    if (!(temperature >= 0.0 && temperature <= 2.0)) throw ConfigError("provider.temperature: must be within [0, 2]");
    if (max_reply_tokens <= 0) throw ConfigError("provider.max_reply_tokens: must be positive");
    if (retry.max_attempts < 1) throw ConfigError("provider.retry.max_attempts: must be at least 1");
    if (retry.backoff_ms < 0) throw ConfigError("provider.retry.backoff_ms: must be non-negative");
    if (timeout_ms <= 0) throw ConfigError("provider.timeout_ms: must be positive");
    if (max_in_flight < 1 || max_in_flight > 256) throw ConfigError("provider.max_in_flight: must be within [1, 256]");
}

const std::vector<std::string>& default_voices() {
    static const std::vector<std::string> voices{"alloy", "echo", "fable", "onyx", "nova", "shimmer"};
    return voices;
}

namespace {

class SlotGuard {
public:
    explicit SlotGuard(std::counting_semaphore<256>& s) : s_(s) { s_.acquire(); }
    ~SlotGuard() { s_.release(); }
    SlotGuard(const SlotGuard&) = delete;
    SlotGuard& operator=(const SlotGuard&) = delete;

private:
    std::counting_semaphore<256>& s_;
};

} // namespace

BoundedProvider::BoundedProvider(std::shared_ptr<Provider> inner, int max_in_flight)
    : inner_(std::move(inner)), slots_(std::clamp(max_in_flight, 1, 256)) {}

std::string BoundedProvider::complete(const ChatRequest& request) {
    SlotGuard guard(slots_);
    return inner_->complete(request);
}

std::string BoundedProvider::transcribe(std::string_view audio, std::string_view mime) {
    SlotGuard guard(slots_);
    return inner_->transcribe(audio, mime);
}

SpeechClip BoundedProvider::synthesize(std::string_view text, std::string_view voice_id) {
    SlotGuard guard(slots_);
    return inner_->synthesize(text, voice_id);
}

std::shared_ptr<Provider> make_provider(const ProviderConfig& config) {
    config.validate();
    std::shared_ptr<Provider> inner;
    if (config.backend == Backend::stub) {
        inner = std::make_shared<StubProvider>(config.seed);
    } else {
        inner = std::make_shared<HttpProvider>(config);
    }
    return std::make_shared<BoundedProvider>(std::move(inner), config.max_in_flight);
}

} // namespace costudy
