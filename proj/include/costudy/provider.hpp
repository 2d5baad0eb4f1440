#pragma once

#include "costudy/json.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

namespace costudy {

enum class Role { system, assistant, user };

std::string_view to_string(Role role);

// What the completion is for. Real backends only see the prompts; the stub
// uses it to produce contract-shaped output offline.
enum class Purpose { reply, summary, notes, profile };

struct Image {
    std::string bytes;
    std::string mime = "image/png";
};

struct ChatTurn {
    Role role = Role::user;
    std::string text;
    std::optional<Image> image;
};

struct ChatRequest {
    std::string system_prompt;
    std::vector<ChatTurn> messages;
    double temperature = 0.9;
    int max_reply_tokens = 300;
    Purpose purpose = Purpose::reply;

    // Needs at least one user turn and temperature in [0, 2]. Throws ValidationError.
    void validate() const;
    const ChatTurn* last_user_turn() const;
};

struct SpeechClip {
    std::string bytes;
    std::string mime = "audio/wav";
    std::int64_t duration_ms = 0;
    std::string voice_id;
};

// Chat/vision completion, speech-to-text and text-to-speech behind one
// interface. Implementations are safe to call from several threads.
// Failures throw ProviderError; retryable() tells transient from permanent.
class Provider {
public:
    virtual ~Provider() = default;

    virtual std::string complete(const ChatRequest& request) = 0;
    virtual std::string transcribe(std::string_view audio, std::string_view mime) = 0;
    virtual SpeechClip synthesize(std::string_view text, std::string_view voice_id) = 0;
    virtual std::vector<std::string> voices() const = 0;

    // False when replies must be consumed in request order, which keeps
    // stub-backed sessions reproducible.
    virtual bool concurrent() const { return true; }
};

enum class Backend { http, stub };

struct ModelIds {
    std::string chat = "gpt-4-vision-preview";
    std::string stt = "whisper-1";
    std::string tts = "tts-1";
};

struct RetryPolicy {
    int max_attempts = 3;
    std::int64_t backoff_ms = 500;
};

struct ProviderConfig {
    Backend backend = Backend::stub;
    std::string base_url;
    // Name of the environment variable holding the key; the key itself is
    // never part of a config document.
    std::string api_key_env = "OPENAI_API_KEY";
    ModelIds models;
    std::int64_t timeout_ms = 60'000;
    RetryPolicy retry;
    double temperature = 0.9;
    int max_reply_tokens = 300;
    std::uint64_t seed = 0;
    int max_in_flight = 4;

    void validate() const;
};

// The six voices of the speech backend; stub and http share them.
const std::vector<std::string>& default_voices();

// Caps concurrent calls into an inner provider.
class BoundedProvider final : public Provider {
public:
    BoundedProvider(std::shared_ptr<Provider> inner, int max_in_flight);

    std::string complete(const ChatRequest& request) override;
    std::string transcribe(std::string_view audio, std::string_view mime) override;
    SpeechClip synthesize(std::string_view text, std::string_view voice_id) override;
    std::vector<std::string> voices() const override { return inner_->voices(); }
    bool concurrent() const override { return inner_->concurrent(); }

private:
    std::shared_ptr<Provider> inner_;
    std::counting_semaphore<256> slots_;
};

// Builds the configured backend wrapped in a BoundedProvider.
std::shared_ptr<Provider> make_provider(const ProviderConfig& config);

} // namespace costudy
