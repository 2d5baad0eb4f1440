#include "costudy/http_provider.hpp"

#include "costudy/audio.hpp"
#include "costudy/encoding.hpp"
#include "costudy/errors.hpp"
#include "costudy/stub_provider.hpp"
#include "costudy/text.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace costudy {

namespace {

std::string extension_for(std::string_view mime) {
    if (mime.find("wav") != std::string_view::npos) return "wav";
    if (mime.find("webm") != std::string_view::npos) return "webm";
    if (mime.find("ogg") != std::string_view::npos) return "ogg";
    if (mime.find("mpeg") != std::string_view::npos || mime.find("mp3") != std::string_view::npos) return "mp3";
    if (mime.find("mp4") != std::string_view::npos || mime.find("m4a") != std::string_view::npos) return "m4a";
    return "wav";
}

// Fault message from an error body, if it has the usual {"error":{"message"}} shape.
std::string error_detail(const std::string& body) {
    const auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_object() && j.contains("error") && j["error"].is_object() && j["error"].contains("message") &&
        j["error"]["message"].is_string()) {
        return ": " + j["error"]["message"].get<std::string>();
    }
    return {};
}

} // namespace

HttpProvider::HttpProvider(ProviderConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleeper_(std::move(sleeper)) {
    config_.validate();
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (!key || !*key) {
        throw ConfigError("provider: environment variable " + config_.api_key_env + " is not set");
    }
    api_key_ = key;

    const auto scheme_end = config_.base_url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("provider.base_url: expected scheme://host[:port][/path]");
    const auto path_at = config_.base_url.find('/', scheme_end + 3);
    origin_ = config_.base_url.substr(0, path_at);
    path_prefix_ = path_at == std::string::npos ? std::string() : config_.base_url.substr(path_at);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();

    if (!sleeper_) {
        sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    }
}

std::string HttpProvider::scrub(std::string message) const {
    if (api_key_.empty()) return message;
    for (auto at = message.find(api_key_); at != std::string::npos; at = message.find(api_key_, at)) {
        message.replace(at, api_key_.size(), "[redacted]");
    }
    return message;
}

template <class Attempt>
HttpProvider::Response HttpProvider::with_retry(std::string_view op, Attempt&& attempt) {
    std::string last_error;
    const int max_attempts = config_.retry.max_attempts;
    for (int n = 1; n <= max_attempts; ++n) {
        ++attempts_;
        httplib::Client client(origin_);
        const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);
        client.set_bearer_token_auth(api_key_);

        httplib::Result res = attempt(client);
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
        } else if (res->status >= 200 && res->status < 300) {
            return Response{res->status, res->body};
        } else if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status) + error_detail(res->body);
        } else {
            throw ProviderError(scrub(std::string(op) + ": HTTP " + std::to_string(res->status) + error_detail(res->body)),
                                false);
        }
        if (n < max_attempts && config_.retry.backoff_ms > 0) {
            sleeper_(std::chrono::milliseconds(config_.retry.backoff_ms << (n - 1)));
        }
    }
    throw ProviderError(scrub(std::string(op) + ": giving up after " + std::to_string(max_attempts) +
                              " attempts: " + last_error),
                        false);
}

Json HttpProvider::chat_payload(const ChatRequest& request, const ModelIds& models) {
    Json messages = Json::array();
    messages.push_back(Json{{"role", "system"}, {"content", request.system_prompt}});
    for (const auto& turn : request.messages) {
        Json msg{{"role", to_string(turn.role)}};
        if (turn.image) {
            Json parts = Json::array();
            parts.push_back(Json{{"type", "text"}, {"text", turn.text}});
            parts.push_back(Json{
                {"type", "image_url"},
                {"image_url", Json{{"url", "data:" + turn.image->mime + ";base64," + base64_encode(turn.image->bytes)}}}});
            msg["content"] = std::move(parts);
        } else {
            msg["content"] = turn.text;
        }
        messages.push_back(std::move(msg));
    }
    return Json{{"model", models.chat},
                {"temperature", request.temperature},
                {"max_tokens", request.max_reply_tokens},
                {"messages", std::move(messages)}};
}

Json HttpProvider::speech_payload(std::string_view text, std::string_view voice_id, const ModelIds& models) {
    return Json{{"model", models.tts}, {"input", text}, {"voice", voice_id}, {"response_format", "wav"}};
}

std::string HttpProvider::complete(const ChatRequest& request) {
    request.validate();
    const std::string body = chat_payload(request, config_.models).dump();
    const auto res = with_retry("complete", [&](httplib::Client& c) {
        return c.Post(path_prefix_ + "/chat/completions", body, "application/json");
    });
    const auto j = nlohmann::json::parse(res.body, nullptr, false);
    if (!j.is_object() || !j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
        throw ProviderError("complete: malformed response", false);
    }
    const auto& message = j["choices"][0]["message"];
    if (!message.is_object() || !message.contains("content") || !message["content"].is_string()) {
        throw ProviderError("complete: response has no message content", false);
    }
    return message["content"].get<std::string>();
}

std::string HttpProvider::transcribe(std::string_view audio, std::string_view mime) {
    if (audio.empty()) throw ProviderError("transcribe: empty audio", false);
    const std::string file(audio);
    const std::string content_type = mime.empty() ? std::string("audio/wav") : std::string(mime);
    const httplib::MultipartFormDataItems items{
        {"file", file, "audio." + extension_for(content_type), content_type},
        {"model", config_.models.stt, "", ""},
        {"response_format", "json", "", ""},
    };
    const auto res = with_retry("transcribe", [&](httplib::Client& c) {
        return c.Post(path_prefix_ + "/audio/transcriptions", items);
    });
    const auto j = nlohmann::json::parse(res.body, nullptr, false);
    if (!j.is_object() || !j.contains("text") || !j["text"].is_string()) {
        throw ProviderError("transcribe: malformed response", false);
    }
    return j["text"].get<std::string>();
}

SpeechClip HttpProvider::synthesize(std::string_view text, std::string_view voice_id) {
    if (trim(text).empty()) throw ProviderError("synthesize: empty text", false);
    const auto& known = default_voices();
    if (std::find(known.begin(), known.end(), voice_id) == known.end()) {
        throw ProviderError("synthesize: unknown voice \"" + std::string(voice_id) + "\"", false);
    }
    const std::string body = speech_payload(text, voice_id, config_.models).dump();
    auto res = with_retry("synthesize", [&](httplib::Client& c) {
        return c.Post(path_prefix_ + "/audio/speech", body, "application/json");
    });

    SpeechClip clip;
    clip.mime = "audio/wav";
    clip.voice_id = std::string(voice_id);
    clip.duration_ms = wav_duration_ms(res.body).value_or(static_cast<std::int64_t>(
        std::llround(static_cast<double>(count_words(text)) / StubProvider::kWordsPerSecond * 1000.0)));
    clip.bytes = std::move(res.body);
    return clip;
}

} // namespace costudy
