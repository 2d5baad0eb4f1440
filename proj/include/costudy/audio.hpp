#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace costudy {

enum class AudioFormat { unknown, wav, ogg, webm, mp3, mp4 };

std::string_view to_string(AudioFormat f);

// Recognizes the container from its magic bytes.
AudioFormat sniff_audio(std::string_view bytes);

// Mono 8-bit PCM silence of the given length. When text is set it is stored
// in a "txt " chunk, which the stub transcriber reads back.
std::string make_wav(std::int64_t duration_ms, std::uint32_t sample_rate = 1000,
                     std::optional<std::string_view> text = std::nullopt);

std::optional<std::int64_t> wav_duration_ms(std::string_view bytes);
std::optional<std::string> wav_text(std::string_view bytes);

} // namespace costudy
