#include "costudy/audio.hpp"


namespace costudy {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
}

std::uint32_t get_u32(std::string_view s, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[at + i]);
    return v;
}

struct Chunk {
    std::string_view id;
    std::string_view body;
};

// Walks RIFF chunks; calls fn for each until it returns true.
template <class Fn>
bool each_chunk(std::string_view bytes, Fn&& fn) {
    if (sniff_audio(bytes) != AudioFormat::wav) return false;
    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const auto id = bytes.substr(pos, 4);
        std::size_t size = get_u32(bytes, pos + 4);
        if (pos + 8 + size > bytes.size()) {
            // Streamed WAVs leave the data size unset; take what is there.
            if (id != "data") return false;
            size = bytes.size() - pos - 8;
        }
        if (fn(Chunk{id, bytes.substr(pos + 8, size)})) return true;
        pos += 8 + size + (size & 1);
    }
    return false;
}

} // namespace

std::string_view to_string(AudioFormat f) {
    switch (f) {
    case AudioFormat::wav: return "wav";
    case AudioFormat::ogg: return "ogg";
    case AudioFormat::webm: return "webm";
    case AudioFormat::mp3: return "mp3";
    case AudioFormat::mp4: return "mp4";
    case AudioFormat::unknown: break;
    }
    return "unknown";
}

AudioFormat sniff_audio(std::string_view b) {
    if (b.size() >= 12 && b.substr(0, 4) == "RIFF" && b.substr(8, 4) == "WAVE") return AudioFormat::wav;
    if (b.size() >= 4 && b.substr(0, 4) == "OggS") return AudioFormat::ogg;
    if (b.size() >= 4 && b.substr(0, 4) == "\x1A\x45\xDF\xA3") return AudioFormat::webm;
    if (b.size() >= 3 && b.substr(0, 3) == "ID3") return AudioFormat::mp3;
    if (b.size() >= 2 && static_cast<unsigned char>(b[0]) == 0xFF &&
        (static_cast<unsigned char>(b[1]) & 0xE0) == 0xE0) {
        return AudioFormat::mp3;
    }
    if (b.size() >= 8 && b.substr(4, 4) == "ftyp") return AudioFormat::mp4;
    return AudioFormat::unknown;
}

std::string make_wav(std::int64_t duration_ms, std::uint32_t sample_rate, std::optional<std::string_view> text) {
    const auto samples = static_cast<std::uint32_t>(duration_ms * sample_rate / 1000);
    std::string txt_chunk;
    if (text) {
        txt_chunk = "txt ";
        put_u32(txt_chunk, static_cast<std::uint32_t>(text->size()));
        txt_chunk.append(*text);
        if (text->size() & 1) txt_chunk.push_back('\0');
    }

    std::string out = "RIFF";
    put_u32(out, static_cast<std::uint32_t>(4 + (8 + 16) + txt_chunk.size() + 8 + samples + (samples & 1)));
    out += "WAVE";
    out += "fmt ";
    put_u32(out, 16);
    put_u16(out, 1);  // PCM
    put_u16(out, 1);  // mono
    put_u32(out, sample_rate);
    put_u32(out, sample_rate);  // byte rate
    put_u16(out, 1);  // block align
    put_u16(out, 8);  // bits per sample
    out += txt_chunk;
    out += "data";
    put_u32(out, samples);
    out.append(samples, static_cast<char>(0x80));
    if (samples & 1) out.push_back('\0');
    return out;
}

std::optional<std::int64_t> wav_duration_ms(std::string_view bytes) {
    std::uint32_t byte_rate = 0;
    std::optional<std::int64_t> duration;
    each_chunk(bytes, [&](const Chunk& c) {
        if (c.id == "fmt " && c.body.size() >= 16) {
            byte_rate = get_u32(c.body, 8);
        } else if (c.id == "data" && byte_rate > 0) {
            duration = static_cast<std::int64_t>(c.body.size()) * 1000 / byte_rate;
            return true;
        }
        return false;
    });
    return duration;
}

std::optional<std::string> wav_text(std::string_view bytes) {
    std::optional<std::string> text;
    each_chunk(bytes, [&](const Chunk& c) {
        if (c.id == "txt ") {
            text = std::string(c.body);
            return true;
        }
        return false;
    });
    return text;
}

} // namespace costudy
