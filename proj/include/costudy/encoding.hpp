#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace costudy {

std::string base64_encode(std::string_view bytes);

// nullopt when the input is not valid padded base64.
std::optional<std::string> base64_decode(std::string_view text);

// First 16 hex chars of the SHA-256 of bytes.
std::string short_digest(std::string_view bytes);

} // namespace costudy
