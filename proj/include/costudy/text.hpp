#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace costudy {

std::string trim(std::string_view s);

// Whitespace-separated words.
std::size_t count_words(std::string_view s);

// Provider-independent token estimate: ceil(words * 4 / 3).
std::int64_t estimate_tokens(std::string_view s);

// Longest prefix of whole words whose estimate fits the budget, with
// whitespace runs collapsed to single spaces.
std::string truncate_to_tokens(std::string_view s, std::int64_t budget);

} // namespace costudy
