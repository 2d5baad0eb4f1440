#include "costudy/text.hpp"

#include <cctype>

namespace costudy {

namespace {

bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

} // namespace

std::string trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return std::string(s);
}

std::size_t count_words(std::string_view s) {
    std::size_t words = 0;
    bool in_word = false;
    for (char c : s) {
        const bool space = is_space(c);
        if (!space && !in_word) ++words;
        in_word = !space;
    }
    return words;
}

std::int64_t estimate_tokens(std::string_view s) {
    const auto words = static_cast<std::int64_t>(count_words(s));
    return (words * 4 + 2) / 3;
}

std::string truncate_to_tokens(std::string_view s, std::int64_t budget) {
    // ceil(w * 4 / 3) <= budget  <=>  w <= floor(budget * 3 / 4)
    const std::int64_t max_words = budget > 0 ? budget * 3 / 4 : 0;
    std::string out;
    std::int64_t words = 0;
    std::size_t i = 0;
    while (i < s.size() && words < max_words) {
        while (i < s.size() && is_space(s[i])) ++i;
        if (i == s.size()) break;
        const std::size_t start = i;
        while (i < s.size() && !is_space(s[i])) ++i;
        if (!out.empty()) out += ' ';
        out.append(s.substr(start, i - start));
        ++words;
    }
    return out;
}

} // namespace costudy
