#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace toolqa::strings {

std::string_view trim(std::string_view s);

// ASCII case fold; non-ASCII bytes pass through.
std::string to_lower(std::string_view s);

bool iequals(std::string_view a, std::string_view b);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Collapses runs of ASCII whitespace to one space.
std::string collapse_spaces(std::string_view s);

// Number of UTF-8 code points (invalid bytes count as one each).
std::size_t utf8_length(std::string_view s);

bool is_valid_utf8(std::string_view s);

std::string latin1_to_utf8(std::string_view s);

}  // namespace toolqa::strings
