#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace folio::text {

// Splits on ASCII whitespace; never yields empty tokens.
std::vector<std::string_view> split_whitespace(std::string_view s);

std::size_t count_units(std::string_view s);

std::string join(const std::vector<std::string_view>& tokens, std::string_view sep = " ");

std::string_view trim(std::string_view s);

std::string to_lower_ascii(std::string_view s);

// Lowercase, drop ASCII punctuation, collapse whitespace.
std::string normalize_answer(std::string_view s);

}  // namespace folio::text
