#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace esgpv {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

// Lowercased alphanumeric runs; punctuation splits tokens ("net-zero"
// becomes "net", "zero"; "15%" becomes "15"). Bytes >= 0x80 are kept so
// UTF-8 words survive intact.
std::vector<std::string> word_tokens(std::string_view text);

// True when the token is a calendar year in [1900, 2099].
bool is_year_token(std::string_view token);

} // namespace esgpv
