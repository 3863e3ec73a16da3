#pragma once

#include <string>
#include <string_view>

namespace esgpv {

// Porter suffix-stripping stemmer over a lowercase ASCII word. Tokens with
// non-letter bytes are returned unchanged, so digit tokens pass through.
std::string porter_stem(std::string_view word);

} // namespace esgpv
