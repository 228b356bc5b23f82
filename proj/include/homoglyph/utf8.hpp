#pragma once

#include <string>
#include <string_view>

namespace homoglyph {

/// Decodes UTF-8 into Unicode scalar values. Malformed sequences decode to
/// U+FFFD so that arbitrary byte input never throws.
std::u32string utf8_decode(std::string_view bytes);

std::string utf8_encode(std::u32string_view text);

bool is_ascii(std::u32string_view text);

/// Strips trailing ASCII whitespace (space, tab, CR, LF, VT, FF).
std::u32string_view rstrip(std::u32string_view text);

}  // namespace homoglyph
