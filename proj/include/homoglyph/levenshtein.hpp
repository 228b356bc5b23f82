#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace homoglyph {

/// Unit-cost insert/delete/substitute edit distance over Unicode scalar values.
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);
/// UTF-8 convenience overload; decodes both strings first.
std::size_t levenshtein(std::string_view a, std::string_view b);

/// levenshtein(a, b) when it is <= max_distance, otherwise max_distance + 1.
/// Runs in O(max_distance * min(|a|, |b|)).
std::size_t bounded_levenshtein(std::u32string_view a, std::u32string_view b,
                                std::size_t max_distance);

}  // namespace homoglyph
