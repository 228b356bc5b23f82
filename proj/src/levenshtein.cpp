#include "homoglyph/levenshtein.hpp"

#include <algorithm>
#include <vector>

#include "homoglyph/utf8.hpp"

namespace homoglyph {

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({up + 1, row[j - 1] + 1, sub});
      diag = up;
    }
  }
  return row[b.size()];
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  return levenshtein(std::u32string_view(utf8_decode(a)), std::u32string_view(utf8_decode(b)));
}

std::size_t bounded_levenshtein(std::u32string_view a, std::u32string_view b,
                                std::size_t max_distance) {
  if (a.size() < b.size()) std::swap(a, b);
  const std::size_t over = max_distance + 1;
  if (a.size() - b.size() > max_distance) return over;

  // Only cells with |i - j| <= max_distance can hold values <= max_distance.
  std::vector<std::size_t> row(b.size() + 1, over);
  for (std::size_t j = 0; j <= std::min(b.size(), max_distance); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    const std::size_t lo = i > max_distance ? i - max_distance : 1;
    const std::size_t hi = std::min(b.size(), i + max_distance);
    std::size_t diag = row[lo - 1];
    row[lo - 1] = (lo == 1 && i <= max_distance) ? i : over;
    std::size_t row_min = row[lo - 1];
    for (std::size_t j = lo; j <= hi; ++j) {
      const std::size_t up = row[j];
      const std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      const std::size_t v = std::min({up + 1, row[j - 1] + 1, sub, over});
      diag = up;
      row[j] = v;
      row_min = std::min(row_min, v);
    }
    if (hi < b.size()) row[hi + 1] = over;
    if (row_min > max_distance) return over;
  }
  return std::min(row[b.size()], over);
}

}  // namespace homoglyph
