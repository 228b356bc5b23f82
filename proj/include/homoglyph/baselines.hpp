#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "homoglyph/model_io.hpp"
#include "homoglyph/pairs.hpp"
#include "homoglyph/render.hpp"

namespace homoglyph {

/// Pairwise glyph similarity derived from the atlas: pixel-overlap Jaccard of
/// two glyph bitmaps placed at the same pen position and baseline. Two blank
/// glyphs (e.g. space) count as identical.
class CharSimilarityTable {
 public:
  CharSimilarityTable() = default;

  /// Throws UnrenderableCodepoint for a codepoint the atlas lacks.
  static CharSimilarityTable build(const GlyphAtlas& atlas, std::vector<char32_t> codepoints);

  bool contains(char32_t cp) const;
  /// Throws UnknownCharacter when either codepoint is missing.
  double similarity(char32_t a, char32_t b) const;

  const std::vector<char32_t>& codepoints() const { return codepoints_; }

  /// `a<TAB>b<TAB>similarity` for every unordered pair a <= b, header row first.
  std::string to_tsv() const;

 private:
  std::size_t slot(char32_t cp) const;

  std::vector<char32_t> codepoints_;  // sorted
  std::vector<double> sim_;           // n x n, symmetric
};

/// Pixel-overlap Jaccard of two glyph bitmaps.
double glyph_jaccard(const GlyphBitmap& a, const GlyphBitmap& b);

/// Levenshtein with substitution cost 1 - similarity; insert/delete cost 1.
double visual_edit_distance(std::u32string_view a, std::u32string_view b,
                            const CharSimilarityTable& table);
double visual_edit_distance(std::string_view a, std::string_view b, const CharSimilarityTable& table);

enum class Scorer { edit, visual, model };

std::string_view to_string(Scorer scorer);
Scorer parse_scorer(std::string_view text);

struct ScoredPair {
  double score = 0.0;
  int label = 0;
};

/// What the scorers need; `table` for visual, `model` for model.
struct ScoringContext {
  const GlyphAtlas* atlas = nullptr;
  const CharSimilarityTable* table = nullptr;
  const Model* model = nullptr;
};

/// One score per pair, in input order. Lower means more likely a spoof.
std::vector<ScoredPair> score_pairs(const PairList& pairs, Scorer scorer, const ScoringContext& ctx);

/// Similarity table over every codepoint that appears in `pairs`.
CharSimilarityTable similarity_table_for(const PairList& pairs, const GlyphAtlas& atlas);

}  // namespace homoglyph
