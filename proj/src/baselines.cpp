#include "homoglyph/baselines.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <unordered_map>

#include "homoglyph/errors.hpp"
#include "homoglyph/levenshtein.hpp"
#include "homoglyph/pipeline.hpp"
#include "homoglyph/utf8.hpp"

namespace homoglyph {

double glyph_jaccard(const GlyphBitmap& a, const GlyphBitmap& b) {
  const int width = std::max(a.width, b.width);
  int inter = 0, uni = 0;
  for (int r = 0; r < kGlyphHeight; ++r) {
    for (int c = 0; c < width; ++c) {
      const bool pa = c < a.width && a.at(r, c);
      const bool pb = c < b.width && b.at(r, c);
      inter += pa && pb;
      uni += pa || pb;
    }
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
}

CharSimilarityTable CharSimilarityTable::build(const GlyphAtlas& atlas, std::vector<char32_t> codepoints) {
  std::sort(codepoints.begin(), codepoints.end());
  codepoints.erase(std::unique(codepoints.begin(), codepoints.end()), codepoints.end());
  for (char32_t cp : codepoints) {
    if (!atlas.has_glyph(cp)) {
      throw UnrenderableCodepoint("no glyph for U+" + [&] {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04X", static_cast<unsigned>(cp));
        return std::string(buf);
      }());
    }
  }
  CharSimilarityTable t;
  t.codepoints_ = std::move(codepoints);
  const std::size_t n = t.codepoints_.size();
  t.sim_.assign(n * n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const GlyphBitmap& gi = atlas.glyph(t.codepoints_[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = glyph_jaccard(gi, atlas.glyph(t.codepoints_[j]));
      t.sim_[i * n + j] = s;
      t.sim_[j * n + i] = s;
    }
  }
  return t;
}

bool CharSimilarityTable::contains(char32_t cp) const {
  return std::binary_search(codepoints_.begin(), codepoints_.end(), cp);
}

std::size_t CharSimilarityTable::slot(char32_t cp) const {
  const auto it = std::lower_bound(codepoints_.begin(), codepoints_.end(), cp);
  if (it == codepoints_.end() || *it != cp) {
    throw UnknownCharacter("character " + utf8_encode(std::u32string(1, cp)) + " is not in the similarity table");
  }
  return static_cast<std::size_t>(it - codepoints_.begin());
}

double CharSimilarityTable::similarity(char32_t a, char32_t b) const {
  return sim_[slot(a) * codepoints_.size() + slot(b)];
}

std::string CharSimilarityTable::to_tsv() const {
  std::string out = "a\tb\tsimilarity\n";
  char buf[32];
  const std::size_t n = codepoints_.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      std::snprintf(buf, sizeof buf, "%.6f", sim_[i * n + j]);
      out += utf8_encode(std::u32string(1, codepoints_[i])) + "\t" +
             utf8_encode(std::u32string(1, codepoints_[j])) + "\t" + buf + "\n";
    }
  }
  return out;
}

double visual_edit_distance(std::u32string_view a, std::u32string_view b, const CharSimilarityTable& table) {
  for (char32_t c : a) (void)table.similarity(c, c);
  for (char32_t c : b) (void)table.similarity(c, c);
  std::vector<double> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<double>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<double>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const double sub = a[i - 1] == b[j - 1] ? 0.0 : 1.0 - table.similarity(a[i - 1], b[j - 1]);
      cur[j] = std::min({prev[j] + 1.0, cur[j - 1] + 1.0, prev[j - 1] + sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double visual_edit_distance(std::string_view a, std::string_view b, const CharSimilarityTable& table) {
  return visual_edit_distance(utf8_decode(a), utf8_decode(b), table);
}

std::string_view to_string(Scorer scorer) {
  switch (scorer) {
    case Scorer::edit: return "edit";
    case Scorer::visual: return "visual";
    case Scorer::model: return "model";
  }
  return "unknown";
}

Scorer parse_scorer(std::string_view text) {
  if (text == "edit") return Scorer::edit;
  if (text == "visual") return Scorer::visual;
  if (text == "model") return Scorer::model;
  throw InvalidArgument("unknown scorer \"" + std::string(text) + "\" (expected edit, visual or model)");
}

CharSimilarityTable similarity_table_for(const PairList& pairs, const GlyphAtlas& atlas) {
  std::set<char32_t> cps;
  for (const auto& p : pairs) {
    for (char32_t c : utf8_decode(p.s1)) cps.insert(c);
    for (char32_t c : utf8_decode(p.s2)) cps.insert(c);
  }
  return CharSimilarityTable::build(atlas, {cps.begin(), cps.end()});
}

std::vector<ScoredPair> score_pairs(const PairList& pairs, Scorer scorer, const ScoringContext& ctx) {
  std::vector<ScoredPair> out(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) out[i].label = pairs[i].label;

  switch (scorer) {
    case Scorer::edit:
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        out[i].score = static_cast<double>(levenshtein(pairs[i].s1, pairs[i].s2));
      }
      break;
    case Scorer::visual:
      if (!ctx.table) throw InvalidArgument("visual scorer needs a similarity table");
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        out[i].score = visual_edit_distance(pairs[i].s1, pairs[i].s2, *ctx.table);
      }
      break;
    case Scorer::model: {
      if (!ctx.model || !ctx.atlas) throw InvalidArgument("model scorer needs a model and an atlas");
      // Embed each distinct string once.
      std::vector<std::string> distinct;
      std::unordered_map<std::string, std::size_t> slot;
      for (const auto& p : pairs) {
        for (const std::string* s : {&p.s1, &p.s2}) {
          if (slot.try_emplace(*s, distinct.size()).second) distinct.push_back(*s);
        }
      }
      const auto features = embed_names(*ctx.model, *ctx.atlas, distinct);
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        out[i].score = distance(features[slot.at(pairs[i].s1)], features[slot.at(pairs[i].s2)]);
      }
      break;
    }
  }
  return out;
}

}  // namespace homoglyph
