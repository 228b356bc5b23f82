#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "homoglyph/pairs.hpp"
#include "homoglyph/render.hpp"
#include "homoglyph/rng.hpp"

namespace homoglyph {

/// Source grapheme sequence (1-2 codepoints) and its visually similar
/// replacements.
struct ConfusableEntry {
  std::u32string source;
  std::vector<std::u32string> replacements;
};

struct ConfusableMatch {
  std::size_t position = 0;  // codepoint offset in the name
  std::size_t entry = 0;     // index into ConfusableTable::entries()
};

class ConfusableTable {
 public:
  ConfusableTable() = default;
  explicit ConfusableTable(std::vector<ConfusableEntry> entries);

  /// Parses UTF-8 TSV `source<TAB>replacement`; '#' starts a comment line.
  /// Rows sharing a source are merged in file order. Throws FormatError on a
  /// malformed row or an entry mapping a sequence to itself.
  static ConfusableTable parse_tsv(std::string_view text);
  static ConfusableTable load(const std::filesystem::path& path);
  /// data/confusables.tsv.
  static ConfusableTable bundled();

  std::string to_tsv() const;

  const std::vector<ConfusableEntry>& entries() const { return entries_; }
  std::size_t pair_count() const;

  /// Every (position, entry) whose source occurs in `name`.
  std::vector<ConfusableMatch> matches(std::u32string_view name) const;

  /// Replacements whose codepoints the atlas cannot draw.
  std::vector<std::u32string> unrenderable(const GlyphAtlas& atlas) const;

 private:
  std::vector<ConfusableEntry> entries_;
};

/// Applies between 1 and max_edits (uniformly drawn) non-overlapping
/// confusable substitutions at random positions. The result always differs
/// from `name`. Throws NoSubstitutionPossible when no table entry matches.
std::u32string generate_spoof(std::u32string_view name, const ConfusableTable& table, Rng& rng,
                              int max_edits);

/// Replaces every occurrence of one character shared by `a` and `b` with the
/// same non-ASCII confusable, leaving the pair's differences intact. Returns
/// false when no such character exists.
bool apply_shared_unicode_substitution(std::u32string& a, std::u32string& b,
                                       const ConfusableTable& table, Rng& rng);

/// Benign (label 1) pairs. With max_distance set: every unordered pair with
/// 1 <= levenshtein <= max_distance, ordered by (i, j). Without: `sample_count`
/// random distinct unordered pairs drawn with `rng`.
PairList mine_benign_pairs(const std::vector<std::u32string>& names,
                           std::optional<std::size_t> max_distance, std::size_t sample_count = 0,
                           Rng* rng = nullptr);
PairList mine_benign_pairs(const std::vector<std::string>& names,
                           std::optional<std::size_t> max_distance, std::size_t sample_count = 0,
                           Rng* rng = nullptr);

enum class DatasetMode { process, domain };

DatasetMode parse_mode(std::string_view text);
std::string_view to_string(DatasetMode mode);

struct DatasetConfig {
  std::uint64_t seed = 20171103;
  double train_ratio = 0.70;
  double val_ratio = 0.15;
  double test_ratio = 0.15;
  /// Benign filter for process mode.
  std::size_t max_distance = 3;
  /// Upper bound on substitutions per generated spoof; 0 picks the mode
  /// default (3 for process names, 8 for domains).
  int max_edits = 0;
  /// Spoof pairs generated per benign pair.
  double spoof_ratio = 1.0;
  /// Domain mode: number of random benign pairs; 0 means 5 per name.
  std::size_t domain_benign_pairs = 0;
  /// Share of benign pairs rewritten with a shared non-ASCII confusable.
  double unicode_benign_fraction = 0.25;
  /// Process mode: minimum stem length (file name without extension).
  std::size_t min_stem_length = 4;
};

struct DatasetSplit {
  PairList train;
  PairList validation;
  PairList test;
  std::uint64_t seed = 0;

  std::size_t total() const { return train.size() + validation.size() + test.size(); }
  bool operator==(const DatasetSplit&) const = default;
};

/// Names kept by build_dataset: trimmed, deduplicated, renderable, and in
/// process mode restricted to .exe/.dll files with a long enough stem.
std::vector<std::u32string> filter_names(const std::vector<std::string>& names, DatasetMode mode,
                                         const DatasetConfig& cfg, const GlyphAtlas& atlas);

/// Mines benign pairs, generates spoof pairs, and splits them 70/15/15 so
/// that no base name contributes pairs to more than one split. Throws
/// InsufficientNames when a split would lack either label.
DatasetSplit build_dataset(const std::vector<std::string>& names, DatasetMode mode,
                           const DatasetConfig& cfg, const ConfusableTable& table,
                           const GlyphAtlas& atlas);

/// Fraction of label-1 pairs containing a non-ASCII character.
double non_ascii_benign_fraction(const PairList& pairs);

// File formats.
std::vector<std::string> read_name_list(const std::filesystem::path& path);
void write_name_list(const std::filesystem::path& path, const std::vector<std::string>& names);
/// UTF-8 TSV `s1<TAB>s2<TAB>label`, no header.
std::string pairs_to_tsv(const PairList& pairs);
PairList parse_pairs_tsv(std::string_view text);
void write_pairs(const std::filesystem::path& path, const PairList& pairs);
PairList read_pairs(const std::filesystem::path& path);

/// Synthetic name lists standing in for external corpora.
std::vector<std::string> synthesize_process_names(std::size_t count, std::uint64_t seed);
std::vector<std::string> synthesize_domain_names(std::size_t count, std::uint64_t seed);

}  // namespace homoglyph
