#include "homoglyph/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "homoglyph/errors.hpp"
#include "homoglyph/levenshtein.hpp"
#include "homoglyph/utf8.hpp"

namespace homoglyph {

namespace {

constexpr int kSpoofRetries = 16;

std::u32string_view strip(std::u32string_view s) {
  s = rstrip(s);
  while (!s.empty() && (s.front() == U' ' || s.front() == U'\t')) s.remove_prefix(1);
  return s;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    if (end == text.size()) break;
    start = end + 1;
  }
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
  if (!out) throw FormatError("write failed for " + path.string());
}

bool renderable(std::u32string_view s, const GlyphAtlas& atlas) {
  if (s.empty() || s.size() > static_cast<std::size_t>(kMaxGlyphs)) return false;
  for (char32_t cp : s) {
    if (!atlas.has_glyph(cp)) return false;
  }
  return atlas.fits(s);
}

char32_t ascii_lower(char32_t c) { return (c >= U'A' && c <= U'Z') ? c + 32 : c; }

bool has_process_extension(std::u32string_view s) {
  if (s.size() < 4) return false;
  std::u32string ext;
  for (char32_t c : s.substr(s.size() - 4)) ext.push_back(ascii_lower(c));
  return ext == U".exe" || ext == U".dll";
}

// Largest-remainder apportionment of `total` by `weights`.
std::vector<std::size_t> apportion(const std::vector<double>& weights, std::size_t total) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> out(weights.size());
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t used = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = weights[i] / sum * static_cast<double>(total);
    out[i] = static_cast<std::size_t>(std::floor(exact));
    used += out[i];
    rem.emplace_back(exact - static_cast<double>(out[i]), i);
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; used < total; ++k, ++used) ++out[rem[k % rem.size()].second];
  return out;
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

using IndexPair = std::pair<std::uint32_t, std::uint32_t>;

std::vector<IndexPair> mine_indices(const std::vector<std::u32string>& names, std::size_t max_d) {
  std::vector<IndexPair> out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    for (std::size_t j = i + 1; j < names.size(); ++j) {
      const std::size_t len_gap = names[i].size() > names[j].size() ? names[i].size() - names[j].size()
                                                                    : names[j].size() - names[i].size();
      if (len_gap > max_d) continue;
      const std::size_t d = bounded_levenshtein(names[i], names[j], max_d);
      if (d >= 1 && d <= max_d) out.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
    }
  }
  return out;
}

std::vector<IndexPair> sample_indices(const std::vector<std::uint32_t>& pool, std::size_t count,
                                      Rng& rng) {
  std::vector<IndexPair> out;
  if (pool.size() < 2) return out;
  const std::size_t possible = pool.size() * (pool.size() - 1) / 2;
  count = std::min(count, possible);
  std::set<IndexPair> seen;
  std::size_t attempts = 0;
  const std::size_t max_attempts = 50 * count + 1000;
  while (out.size() < count && attempts++ < max_attempts) {
    std::uint32_t a = pool[uniform_index(rng, pool.size())];
    std::uint32_t b = pool[uniform_index(rng, pool.size())];
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (seen.insert({a, b}).second) out.emplace_back(a, b);
  }
  return out;
}

PairExample make_pair(std::u32string_view a, std::u32string_view b, int label) {
  return {utf8_encode(a), utf8_encode(b), label};
}

}  // namespace

// ---------------------------------------------------------------------------
// ConfusableTable

ConfusableTable::ConfusableTable(std::vector<ConfusableEntry> entries) : entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (e.source.empty()) throw FormatError("confusable entry with empty source");
    for (const auto& r : e.replacements) {
      if (r.empty()) throw FormatError("confusable entry with empty replacement");
      if (r == e.source) throw FormatError("confusable entry maps \"" + utf8_encode(e.source) + "\" to itself");
    }
  }
}

ConfusableTable ConfusableTable::parse_tsv(std::string_view text) {
  std::vector<ConfusableEntry> entries;
  std::map<std::u32string, std::size_t> by_source;
  std::size_t line_no = 0;
  for (const std::string& line : split_lines(text)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw FormatError("confusable table line " + std::to_string(line_no) +
                        ": expected source<TAB>replacement");
    }
    const std::u32string source = utf8_decode(fields[0]);
    const std::u32string repl = utf8_decode(fields[1]);
    if (source == repl) {
      throw FormatError("confusable table line " + std::to_string(line_no) + ": maps a sequence to itself");
    }
    auto [it, inserted] = by_source.try_emplace(source, entries.size());
    if (inserted) entries.push_back({source, {}});
    auto& reps = entries[it->second].replacements;
    if (std::find(reps.begin(), reps.end(), repl) == reps.end()) reps.push_back(repl);
  }
  return ConfusableTable(std::move(entries));
}

ConfusableTable ConfusableTable::load(const std::filesystem::path& path) { return parse_tsv(slurp(path)); }

ConfusableTable ConfusableTable::bundled() { return load(data_dir() / "confusables.tsv"); }

std::string ConfusableTable::to_tsv() const {
  std::string out;
  for (const auto& e : entries_) {
    for (const auto& r : e.replacements) out += utf8_encode(e.source) + "\t" + utf8_encode(r) + "\n";
  }
  return out;
}

std::size_t ConfusableTable::pair_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.replacements.size();
  return n;
}

std::vector<ConfusableMatch> ConfusableTable::matches(std::u32string_view name) const {
  std::vector<ConfusableMatch> out;
  for (std::size_t pos = 0; pos < name.size(); ++pos) {
    for (std::size_t e = 0; e < entries_.size(); ++e) {
      if (name.substr(pos).starts_with(entries_[e].source)) out.push_back({pos, e});
    }
  }
  return out;
}

std::vector<std::u32string> ConfusableTable::unrenderable(const GlyphAtlas& atlas) const {
  std::vector<std::u32string> out;
  for (const auto& e : entries_) {
    for (const auto& r : e.replacements) {
      if (!std::all_of(r.begin(), r.end(), [&](char32_t c) { return atlas.has_glyph(c); })) out.push_back(r);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generators

std::u32string generate_spoof(std::u32string_view name, const ConfusableTable& table, Rng& rng,
                              int max_edits) {
  if (max_edits < 1) throw InvalidArgument("max_edits must be at least 1");
  const auto matches = table.matches(name);
  if (matches.empty()) {
    throw NoSubstitutionPossible("no confusable substitution applies to \"" + utf8_encode(name) + "\"");
  }
  const auto& entries = table.entries();
  for (int attempt = 0; attempt < kSpoofRetries; ++attempt) {
    const auto wanted = static_cast<std::size_t>(uniform_int(rng, 1, max_edits));
    std::vector<ConfusableMatch> order = matches;
    shuffle(std::span<ConfusableMatch>(order), rng);

    std::vector<char> taken(name.size(), 0);
    std::vector<std::pair<ConfusableMatch, std::size_t>> chosen;  // match, replacement index
    for (const ConfusableMatch& m : order) {
      if (chosen.size() == wanted) break;
      const std::size_t len = entries[m.entry].source.size();
      if (std::any_of(taken.begin() + m.position, taken.begin() + m.position + len, [](char t) { return t; })) {
        continue;
      }
      std::fill(taken.begin() + m.position, taken.begin() + m.position + len, 1);
      chosen.emplace_back(m, uniform_index(rng, entries[m.entry].replacements.size()));
    }
    std::sort(chosen.begin(), chosen.end(),
              [](const auto& a, const auto& b) { return a.first.position < b.first.position; });

    std::u32string out;
    std::size_t cursor = 0;
    for (const auto& [m, r] : chosen) {
      out.append(name.substr(cursor, m.position - cursor));
      out.append(entries[m.entry].replacements[r]);
      cursor = m.position + entries[m.entry].source.size();
    }
    out.append(name.substr(cursor));
    if (out != name) return out;
  }
  throw NoSubstitutionPossible("substitutions on \"" + utf8_encode(name) + "\" reproduce the input");
}

bool apply_shared_unicode_substitution(std::u32string& a, std::u32string& b,
                                       const ConfusableTable& table, Rng& rng) {
  struct Option {
    char32_t source;
    std::vector<std::u32string> replacements;
  };
  std::vector<Option> options;
  for (const auto& e : table.entries()) {
    if (e.source.size() != 1) continue;
    const char32_t c = e.source[0];
    if (a.find(c) == std::u32string::npos || b.find(c) == std::u32string::npos) continue;
    Option opt{c, {}};
    for (const auto& r : e.replacements) {
      if (!is_ascii(r)) opt.replacements.push_back(r);
    }
    if (!opt.replacements.empty()) options.push_back(std::move(opt));
  }
  if (options.empty()) return false;
  const Option& pick = options[uniform_index(rng, options.size())];
  const std::u32string& repl = pick.replacements[uniform_index(rng, pick.replacements.size())];
  auto rewrite = [&](const std::u32string& s) {
    std::u32string out;
    for (char32_t c : s) {
      if (c == pick.source) out += repl;
      else out.push_back(c);
    }
    return out;
  };
  a = rewrite(a);
  b = rewrite(b);
  return true;
}

PairList mine_benign_pairs(const std::vector<std::u32string>& names,
                           std::optional<std::size_t> max_distance, std::size_t sample_count,
                           Rng* rng) {
  std::vector<IndexPair> idx;
  if (max_distance) {
    idx = mine_indices(names, *max_distance);
  } else {
    if (!rng) throw InvalidArgument("sampling benign pairs requires a random generator");
    std::vector<std::uint32_t> pool(names.size());
    std::iota(pool.begin(), pool.end(), 0u);
    idx = sample_indices(pool, sample_count, *rng);
  }
  PairList out;
  out.reserve(idx.size());
  for (const auto& [i, j] : idx) out.push_back(make_pair(names[i], names[j], kLabelBenign));
  return out;
}

PairList mine_benign_pairs(const std::vector<std::string>& names,
                           std::optional<std::size_t> max_distance, std::size_t sample_count,
                           Rng* rng) {
  std::vector<std::u32string> decoded;
  decoded.reserve(names.size());
  for (const auto& n : names) decoded.push_back(utf8_decode(n));
  return mine_benign_pairs(decoded, max_distance, sample_count, rng);
}

DatasetMode parse_mode(std::string_view text) {
  if (text == "process") return DatasetMode::process;
  if (text == "domain") return DatasetMode::domain;
  throw InvalidArgument("unknown mode \"" + std::string(text) + "\" (expected process or domain)");
}

std::string_view to_string(DatasetMode mode) { return mode == DatasetMode::process ? "process" : "domain"; }

std::vector<std::u32string> filter_names(const std::vector<std::string>& names, DatasetMode mode,
                                         const DatasetConfig& cfg, const GlyphAtlas& atlas) {
  std::vector<std::u32string> out;
  std::unordered_set<std::u32string> seen;
  for (const auto& raw : names) {
    const std::u32string decoded = utf8_decode(raw);
    const std::u32string name(strip(decoded));
    if (name.empty()) continue;
    if (mode == DatasetMode::process) {
      if (!has_process_extension(name) || name.size() - 4 < cfg.min_stem_length) continue;
    }
    if (!renderable(name, atlas)) continue;
    if (seen.insert(name).second) out.push_back(name);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dataset assembly

DatasetSplit build_dataset(const std::vector<std::string>& raw_names, DatasetMode mode,
                           const DatasetConfig& cfg, const ConfusableTable& table,
                           const GlyphAtlas& atlas) {
  const std::vector<double> ratios = {cfg.train_ratio, cfg.val_ratio, cfg.test_ratio};
  if (std::any_of(ratios.begin(), ratios.end(), [](double r) { return !(r > 0.0); })) {
    throw InvalidArgument("split ratios must all be positive");
  }
  if (!(cfg.spoof_ratio > 0.0)) throw InvalidArgument("spoof_ratio must be positive");
  const int max_edits = cfg.max_edits > 0 ? cfg.max_edits : (mode == DatasetMode::process ? 3 : 8);

  Rng rng(cfg.seed);
  const std::vector<std::u32string> names = filter_names(raw_names, mode, cfg, atlas);
  if (names.size() < 6) {
    throw InsufficientNames("need at least 6 usable names, got " + std::to_string(names.size()));
  }
  const std::unordered_set<std::u32string> name_set(names.begin(), names.end());

  constexpr int kSplits = 3;
  std::vector<int> split_of(names.size(), -1);
  std::vector<std::vector<IndexPair>> benign_idx(kSplits);
  std::vector<std::size_t> spoof_target(kSplits, 0);

  if (mode == DatasetMode::process) {
    const auto mined = mine_indices(names, cfg.max_distance);
    // Base names linked by a benign pair must land in the same split.
    UnionFind uf(names.size());
    for (const auto& [i, j] : mined) uf.unite(i, j);
    std::map<std::size_t, std::vector<std::uint32_t>> members;
    std::map<std::size_t, std::size_t> weight;
    for (std::uint32_t i = 0; i < names.size(); ++i) members[uf.find(i)].push_back(i);
    for (const auto& [i, j] : mined) ++weight[uf.find(i)];

    std::vector<std::size_t> linked, singles;
    for (const auto& [root, m] : members) (weight[root] > 0 ? linked : singles).push_back(root);
    shuffle(std::span<std::size_t>(linked), rng);
    shuffle(std::span<std::size_t>(singles), rng);

    const auto total_pairs = static_cast<double>(mined.size());
    std::vector<double> pair_load(kSplits, 0.0), name_load(kSplits, 0.0);
    auto assign = [&](std::size_t root, int s) {
      for (std::uint32_t i : members[root]) split_of[i] = s;
      pair_load[s] += static_cast<double>(weight[root]);
      name_load[s] += static_cast<double>(members[root].size());
    };
    for (std::size_t root : linked) {
      int best = 0;
      double best_deficit = -1e300;
      for (int s = 0; s < kSplits; ++s) {
        const double deficit = ratios[s] * total_pairs - pair_load[s];
        if (deficit > best_deficit) {
          best_deficit = deficit;
          best = s;
        }
      }
      assign(root, best);
    }
    const auto total_names = static_cast<double>(names.size());
    for (std::size_t root : singles) {
      int best = 0;
      double best_deficit = -1e300;
      for (int s = 0; s < kSplits; ++s) {
        const double deficit = ratios[s] * total_names - name_load[s];
        if (deficit > best_deficit) {
          best_deficit = deficit;
          best = s;
        }
      }
      assign(root, best);
    }
    for (const auto& p : mined) benign_idx[split_of[p.first]].push_back(p);

    // Spoof counts top each split up to its share of the total.
    const std::size_t benign_total = mined.size();
    const auto spoof_total = static_cast<std::size_t>(std::llround(cfg.spoof_ratio * benign_total));
    const auto sizes = apportion(ratios, benign_total + spoof_total);
    for (int s = 0; s < kSplits; ++s) {
      const std::size_t b = benign_idx[s].size();
      spoof_target[s] = sizes[s] > b ? sizes[s] - b
                                     : std::max<std::size_t>(1, std::llround(cfg.spoof_ratio * b));
    }
  } else {
    std::vector<std::uint32_t> order(names.size());
    std::iota(order.begin(), order.end(), 0u);
    shuffle(std::span<std::uint32_t>(order), rng);
    const auto name_counts = apportion(ratios, names.size());
    std::vector<std::vector<std::uint32_t>> pools(kSplits);
    std::size_t cursor = 0;
    for (int s = 0; s < kSplits; ++s) {
      for (std::size_t k = 0; k < name_counts[s]; ++k) {
        split_of[order[cursor]] = s;
        pools[s].push_back(order[cursor++]);
      }
      std::sort(pools[s].begin(), pools[s].end());
    }
    const std::size_t benign_total =
        cfg.domain_benign_pairs > 0 ? cfg.domain_benign_pairs : 5 * names.size();
    const auto spoof_total = static_cast<std::size_t>(std::llround(cfg.spoof_ratio * benign_total));
    const auto sizes = apportion(ratios, benign_total + spoof_total);
    const double benign_share = static_cast<double>(benign_total) / (benign_total + spoof_total);
    for (int s = 0; s < kSplits; ++s) {
      const auto b = static_cast<std::size_t>(std::llround(benign_share * sizes[s]));
      benign_idx[s] = sample_indices(pools[s], b, rng);
      spoof_target[s] = sizes[s] - std::min(sizes[s], benign_idx[s].size());
    }
  }

  DatasetSplit split;
  split.seed = cfg.seed;
  PairList* outputs[kSplits] = {&split.train, &split.validation, &split.test};
  std::set<std::pair<std::u32string, std::u32string>> spoof_pairs;

  for (int s = 0; s < kSplits; ++s) {
    PairList& out = *outputs[s];

    // Benign pairs, a share of them carrying a shared non-ASCII substitution.
    std::vector<std::pair<std::u32string, std::u32string>> benign;
    for (const auto& [i, j] : benign_idx[s]) benign.emplace_back(names[i], names[j]);
    const auto unicode_target =
        static_cast<std::size_t>(std::ceil(cfg.unicode_benign_fraction * benign.size()));
    std::vector<std::size_t> order(benign.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(std::span<std::size_t>(order), rng);
    std::size_t converted = 0;
    for (std::size_t k = 0; k < order.size() && converted < unicode_target; ++k) {
      auto [a, b] = benign[order[k]];
      if (!apply_shared_unicode_substitution(a, b, table, rng)) continue;
      if (!renderable(a, atlas) || !renderable(b, atlas)) continue;
      benign[order[k]] = {std::move(a), std::move(b)};
      ++converted;
    }
    for (const auto& [a, b] : benign) out.push_back(make_pair(a, b, kLabelBenign));

    // Spoof pairs from this split's base names.
    std::vector<std::uint32_t> bases;
    for (std::uint32_t i = 0; i < names.size(); ++i) {
      if (split_of[i] == s && !table.matches(names[i]).empty()) bases.push_back(i);
    }
    if (bases.empty() && spoof_target[s] > 0) {
      throw InsufficientNames("no substitutable base names in split " + std::to_string(s));
    }
    shuffle(std::span<std::uint32_t>(bases), rng);
    std::size_t made = 0, attempts = 0;
    const std::size_t max_attempts = 50 * spoof_target[s] + 100;
    while (made < spoof_target[s] && attempts < max_attempts) {
      const std::u32string& base = names[bases[attempts % bases.size()]];
      ++attempts;
      std::u32string spoof = generate_spoof(base, table, rng, max_edits);
      if (!renderable(spoof, atlas) || name_set.count(spoof)) continue;
      if (!spoof_pairs.insert({base, spoof}).second) continue;
      out.push_back(make_pair(base, spoof, kLabelSpoof));
      ++made;
    }
    if (made < spoof_target[s]) {
      throw InsufficientNames("could only generate " + std::to_string(made) + " of " +
                              std::to_string(spoof_target[s]) + " spoof pairs");
    }

    shuffle(std::span<PairExample>(out), rng);
    const bool has_benign = std::any_of(out.begin(), out.end(), [](const auto& p) { return p.label == kLabelBenign; });
    const bool has_spoof = std::any_of(out.begin(), out.end(), [](const auto& p) { return p.label == kLabelSpoof; });
    if (!has_benign || !has_spoof) {
      throw InsufficientNames("split " + std::to_string(s) + " would lack " +
                              (has_benign ? "spoof" : "benign") + " pairs");
    }
  }
  return split;
}

double non_ascii_benign_fraction(const PairList& pairs) {
  std::size_t benign = 0, non_ascii = 0;
  for (const auto& p : pairs) {
    if (p.label != kLabelBenign) continue;
    ++benign;
    const bool ascii = std::all_of(p.s1.begin(), p.s1.end(), [](char c) { return (c & 0x80) == 0; }) &&
                       std::all_of(p.s2.begin(), p.s2.end(), [](char c) { return (c & 0x80) == 0; });
    if (!ascii) ++non_ascii;
  }
  return benign == 0 ? 0.0 : static_cast<double>(non_ascii) / static_cast<double>(benign);
}

// ---------------------------------------------------------------------------
// File formats

std::vector<std::string> read_name_list(const std::filesystem::path& path) {
  std::vector<std::string> names;
  for (auto& line : split_lines(slurp(path))) {
    if (!line.empty()) names.push_back(std::move(line));
  }
  return names;
}

void write_name_list(const std::filesystem::path& path, const std::vector<std::string>& names) {
  std::string text;
  for (const auto& n : names) text += n + "\n";
  spit(path, text);
}

std::string pairs_to_tsv(const PairList& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    if (p.s1.find_first_of("\t\n") != std::string::npos || p.s2.find_first_of("\t\n") != std::string::npos) {
      throw FormatError("pair strings may not contain tabs or newlines");
    }
    out += p.s1 + "\t" + p.s2 + "\t" + std::to_string(p.label) + "\n";
  }
  return out;
}

PairList parse_pairs_tsv(std::string_view text) {
  PairList pairs;
  std::size_t line_no = 0;
  for (const auto& line : split_lines(text)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    if (f.size() != 3 || (f[2] != "0" && f[2] != "1")) {
      throw FormatError("pair file line " + std::to_string(line_no) + ": expected s1<TAB>s2<TAB>0|1");
    }
    pairs.push_back({f[0], f[1], f[2] == "0" ? kLabelSpoof : kLabelBenign});
  }
  return pairs;
}

void write_pairs(const std::filesystem::path& path, const PairList& pairs) { spit(path, pairs_to_tsv(pairs)); }

PairList read_pairs(const std::filesystem::path& path) { return parse_pairs_tsv(slurp(path)); }

}  // namespace homoglyph
