#include <doctest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "homoglyph/corpus.hpp"
#include "homoglyph/errors.hpp"
#include "homoglyph/levenshtein.hpp"
#include "homoglyph/utf8.hpp"

using namespace homoglyph;

namespace {

// Textbook recursion, memoised on suffix offsets so the exhaustive sweep
// stays tractable.
std::size_t naive_lev(std::u32string_view a, std::u32string_view b) {
  std::vector<std::size_t> memo((a.size() + 1) * (b.size() + 1), SIZE_MAX);
  std::function<std::size_t(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> std::size_t {
    if (i == a.size()) return b.size() - j;
    if (j == b.size()) return a.size() - i;
    std::size_t& m = memo[i * (b.size() + 1) + j];
    if (m == SIZE_MAX) m = std::min({go(i + 1, j + 1) + (a[i] != b[j]), go(i + 1, j) + 1, go(i, j + 1) + 1});
    return m;
  };
  return go(0, 0);
}

void all_strings(std::size_t max_len, std::vector<std::u32string>& out) {
  out.push_back(U"");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].size() == max_len) continue;
    for (char32_t c : {U'a', U'b', U'c'}) out.push_back(out[i] + c);
  }
}

// True when `to` can be produced from `from` by copying characters and
// applying whole table substitutions.
bool derivable(const std::u32string& from, const std::u32string& to, const ConfusableTable& table) {
  std::map<std::pair<std::size_t, std::size_t>, bool> memo;
  std::function<bool(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> bool {
    if (i == from.size() || j == to.size()) return i == from.size() && j == to.size();
    const auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    bool ok = from[i] == to[j] && go(i + 1, j + 1);
    for (const auto& e : table.entries()) {
      if (ok) break;
      if (from.compare(i, e.source.size(), e.source) != 0) continue;
      for (const auto& r : e.replacements) {
        if (to.compare(j, r.size(), r) == 0 && go(i + e.source.size(), j + r.size())) {
          ok = true;
          break;
        }
      }
    }
    return memo[key] = ok;
  };
  return go(0, 0);
}

const ConfusableTable& table() {
  static const ConfusableTable t = ConfusableTable::bundled();
  return t;
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("levenshtein reference values") {
    CHECK(levenshtein("SVCHOST.EXE", "SVCH0ST.EXE") == 1);
    CHECK(levenshtein("LSASS.EXE", "LS4SS.EXE") == 1);
    CHECK(levenshtein("iexplore.exe", "iexp1orc.exe") == 2);
    CHECK(levenshtein("chtime.exe", "chtirne.exe") == 2);
    CHECK(levenshtein("iexplore.exe", "explorer.exe") == 2);
    CHECK(levenshtein("abc", "abc") == 0);
    CHECK(levenshtein("ł", "l") == 1);  // counted per codepoint, not per byte
  }

  TEST_CASE("levenshtein matches the naive recursion exhaustively") {
    std::vector<std::u32string> strs;
    all_strings(6, strs);
    REQUIRE(strs.size() == 1093);
    std::size_t mismatches = 0;
    for (const auto& a : strs)
      for (const auto& b : strs) mismatches += levenshtein(a, b) != naive_lev(a, b);
    CHECK(mismatches == 0);
  }

  TEST_CASE("bounded levenshtein") {
    CHECK(bounded_levenshtein(U"abcdef", U"abcdef", 0) == 0);
    CHECK(bounded_levenshtein(U"kitten", U"sitting", 3) == 3);
    CHECK(bounded_levenshtein(U"kitten", U"sitting", 2) == 3);
    CHECK(bounded_levenshtein(U"abcd", U"wxyz", 3) == 4);
  }

  TEST_CASE("levenshtein is a metric on random triples") {
    Rng rng(1);
    auto rand_str = [&] {
      std::u32string s;
      const auto n = uniform_int(rng, 0, 10);
      for (int i = 0; i < n; ++i) s += static_cast<char32_t>(U'a' + uniform_index(rng, 4));
      return s;
    };
    for (int t = 0; t < 2000; ++t) {
      const auto a = rand_str(), b = rand_str(), c = rand_str();
      CHECK(levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c));
      CHECK(levenshtein(a, b) == levenshtein(b, a));
      CHECK((levenshtein(a, b) == 0) == (a == b));
    }
  }

  TEST_CASE("confusable table") {
    CHECK(table().pair_count() >= 200);
    CHECK(table().unrenderable(*GlyphAtlas::bundled()).empty());
    for (const auto& e : table().entries()) {
      CHECK(e.source.size() >= 1);
      CHECK(e.source.size() <= 2);
      for (const auto& r : e.replacements) CHECK(r != e.source);
    }
    const auto t = ConfusableTable::parse_tsv("# comment\no\t0\nm\trn\no\tο\n");
    CHECK(t.pair_count() == 3);
    CHECK(t.entries().size() == 2);
    CHECK_THROWS_AS(ConfusableTable::parse_tsv("o\to\n"), FormatError);
    CHECK(ConfusableTable::parse_tsv(t.to_tsv()).to_tsv() == t.to_tsv());
  }

  TEST_CASE("forced substitution reproduces svch0st") {
    const auto t = ConfusableTable::parse_tsv("o\t0\n");
    Rng rng(0);
    CHECK(utf8_encode(generate_spoof(U"svchost.exe", t, rng, 1)) == "svch0st.exe");
    CHECK_THROWS_AS(generate_spoof(U"xyz", t, rng, 2), NoSubstitutionPossible);
  }

  TEST_CASE("spoofs differ, render, and stay within the edit bound") {
    std::size_t max_diff = 0;
    for (const auto& e : table().entries())
      for (const auto& r : e.replacements)
        max_diff = std::max(max_diff, r.size() > e.source.size() ? r.size() - e.source.size()
                                                                  : e.source.size() - r.size());
    const auto names = synthesize_process_names(200, 1);
    const auto& atlas = *GlyphAtlas::bundled();
    Rng rng(2);
    for (int t = 0; t < 10000; ++t) {
      const auto name = utf8_decode(names[static_cast<std::size_t>(t) % names.size()]);
      const auto spoof = generate_spoof(name, table(), rng, 2);
      CHECK(spoof != name);
      CHECK(levenshtein(name, spoof) <= 2 * max_diff + 2);
      if (t % 50 == 0) CHECK_NOTHROW(render_string(std::u32string_view(spoof), atlas));
    }
  }

  TEST_CASE("mined pairs equal the quadratic filter") {
    CHECK(mine_benign_pairs(std::vector<std::string>{"abcd", "abce"}, 3).size() == 1);
    CHECK(mine_benign_pairs(std::vector<std::string>{"abcd", "wxyz"}, 3).empty());

    const auto names = synthesize_process_names(500, 3);
    const auto mined = mine_benign_pairs(names, 3);
    PairList oracle;
    for (std::size_t i = 0; i < names.size(); ++i)
      for (std::size_t j = i + 1; j < names.size(); ++j) {
        const auto d = levenshtein(names[i], names[j]);
        if (d >= 1 && d <= 3) oracle.push_back({names[i], names[j], kLabelBenign});
      }
    CHECK(mined == oracle);
    CHECK(!mined.empty());

    Rng rng(4);
    const auto sampled = mine_benign_pairs(names, std::nullopt, 300, &rng);
    CHECK(sampled.size() == 300);
    std::set<std::pair<std::string, std::string>> uniq;
    for (const auto& p : sampled) {
      CHECK(p.s1 != p.s2);
      uniq.insert(std::minmax(p.s1, p.s2));
    }
    CHECK(uniq.size() == 300);
  }

  TEST_CASE("dataset invariants") {
    const auto& atlas = *GlyphAtlas::bundled();
    for (auto mode : {DatasetMode::process, DatasetMode::domain}) {
      CAPTURE(to_string(mode));
      const auto names = mode == DatasetMode::process ? synthesize_process_names(100, 7)
                                                      : synthesize_domain_names(100, 7);
      DatasetConfig cfg;
      const auto ds = build_dataset(names, mode, cfg, table(), atlas);
      const double total = static_cast<double>(ds.total());
      CHECK(std::abs(static_cast<double>(ds.train.size()) - 0.70 * total) <= 1.0);
      CHECK(std::abs(static_cast<double>(ds.validation.size()) - 0.15 * total) <= 1.0);
      CHECK(std::abs(static_cast<double>(ds.test.size()) - 0.15 * total) <= 1.0);

      std::map<std::pair<std::string, std::string>, int> owner;
      std::map<std::string, int> spoof_base;
      int split = 0;
      for (const PairList* pl : {&ds.train, &ds.validation, &ds.test}) {
        bool has0 = false, has1 = false;
        for (const auto& p : *pl) {
          (p.label == kLabelSpoof ? has0 : has1) = true;
          CHECK(p.s1 != p.s2);
          const auto [it, fresh] = owner.emplace(std::minmax(p.s1, p.s2), split);
          if (!fresh) CHECK(it->second == split);
          if (p.label == kLabelSpoof) {
            CHECK(derivable(utf8_decode(p.s1), utf8_decode(p.s2), table()));
            const auto [b, new_base] = spoof_base.emplace(p.s1, split);
            if (!new_base) CHECK(b->second == split);
          } else if (mode == DatasetMode::process) {
            CHECK(levenshtein(p.s1, p.s2) <= 3);
          }
          CHECK(utf8_decode(p.s1).size() <= 25);
          CHECK(utf8_decode(p.s2).size() <= 25);
        }
        CHECK(has0);
        CHECK(has1);
        CHECK(non_ascii_benign_fraction(*pl) >= 0.20);
        ++split;
      }
      CHECK(build_dataset(names, mode, cfg, table(), atlas) == ds);
      cfg.seed += 1;
      CHECK_FALSE(build_dataset(names, mode, cfg, table(), atlas) == ds);
    }
  }

  TEST_CASE("process filter") {
    DatasetConfig cfg;
    const auto kept = filter_names({"svchost.exe", "abc.exe", "  user32.dll ", "readme.txt", "svchost.exe"},
                                   DatasetMode::process, cfg, *GlyphAtlas::bundled());
    REQUIRE(kept.size() == 2);
    CHECK(kept[0] == U"svchost.exe");
    CHECK(kept[1] == U"user32.dll");
    CHECK_THROWS_AS(build_dataset({"a.exe", "b.exe"}, DatasetMode::process, cfg, table(), *GlyphAtlas::bundled()),
                    InsufficientNames);
  }

  TEST_CASE("pair TSV round trip") {
    const PairList pairs = {{"svchost.exe", "svch0st.exe", 0}, {"gооgle.com", "goggle.com", 1}};
    CHECK(parse_pairs_tsv(pairs_to_tsv(pairs)) == pairs);
    CHECK_THROWS_AS(parse_pairs_tsv("a\tb\t2\n"), FormatError);
    CHECK_THROWS_AS(parse_pairs_tsv("a\tb\n"), FormatError);
  }

  TEST_CASE("synthetic corpora are deterministic and unique") {
    const auto a = synthesize_process_names(2000, 20171103);
    CHECK(a == synthesize_process_names(2000, 20171103));
    CHECK(std::set<std::string>(a.begin(), a.end()).size() == 2000);
    const auto d = synthesize_domain_names(2000, 20171103);
    CHECK(std::set<std::string>(d.begin(), d.end()).size() == 2000);
  }
}
