#include <doctest.h>

#include <thread>

#include "homoglyph/checksum.hpp"
#include "homoglyph/errors.hpp"
#include "homoglyph/render.hpp"
#include "homoglyph/rng.hpp"
#include "homoglyph/utf8.hpp"

using namespace homoglyph;

namespace {

const GlyphAtlas& atlas() { return *GlyphAtlas::bundled(); }

RenderedImage draw(std::string_view s) { return render_string(s, atlas()); }

std::u32string random_string(Rng& rng, std::size_t len) {
  static const std::u32string alphabet = U"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789.-_łаеоѕ";
  std::u32string s;
  for (std::size_t i = 0; i < len; ++i) s.push_back(alphabet[uniform_index(rng, alphabet.size())]);
  return s;
}

}  // namespace

TEST_SUITE("render") {

TEST_CASE("bundled font bytes are pinned") {
  CHECK(sha256_file(data_dir() / kBundledFontFile) == kBundledFontSha256);
  CHECK(atlas().font_id() == kBundledFontSha256);
}

TEST_CASE("image is 150 x 12 binary") {
  const auto img = draw("a");
  CHECK(RenderedImage::width == 150);
  CHECK(RenderedImage::height == 12);
  CHECK(img.pixels.size() == 1800);
  int ink = 0;
  for (auto p : img.pixels) {
    CHECK((p == 0 || p == 1));
    ink += p;
  }
  CHECK(ink > 0);
}

TEST_CASE("left margin column and the tail past the last glyph stay blank") {
  const auto img = draw("svchost.exe");
  const int end = atlas().advance_px(U"svchost.exe");
  for (int r = 0; r < kImageHeight; ++r) {
    CHECK(img.at(r, 0) == 0);
    for (int c = end; c < kImageWidth; ++c) CHECK(img.at(r, c) == 0);
  }
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(draw(""), EmptyString);
  CHECK_THROWS_AS(draw("   \t"), EmptyString);
  CHECK_THROWS_AS(draw(std::string(30, 'W')), StringTooLong);
  CHECK(draw("abc  ") == draw("abc"));
}

TEST_CASE("unsupported codepoints use the fallback glyph and flag it") {
  const auto img = draw("a\xe4\xb8\xad");  // CJK, absent from the face
  CHECK(img.used_fallback);
  CHECK_FALSE(draw("abc").used_fallback);
  CHECK(atlas().glyph(U'中').bits == atlas().fallback_glyph().bits);
}

TEST_CASE("l and l-stroke differ in a handful of pixels") {
  // Frozen from the pinned atlas.
  const int d = hamming(draw("l"), draw("ł"));
  CHECK(d == 2);
  CHECK(d >= 1);
  CHECK(d <= 12);
}

TEST_CASE("glyph cache is pure and fixed height") {
  const GlyphBitmap& a = atlas().glyph(U'g');
  const GlyphBitmap& b = atlas().glyph(U'g');
  CHECK(&a == &b);
  CHECK(a.bits.size() == static_cast<std::size_t>(kGlyphHeight * a.width));
  CHECK(atlas().glyph_px_height() == 12);
}

TEST_CASE("property: rendering is deterministic over 1000 random strings") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const auto s = random_string(rng, 1 + uniform_index(rng, 20));
    if (!atlas().fits(s)) continue;
    const auto a = render_string(s, atlas());
    const auto b = render_string(s, atlas());
    REQUIRE(a == b);
  }
}

TEST_CASE("property: appending a glyph never changes ink left of the previous advance") {
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    const auto s = random_string(rng, 1 + uniform_index(rng, 15));
    auto longer = s;
    longer.push_back(random_string(rng, 1)[0]);
    if (!atlas().fits(longer)) continue;
    const auto a = render_string(s, atlas());
    const auto b = render_string(longer, atlas());
    const int edge = atlas().advance_px(s);
    for (int r = 0; r < kImageHeight; ++r) {
      for (int c = 0; c < edge; ++c) REQUIRE(a.at(r, c) == b.at(r, c));
    }
  }
}

TEST_CASE("concurrent rendering against one atlas matches sequential") {
  const auto shared = GlyphAtlas::from_file(data_dir() / kBundledFontFile);
  Rng rng(3);
  std::vector<std::u32string> inputs;
  for (int i = 0; i < 200; ++i) inputs.push_back(random_string(rng, 8));
  std::vector<RenderedImage> seq;
  for (const auto& s : inputs) seq.push_back(render_string(s, atlas()));

  std::vector<RenderedImage> par(inputs.size());
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (std::size_t i = t; i < inputs.size(); i += 4) par[i] = render_string(inputs[i], *shared);
    });
  }
  for (auto& th : threads) th.join();
  CHECK(par == seq);
}

TEST_CASE("fit_prefix honours both the glyph and the pixel budget") {
  CHECK(fit_prefix(U"abc", atlas()) == U"abc");
  CHECK(fit_prefix(std::u32string(40, U'i'), atlas()).size() == 25);
  const auto wide = fit_prefix(std::u32string(40, U'W'), atlas());
  CHECK(wide.size() < 25);
  CHECK(atlas().fits(wide));
  CHECK_FALSE(atlas().fits(wide + U"W"));
}

TEST_CASE("PBM dump") {
  const std::string pbm = to_pbm(draw("a"));
  CHECK(pbm.rfind("P1\n150 12\n", 0) == 0);
}

}
