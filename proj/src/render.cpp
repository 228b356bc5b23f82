#include "homoglyph/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>

#include "homoglyph/checksum.hpp"
#include "homoglyph/errors.hpp"
#include "homoglyph/utf8.hpp"

namespace homoglyph {

namespace {
constexpr int kSupersample = 16;
constexpr double kInkThreshold = 0.5;
// Glyph ink may overhang its advance (italic-like shapes, wide accents).
constexpr int kOverhangColumns = 4;
}  // namespace

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("HOMOGLYPH_DATA_DIR"); env && *env) return env;
  return HOMOGLYPH_DATA_DIR;
}

int GlyphBitmap::ink() const {
  return static_cast<int>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

std::shared_ptr<const GlyphAtlas> GlyphAtlas::bundled() {
  static std::shared_ptr<const GlyphAtlas> atlas = [] {
    const auto path = data_dir() / kBundledFontFile;
    auto font = TrueTypeFont::from_file(path);
    const std::string digest = sha256_hex(font.bytes());
    if (digest != kBundledFontSha256) {
      throw FontError("bundled font " + path.string() + " has unexpected checksum " + digest);
    }
    return std::make_shared<const GlyphAtlas>(std::move(font));
  }();
  return atlas;
}

std::shared_ptr<const GlyphAtlas> GlyphAtlas::from_file(const std::filesystem::path& path) {
  return std::make_shared<const GlyphAtlas>(TrueTypeFont::from_file(path));
}

GlyphAtlas::GlyphAtlas(TrueTypeFont font) : font_(std::move(font)) {
  font_id_ = sha256_hex(font_.bytes());
  // Scale so ascender..descender spans exactly the glyph height.
  const int span = font_.ascender() - font_.descender();
  if (span <= 0) throw FontError("font has non-positive ascender/descender span");
  scale_ = static_cast<double>(kGlyphHeight) / span;
  // Whole-pixel baseline keeps horizontal strokes on the baseline from
  // straddling two rows and dropping below the ink threshold.
  baseline_ = std::round(font_.ascender() * scale_);
  fallback_ = rasterize(0);
}

GlyphBitmap GlyphAtlas::rasterize(std::uint16_t glyph_id) const {
  GlyphBitmap bmp;
  bmp.advance = static_cast<int>(std::lround(font_.advance_width(glyph_id) * scale_));
  const int grid_width = bmp.advance + kOverhangColumns;
  const auto contours = font_.outline(glyph_id);
  const auto coverage =
      rasterize_coverage(contours, scale_, 0.0, baseline_, grid_width, kGlyphHeight, kSupersample);

  int used = bmp.advance;
  for (int col = bmp.advance; col < grid_width; ++col) {
    for (int row = 0; row < kGlyphHeight; ++row) {
      if (coverage[static_cast<std::size_t>(row) * grid_width + col] >= kInkThreshold) used = col + 1;
    }
  }
  bmp.width = used;
  bmp.bits.assign(static_cast<std::size_t>(kGlyphHeight) * bmp.width, 0);
  for (int row = 0; row < kGlyphHeight; ++row) {
    for (int col = 0; col < bmp.width; ++col) {
      if (coverage[static_cast<std::size_t>(row) * grid_width + col] >= kInkThreshold) {
        bmp.bits[static_cast<std::size_t>(row) * bmp.width + col] = 1;
      }
    }
  }
  return bmp;
}

const GlyphBitmap& GlyphAtlas::glyph(char32_t cp) const {
  {
    std::shared_lock lock(mutex_);
    if (auto it = cache_.find(cp); it != cache_.end()) return *it->second;
  }
  const std::uint16_t id = font_.glyph_index(cp);
  if (id == 0) return fallback_;
  auto bmp = std::make_unique<GlyphBitmap>(rasterize(id));
  std::unique_lock lock(mutex_);
  auto [it, inserted] = cache_.try_emplace(cp, std::move(bmp));
  return *it->second;
}

int GlyphAtlas::advance_px(std::u32string_view text) const {
  int total = kLeftMargin;
  for (char32_t cp : text) total += glyph(cp).advance;
  return total;
}

bool GlyphAtlas::fits(std::u32string_view text) const {
  text = rstrip(text);
  return !text.empty() && advance_px(text) <= kImageWidth;
}

RenderedImage render_string(std::u32string_view text, const GlyphAtlas& atlas) {
  text = rstrip(text);
  if (text.empty()) throw EmptyString("cannot render an empty string");
  const int advance = atlas.advance_px(text);
  if (advance > kImageWidth) {
    throw StringTooLong("string \"" + utf8_encode(text) + "\" needs " + std::to_string(advance) +
                        " px, image is " + std::to_string(kImageWidth) + " px wide");
  }
  RenderedImage image;
  int pen = kLeftMargin;
  for (char32_t cp : text) {
    if (!atlas.has_glyph(cp)) image.used_fallback = true;
    const GlyphBitmap& g = atlas.glyph(cp);
    const int cols = std::min(g.width, kImageWidth - pen);
    for (int row = 0; row < kGlyphHeight; ++row) {
      for (int col = 0; col < cols; ++col) {
        if (g.at(row, col)) image.pixels[static_cast<std::size_t>(row) * kImageWidth + pen + col] = 1;
      }
    }
    pen += g.advance;
  }
  return image;
}

RenderedImage render_string(std::string_view utf8, const GlyphAtlas& atlas) {
  return render_string(std::u32string_view(utf8_decode(utf8)), atlas);
}

std::u32string fit_prefix(std::u32string_view text, const GlyphAtlas& atlas, int max_glyphs) {
  text = rstrip(text);
  std::u32string out;
  int pen = kLeftMargin;
  for (char32_t cp : text) {
    if (static_cast<int>(out.size()) >= max_glyphs) break;
    const int adv = atlas.glyph(cp).advance;
    if (pen + adv > kImageWidth) break;
    pen += adv;
    out.push_back(cp);
  }
  return std::u32string(rstrip(out));
}

int hamming(const RenderedImage& a, const RenderedImage& b) {
  int d = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) d += a.pixels[i] != b.pixels[i];
  return d;
}

std::string to_pbm(const RenderedImage& image) {
  std::string out = "P1\n" + std::to_string(RenderedImage::width) + " " +
                    std::to_string(RenderedImage::height) + "\n";
  for (int row = 0; row < RenderedImage::height; ++row) {
    for (int col = 0; col < RenderedImage::width; ++col) {
      out.push_back(image.at(row, col) ? '1' : '0');
      out.push_back(col + 1 == RenderedImage::width ? '\n' : ' ');
    }
  }
  return out;
}

}  // namespace homoglyph
