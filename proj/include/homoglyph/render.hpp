#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "homoglyph/truetype.hpp"

namespace homoglyph {

inline constexpr int kImageWidth = 150;
inline constexpr int kImageHeight = 12;
inline constexpr int kGlyphHeight = kImageHeight;
inline constexpr int kLeftMargin = 1;
inline constexpr int kMaxGlyphs = 25;

/// SHA-256 of data/DejaVuSans.ttf. The bundled atlas refuses any other bytes.
inline constexpr std::string_view kBundledFontSha256 =
    "690243adfefe0ce154b547db6205794bd30ac4277275179517a90994f4980648";
inline constexpr std::string_view kBundledFontFile = "DejaVuSans.ttf";

/// Directory holding the shipped data files. Honours $HOMOGLYPH_DATA_DIR.
std::filesystem::path data_dir();

/// Binary bitmap of one glyph, kGlyphHeight rows tall. Column 0 is the pen
/// position; ink left of the pen is clipped so appended glyphs never touch
/// earlier columns.
struct GlyphBitmap {
  int advance = 0;
  int width = 0;
  std::vector<std::uint8_t> bits;  // row-major, kGlyphHeight * width

  std::uint8_t at(int row, int col) const { return bits[static_cast<std::size_t>(row) * width + col]; }
  int ink() const;
};

/// Rasterized glyphs of one font face at a fixed pixel height. Glyphs are
/// rasterized on first use; the cache is guarded so a shared atlas can be
/// used from many threads.
class GlyphAtlas {
 public:
  /// The bundled face, verified against kBundledFontSha256.
  static std::shared_ptr<const GlyphAtlas> bundled();
  static std::shared_ptr<const GlyphAtlas> from_file(const std::filesystem::path& path);

  explicit GlyphAtlas(TrueTypeFont font);

  /// SHA-256 of the font bytes.
  const std::string& font_id() const { return font_id_; }
  int glyph_px_height() const { return kGlyphHeight; }

  bool has_glyph(char32_t cp) const { return font_.glyph_index(cp) != 0; }
  /// Bitmap for a codepoint; unsupported codepoints yield fallback_glyph().
  const GlyphBitmap& glyph(char32_t cp) const;
  const GlyphBitmap& fallback_glyph() const { return fallback_; }

  /// Sum of advances plus the left margin, in pixels.
  int advance_px(std::u32string_view text) const;
  bool fits(std::u32string_view text) const;

 private:
  GlyphBitmap rasterize(std::uint16_t glyph_id) const;

  TrueTypeFont font_;
  std::string font_id_;
  double scale_ = 0.0;
  double baseline_ = 0.0;
  GlyphBitmap fallback_;
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<char32_t, std::unique_ptr<GlyphBitmap>> cache_;
};

/// 150x12 binary raster of a string; ink is 1, background 0.
struct RenderedImage {
  static constexpr int width = kImageWidth;
  static constexpr int height = kImageHeight;
  std::array<std::uint8_t, kImageWidth * kImageHeight> pixels{};
  /// Set when at least one codepoint was drawn with the fallback glyph.
  bool used_fallback = false;

  std::uint8_t at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
  bool operator==(const RenderedImage& other) const { return pixels == other.pixels; }
};

/// Renders `text` left to right from a 1 px margin after stripping trailing
/// whitespace. Throws EmptyString or StringTooLong; unsupported codepoints
/// render as the fallback glyph and set `used_fallback`.
RenderedImage render_string(std::u32string_view text, const GlyphAtlas& atlas);
RenderedImage render_string(std::string_view utf8, const GlyphAtlas& atlas);

/// Longest prefix of at most `max_glyphs` codepoints that fits the image.
std::u32string fit_prefix(std::u32string_view text, const GlyphAtlas& atlas,
                          int max_glyphs = kMaxGlyphs);

/// Number of differing pixels.
int hamming(const RenderedImage& a, const RenderedImage& b);

/// Plain PBM (P1) dump; pixel values are written as stored (ink = 1).
std::string to_pbm(const RenderedImage& image);

}  // namespace homoglyph
