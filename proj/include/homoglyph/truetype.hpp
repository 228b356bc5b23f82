#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace homoglyph {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// A closed polyline in font units (y up). Quadratic curves are flattened.
using Contour = std::vector<Point2>;

/// Minimal reader for TrueType-flavoured sfnt files: just enough of cmap,
/// hhea, hmtx, loca and glyf to rasterize outlines. Hinting is ignored.
class TrueTypeFont {
 public:
  static TrueTypeFont from_file(const std::filesystem::path& path);
  static TrueTypeFont from_bytes(std::vector<std::uint8_t> bytes);

  /// Glyph id for a codepoint; 0 (.notdef) when the font has no mapping.
  std::uint16_t glyph_index(char32_t codepoint) const;

  int units_per_em() const { return units_per_em_; }
  int ascender() const { return ascender_; }
  int descender() const { return descender_; }
  int num_glyphs() const { return num_glyphs_; }
  int advance_width(std::uint16_t glyph) const;

  std::vector<Contour> outline(std::uint16_t glyph) const;

  std::span<const std::uint8_t> bytes() const { return bytes_; }

 private:
  TrueTypeFont() = default;
  void parse();
  void append_outline(std::uint16_t glyph, double a, double b, double c, double d, double dx,
                      double dy, int depth, std::vector<Contour>& out) const;
  std::uint16_t cmap_format4(std::uint32_t offset, char32_t cp) const;
  std::uint16_t cmap_format12(std::uint32_t offset, char32_t cp) const;

  std::vector<std::uint8_t> bytes_;
  std::uint32_t cmap_subtable_ = 0;
  std::uint16_t cmap_format_ = 0;
  std::uint32_t hmtx_ = 0;
  std::uint32_t loca_ = 0;
  std::uint32_t glyf_ = 0;
  int units_per_em_ = 0;
  int ascender_ = 0;
  int descender_ = 0;
  int num_glyphs_ = 0;
  int num_hmetrics_ = 0;
  int index_to_loc_format_ = 0;
};

/// Coverage mask of an outline on an integer pixel grid. `scale` maps font
/// units to pixels, the outline origin sits at (origin_x, baseline_y) in
/// pixel space with y growing downward. Coverage is estimated with
/// `supersample`^2 sample points per pixel under the nonzero winding rule.
std::vector<double> rasterize_coverage(std::span<const Contour> contours, double scale,
                                       double origin_x, double baseline_y, int width, int height,
                                       int supersample);

}  // namespace homoglyph
