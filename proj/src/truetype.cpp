#include "homoglyph/truetype.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "homoglyph/errors.hpp"

namespace homoglyph {

namespace {

constexpr int kCurveSegments = 8;
constexpr int kMaxCompositeDepth = 8;

struct Reader {
  std::span<const std::uint8_t> data;

  void check(std::uint32_t off, std::uint32_t n) const {
    if (static_cast<std::uint64_t>(off) + n > data.size()) {
      throw FontError("truncated font data at offset " + std::to_string(off));
    }
  }
  std::uint8_t u8(std::uint32_t off) const {
    check(off, 1);
    return data[off];
  }
  std::uint16_t u16(std::uint32_t off) const {
    check(off, 2);
    return static_cast<std::uint16_t>((data[off] << 8) | data[off + 1]);
  }
  std::int16_t i16(std::uint32_t off) const { return static_cast<std::int16_t>(u16(off)); }
  std::uint32_t u32(std::uint32_t off) const {
    check(off, 4);
    return (static_cast<std::uint32_t>(data[off]) << 24) |
           (static_cast<std::uint32_t>(data[off + 1]) << 16) |
           (static_cast<std::uint32_t>(data[off + 2]) << 8) | data[off + 3];
  }
  double f2dot14(std::uint32_t off) const { return i16(off) / 16384.0; }
};

struct OutlinePoint {
  double x;
  double y;
  bool on_curve;
};

void flatten_contour(std::vector<OutlinePoint> pts, Contour& out) {
  const std::size_t n = pts.size();
  if (n == 0) return;

  // Rotate so the walk starts on an on-curve point, synthesising one between
  // the last and first points when the whole contour is off-curve.
  auto first_on = std::find_if(pts.begin(), pts.end(), [](const OutlinePoint& p) { return p.on_curve; });
  if (first_on == pts.end()) {
    const OutlinePoint mid{(pts.front().x + pts.back().x) * 0.5, (pts.front().y + pts.back().y) * 0.5, true};
    pts.insert(pts.begin(), mid);
  } else {
    std::rotate(pts.begin(), first_on, pts.end());
  }

  const std::size_t len = pts.size();
  Point2 current{pts[0].x, pts[0].y};
  out.push_back(current);
  bool have_control = false;
  Point2 control{};

  auto emit_quad = [&](Point2 p0, Point2 c, Point2 p1) {
    for (int s = 1; s <= kCurveSegments; ++s) {
      const double t = static_cast<double>(s) / kCurveSegments;
      const double u = 1.0 - t;
      out.push_back({u * u * p0.x + 2 * u * t * c.x + t * t * p1.x,
                     u * u * p0.y + 2 * u * t * c.y + t * t * p1.y});
    }
  };

  for (std::size_t i = 1; i <= len; ++i) {
    const OutlinePoint& p = pts[i % len];
    const Point2 pt{p.x, p.y};
    if (p.on_curve) {
      if (have_control) emit_quad(current, control, pt);
      else out.push_back(pt);
      current = pt;
      have_control = false;
    } else {
      if (have_control) {
        const Point2 mid{(control.x + pt.x) * 0.5, (control.y + pt.y) * 0.5};
        emit_quad(current, control, mid);
        current = mid;
      }
      control = pt;
      have_control = true;
    }
  }
  // The walk ends back on the start point; drop the duplicate.
  if (out.size() > 1) out.pop_back();
}

}  // namespace

TrueTypeFont TrueTypeFont::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FontError("cannot open font file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return from_bytes(std::move(bytes));
}

TrueTypeFont TrueTypeFont::from_bytes(std::vector<std::uint8_t> bytes) {
  TrueTypeFont font;
  font.bytes_ = std::move(bytes);
  font.parse();
  return font;
}

void TrueTypeFont::parse() {
  const Reader r{bytes_};
  const std::uint32_t version = r.u32(0);
  if (version != 0x00010000 && version != 0x74727565) {
    throw FontError("not a TrueType outline font");
  }
  const std::uint16_t num_tables = r.u16(4);
  std::uint32_t head = 0, hhea = 0, maxp = 0, cmap = 0;
  for (std::uint16_t i = 0; i < num_tables; ++i) {
    const std::uint32_t rec = 12 + 16u * i;
    r.check(rec, 16);
    char tag[5] = {};
    std::memcpy(tag, &bytes_[rec], 4);
    const std::uint32_t off = r.u32(rec + 8);
    const std::string t(tag);
    if (t == "head") head = off;
    else if (t == "hhea") hhea = off;
    else if (t == "maxp") maxp = off;
    else if (t == "cmap") cmap = off;
    else if (t == "hmtx") hmtx_ = off;
    else if (t == "loca") loca_ = off;
    else if (t == "glyf") glyf_ = off;
  }
  if (!head || !hhea || !maxp || !cmap || !hmtx_ || !loca_ || !glyf_) {
    throw FontError("font is missing a required table");
  }
  units_per_em_ = r.u16(head + 18);
  index_to_loc_format_ = r.i16(head + 50);
  ascender_ = r.i16(hhea + 4);
  descender_ = r.i16(hhea + 6);
  num_hmetrics_ = r.u16(hhea + 34);
  num_glyphs_ = r.u16(maxp + 4);

  // Prefer the full-repertoire Windows subtable, then BMP-only.
  const std::uint16_t n_sub = r.u16(cmap + 2);
  std::uint32_t best = 0;
  int best_rank = 0;
  for (std::uint16_t i = 0; i < n_sub; ++i) {
    const std::uint32_t rec = cmap + 4 + 8u * i;
    const std::uint16_t platform = r.u16(rec);
    const std::uint16_t encoding = r.u16(rec + 2);
    const std::uint32_t off = cmap + r.u32(rec + 4);
    const std::uint16_t format = r.u16(off);
    int rank = 0;
    if (format == 12 && (platform == 3 && encoding == 10)) rank = 4;
    else if (format == 12 && platform == 0) rank = 3;
    else if (format == 4 && platform == 3 && encoding == 1) rank = 2;
    else if (format == 4 && platform == 0) rank = 1;
    if (rank > best_rank) {
      best_rank = rank;
      best = off;
    }
  }
  if (best_rank == 0) throw FontError("font has no usable Unicode cmap");
  cmap_subtable_ = best;
  cmap_format_ = r.u16(best);
}

std::uint16_t TrueTypeFont::cmap_format4(std::uint32_t off, char32_t cp) const {
  if (cp > 0xFFFF) return 0;
  const Reader r{bytes_};
  const std::uint16_t seg_x2 = r.u16(off + 6);
  const std::uint32_t ends = off + 14;
  const std::uint32_t starts = ends + seg_x2 + 2;
  const std::uint32_t deltas = starts + seg_x2;
  const std::uint32_t range_offsets = deltas + seg_x2;
  for (std::uint32_t i = 0; i < seg_x2; i += 2) {
    const std::uint16_t end = r.u16(ends + i);
    if (cp > end) continue;
    const std::uint16_t start = r.u16(starts + i);
    if (cp < start) return 0;
    const std::uint16_t delta = r.u16(deltas + i);
    const std::uint16_t ro = r.u16(range_offsets + i);
    if (ro == 0) return static_cast<std::uint16_t>(cp + delta);
    const std::uint32_t addr = range_offsets + i + ro + 2 * (static_cast<std::uint32_t>(cp) - start);
    const std::uint16_t g = r.u16(addr);
    return g == 0 ? 0 : static_cast<std::uint16_t>(g + delta);
  }
  return 0;
}

std::uint16_t TrueTypeFont::cmap_format12(std::uint32_t off, char32_t cp) const {
  const Reader r{bytes_};
  const std::uint32_t n_groups = r.u32(off + 12);
  std::uint32_t lo = 0, hi = n_groups;
  while (lo < hi) {
    const std::uint32_t mid = lo + (hi - lo) / 2;
    const std::uint32_t g = off + 16 + 12 * mid;
    const std::uint32_t start = r.u32(g);
    const std::uint32_t end = r.u32(g + 4);
    if (cp < start) {
      hi = mid;
    } else if (cp > end) {
      lo = mid + 1;
    } else {
      return static_cast<std::uint16_t>(r.u32(g + 8) + (cp - start));
    }
  }
  return 0;
}

std::uint16_t TrueTypeFont::glyph_index(char32_t codepoint) const {
  const std::uint16_t g = cmap_format_ == 12 ? cmap_format12(cmap_subtable_, codepoint)
                                             : cmap_format4(cmap_subtable_, codepoint);
  return g < num_glyphs_ ? g : 0;
}

int TrueTypeFont::advance_width(std::uint16_t glyph) const {
  const Reader r{bytes_};
  const int idx = std::min<int>(glyph, num_hmetrics_ - 1);
  return r.u16(hmtx_ + 4u * idx);
}

std::vector<Contour> TrueTypeFont::outline(std::uint16_t glyph) const {
  std::vector<Contour> out;
  append_outline(glyph, 1, 0, 0, 1, 0, 0, 0, out);
  return out;
}

void TrueTypeFont::append_outline(std::uint16_t glyph, double a, double b, double c, double d,
                                  double dx, double dy, int depth,
                                  std::vector<Contour>& out) const {
  if (depth > kMaxCompositeDepth) throw FontError("composite glyph nesting too deep");
  if (glyph >= num_glyphs_) return;
  const Reader r{bytes_};
  std::uint32_t start, end;
  if (index_to_loc_format_ == 0) {
    start = 2u * r.u16(loca_ + 2u * glyph);
    end = 2u * r.u16(loca_ + 2u * glyph + 2);
  } else {
    start = r.u32(loca_ + 4u * glyph);
    end = r.u32(loca_ + 4u * glyph + 4);
  }
  if (start == end) return;  // empty glyph, e.g. space
  const std::uint32_t g = glyf_ + start;
  const std::int16_t n_contours = r.i16(g);

  auto transform = [&](double x, double y) {
    return OutlinePoint{a * x + c * y + dx, b * x + d * y + dy, false};
  };

  if (n_contours >= 0) {
    std::vector<std::uint16_t> end_pts(n_contours);
    for (int i = 0; i < n_contours; ++i) end_pts[i] = r.u16(g + 10 + 2 * i);
    if (n_contours == 0) return;
    const std::size_t n_points = static_cast<std::size_t>(end_pts.back()) + 1;
    const std::uint32_t instr_len_off = g + 10 + 2 * n_contours;
    std::uint32_t p = instr_len_off + 2 + r.u16(instr_len_off);

    std::vector<std::uint8_t> flags(n_points);
    for (std::size_t i = 0; i < n_points;) {
      const std::uint8_t f = r.u8(p++);
      flags[i++] = f;
      if (f & 0x08) {
        std::uint8_t repeat = r.u8(p++);
        while (repeat-- > 0 && i < n_points) flags[i++] = f;
      }
    }
    std::vector<int> xs(n_points), ys(n_points);
    int v = 0;
    for (std::size_t i = 0; i < n_points; ++i) {
      const std::uint8_t f = flags[i];
      if (f & 0x02) {
        const int delta = r.u8(p++);
        v += (f & 0x10) ? delta : -delta;
      } else if (!(f & 0x10)) {
        v += r.i16(p);
        p += 2;
      }
      xs[i] = v;
    }
    v = 0;
    for (std::size_t i = 0; i < n_points; ++i) {
      const std::uint8_t f = flags[i];
      if (f & 0x04) {
        const int delta = r.u8(p++);
        v += (f & 0x20) ? delta : -delta;
      } else if (!(f & 0x20)) {
        v += r.i16(p);
        p += 2;
      }
      ys[i] = v;
    }

    std::size_t first = 0;
    for (int ci = 0; ci < n_contours; ++ci) {
      const std::size_t last = end_pts[ci];
      if (last < first || last >= n_points) throw FontError("malformed contour end points");
      std::vector<OutlinePoint> pts;
      pts.reserve(last - first + 1);
      for (std::size_t i = first; i <= last; ++i) {
        OutlinePoint q = transform(xs[i], ys[i]);
        q.on_curve = flags[i] & 0x01;
        pts.push_back(q);
      }
      Contour contour;
      flatten_contour(std::move(pts), contour);
      if (contour.size() >= 3) out.push_back(std::move(contour));
      first = last + 1;
    }
    return;
  }

  // Composite glyph.
  constexpr std::uint16_t kArgWords = 0x0001;
  constexpr std::uint16_t kArgsXY = 0x0002;
  constexpr std::uint16_t kScale = 0x0008;
  constexpr std::uint16_t kMore = 0x0020;
  constexpr std::uint16_t kXYScale = 0x0040;
  constexpr std::uint16_t kTwoByTwo = 0x0080;
  std::uint32_t p = g + 10;
  std::uint16_t flags;
  do {
    flags = r.u16(p);
    const std::uint16_t child = r.u16(p + 2);
    p += 4;
    double ox, oy;
    if (flags & kArgWords) {
      ox = r.i16(p);
      oy = r.i16(p + 2);
      p += 4;
    } else {
      ox = static_cast<std::int8_t>(r.u8(p));
      oy = static_cast<std::int8_t>(r.u8(p + 1));
      p += 2;
    }
    if (!(flags & kArgsXY)) {
      // Point-matching placement is not used by the bundled face.
      ox = oy = 0;
    }
    double ca = 1, cb = 0, cc = 0, cd = 1;
    if (flags & kScale) {
      ca = cd = r.f2dot14(p);
      p += 2;
    } else if (flags & kXYScale) {
      ca = r.f2dot14(p);
      cd = r.f2dot14(p + 2);
      p += 4;
    } else if (flags & kTwoByTwo) {
      ca = r.f2dot14(p);
      cb = r.f2dot14(p + 2);
      cc = r.f2dot14(p + 4);
      cd = r.f2dot14(p + 6);
      p += 8;
    }
    // Compose parent transform with the child transform and offset.
    const double na = a * ca + c * cb;
    const double nb = b * ca + d * cb;
    const double nc = a * cc + c * cd;
    const double nd = b * cc + d * cd;
    const double ndx = a * ox + c * oy + dx;
    const double ndy = b * ox + d * oy + dy;
    append_outline(child, na, nb, nc, nd, ndx, ndy, depth + 1, out);
  } while (flags & kMore);
}

std::vector<double> rasterize_coverage(std::span<const Contour> contours, double scale,
                                       double origin_x, double baseline_y, int width, int height,
                                       int supersample) {
  std::vector<double> coverage(static_cast<std::size_t>(width) * height, 0.0);
  if (width <= 0 || height <= 0) return coverage;

  struct Edge {
    double x0, y0, x1, y1;
    int dir;
  };
  std::vector<Edge> edges;
  for (const Contour& contour : contours) {
    const std::size_t n = contour.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2& p = contour[i];
      const Point2& q = contour[(i + 1) % n];
      const double x0 = origin_x + p.x * scale, y0 = baseline_y - p.y * scale;
      const double x1 = origin_x + q.x * scale, y1 = baseline_y - q.y * scale;
      if (y0 == y1) continue;
      if (y0 < y1) edges.push_back({x0, y0, x1, y1, 1});
      else edges.push_back({x1, y1, x0, y0, -1});
    }
  }

  const double step = 1.0 / supersample;
  const double per_sample = 1.0 / (static_cast<double>(supersample) * supersample);
  struct Crossing {
    double x;
    int dir;
  };
  std::vector<Crossing> crossings;
  for (int row = 0; row < height; ++row) {
    for (int sy = 0; sy < supersample; ++sy) {
      const double y = row + (sy + 0.5) * step;
      crossings.clear();
      for (const Edge& e : edges) {
        if (y < e.y0 || y >= e.y1) continue;
        const double t = (y - e.y0) / (e.y1 - e.y0);
        crossings.push_back({e.x0 + t * (e.x1 - e.x0), e.dir});
      }
      if (crossings.empty()) continue;
      std::sort(crossings.begin(), crossings.end(), [](const Crossing& l, const Crossing& r) {
        return l.x < r.x || (l.x == r.x && l.dir < r.dir);
      });
      // Walk sample columns left to right accumulating winding number.
      std::size_t ci = 0;
      int winding = 0;
      for (int col = 0; col < width; ++col) {
        for (int sx = 0; sx < supersample; ++sx) {
          const double x = col + (sx + 0.5) * step;
          while (ci < crossings.size() && crossings[ci].x <= x) winding += crossings[ci++].dir;
          if (winding != 0) coverage[static_cast<std::size_t>(row) * width + col] += per_sample;
        }
      }
    }
  }
  return coverage;
}

}  // namespace homoglyph
