#pragma once

#include <string>
#include <vector>

#include "homoglyph/index.hpp"
#include "homoglyph/model_io.hpp"
#include "homoglyph/render.hpp"

namespace homoglyph {

/// Renders and embeds every name, fanning out over `threads` workers
/// (0 = hardware concurrency). Output order matches input order and does not
/// depend on the thread count. Rendering errors propagate.
std::vector<FeatureVector> embed_names(const Model& model, const GlyphAtlas& atlas,
                                       const std::vector<std::string>& names, unsigned threads = 0);

/// SHA-256 of the serialized model, used to tie index files to their model.
std::string model_checksum(const Model& model);

/// Query text after the CLI truncation policy: whitespace trimmed, cut to
/// the longest prefix of <= 25 glyphs that fits the image.
struct PreparedQuery {
  std::string original;
  std::string text;
  bool truncated = false;
  bool used_fallback = false;
};

PreparedQuery prepare_query(const std::string& raw, const GlyphAtlas& atlas);

struct CheckReport {
  PreparedQuery query;
  std::vector<Neighbor> matches;  // distance <= threshold, ascending
};

/// Embeds each query and runs a radius search against the whitelist index.
std::vector<CheckReport> check_names(const KDForest& forest, const Model& model, const GlyphAtlas& atlas,
                                     const std::vector<std::string>& queries, double threshold, int checks);

}  // namespace homoglyph
