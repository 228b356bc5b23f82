#include "homoglyph/pipeline.hpp"

#include <algorithm>
#include <thread>

#include "homoglyph/checksum.hpp"
#include "homoglyph/errors.hpp"
#include "homoglyph/utf8.hpp"

namespace homoglyph {

std::vector<FeatureVector> embed_names(const Model& model, const GlyphAtlas& atlas,
                                       const std::vector<std::string>& names, unsigned threads) {
  std::vector<FeatureVector> out(names.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, (names.size() + 63) / 64));
  auto work = [&](std::size_t begin, std::size_t end) {
    Workspace ws;
    for (std::size_t i = begin; i < end; ++i) {
      out[i] = forward(model.weights, render_string(std::string_view(names[i]), atlas), model.leaky_slope, ws);
    }
  };
  if (threads <= 1) {
    work(0, names.size());
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  const std::size_t chunk = (names.size() + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk, end = std::min(names.size(), begin + chunk);
    pool.emplace_back([&, t, begin, end] {
      try {
        work(begin, end);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::string model_checksum(const Model& model) { return sha256_hex(serialize_model(model)); }

PreparedQuery prepare_query(const std::string& raw, const GlyphAtlas& atlas) {
  PreparedQuery q;
  q.original = raw;
  std::u32string text = utf8_decode(raw);
  text = std::u32string(rstrip(text));
  const auto lead = text.find_first_not_of(U" \t");
  text.erase(0, lead == std::u32string::npos ? text.size() : lead);
  const std::u32string cut = fit_prefix(text, atlas);
  q.truncated = cut.size() < text.size();
  q.text = utf8_encode(cut);
  q.used_fallback = std::any_of(cut.begin(), cut.end(), [&](char32_t c) { return !atlas.has_glyph(c); });
  return q;
}

std::vector<CheckReport> check_names(const KDForest& forest, const Model& model, const GlyphAtlas& atlas,
                                     const std::vector<std::string>& queries, double threshold, int checks) {
  std::vector<CheckReport> reports;
  std::vector<std::string> texts;
  for (const auto& raw : queries) {
    CheckReport r;
    r.query = prepare_query(raw, atlas);
    if (r.query.text.empty()) continue;
    texts.push_back(r.query.text);
    reports.push_back(std::move(r));
  }
  const auto features = embed_names(model, atlas, texts);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    reports[i].matches = forest.query_radius(features[i], threshold, checks).neighbors;
  }
  return reports;
}

}  // namespace homoglyph
