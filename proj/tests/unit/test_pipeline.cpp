#include <doctest.h>

#include "homoglyph/errors.hpp"
#include "homoglyph/pipeline.hpp"

using namespace homoglyph;

TEST_SUITE("pipeline") {
  TEST_CASE("embedding is independent of thread count") {
    const Model model{WeightSet::he_uniform(2), kDefaultLeakySlope};
    std::vector<std::string> names;
    for (int i = 0; i < 37; ++i) names.push_back("name" + std::to_string(i) + ".exe");
    const auto one = embed_names(model, *GlyphAtlas::bundled(), names, 1);
    CHECK(embed_names(model, *GlyphAtlas::bundled(), names, 4) == one);
    CHECK(one[5] == model.embed(render_string(std::string_view(names[5]), *GlyphAtlas::bundled())));
    CHECK_THROWS_AS(embed_names(model, *GlyphAtlas::bundled(), {"ok", ""}, 2), EmptyString);
  }

  TEST_CASE("model checksum tracks the weights") {
    const Model a{WeightSet::he_uniform(2), kDefaultLeakySlope};
    Model b = a;
    CHECK(model_checksum(a) == model_checksum(b));
    CHECK(model_checksum(a).size() == 64);
    b.weights[0] += 1e-12;
    CHECK(model_checksum(a) != model_checksum(b));
  }

  TEST_CASE("query preparation") {
    const auto& atlas = *GlyphAtlas::bundled();
    const auto q = prepare_query("  svchost.exe \n", atlas);
    CHECK(q.text == "svchost.exe");
    CHECK_FALSE(q.truncated);
    const auto longq = prepare_query(std::string(40, 'l'), atlas);
    CHECK(longq.truncated);
    CHECK(longq.text == std::string(25, 'l'));
    const auto wide = prepare_query(std::string(25, 'W'), atlas);
    CHECK(wide.truncated);
    CHECK(wide.text.size() < 25);
    CHECK(prepare_query("中文.com", atlas).used_fallback);
  }

  TEST_CASE("check finds the whitelisted name itself") {
    const Model model{WeightSet::he_uniform(3), kDefaultLeakySlope};
    const std::vector<std::string> white = {"svchost.exe", "lsass.exe", "explorer.exe"};
    const auto feats = embed_names(model, *GlyphAtlas::bundled(), white, 1);
    const auto forest = KDForest::build(feats, white, 2, 0);
    const auto reports = check_names(forest, model, *GlyphAtlas::bundled(), {"lsass.exe", "zzzzzzzzzzzzzz"}, 0.0, 128);
    REQUIRE(reports.size() == 2);
    REQUIRE(reports[0].matches.size() == 1);
    CHECK(reports[0].matches[0].label == "lsass.exe");
    CHECK(reports[1].matches.empty());
  }
}
