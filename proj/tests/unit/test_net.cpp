#include <doctest.h>

#include <cmath>
#include <vector>

#include "gradcheck.hpp"
#include "homoglyph/net.hpp"
#include "homoglyph/rng.hpp"

using namespace homoglyph;
using A = Architecture;

namespace {

// Direct nested-loop network, no im2col and no Eigen.
FeatureVector naive_forward(const WeightSet& w, const RenderedImage& img, double slope) {
  auto leaky = [slope](double z) { return z > 0 ? z : slope * z; };
  using Maps = std::vector<std::vector<std::vector<double>>>;  // [c][y][x]
  auto conv = [&](const Maps& in, int filters, std::size_t w_off, std::size_t b_off) {
    const int ch = static_cast<int>(in.size()), h = static_cast<int>(in[0].size()),
              wd = static_cast<int>(in[0][0].size());
    Maps out(filters, std::vector<std::vector<double>>(h, std::vector<double>(wd)));
    for (int f = 0; f < filters; ++f)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < wd; ++x) {
          double s = w[b_off + f];
          for (int c = 0; c < ch; ++c)
            for (int ky = 0; ky < 3; ++ky)
              for (int kx = 0; kx < 3; ++kx) {
                const int iy = y + ky - 1, ix = x + kx - 1;
                if (iy < 0 || iy >= h || ix < 0 || ix >= wd) continue;
                s += w[w_off + ((static_cast<std::size_t>(f) * ch + c) * 3 + ky) * 3 + kx] * in[c][iy][ix];
              }
          out[f][y][x] = s;
        }
    return out;
  };
  auto pool = [&](const Maps& in) {
    const int h = static_cast<int>(in[0].size()) / 2, wd = static_cast<int>(in[0][0].size()) / 2;
    Maps out(in.size(), std::vector<std::vector<double>>(h, std::vector<double>(wd)));
    for (std::size_t c = 0; c < in.size(); ++c)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < wd; ++x)
          out[c][y][x] = leaky(std::max({in[c][2 * y][2 * x], in[c][2 * y][2 * x + 1], in[c][2 * y + 1][2 * x],
                                         in[c][2 * y + 1][2 * x + 1]}));
    return out;
  };
  Maps input(1, std::vector<std::vector<double>>(A::in_height, std::vector<double>(A::in_width)));
  for (int y = 0; y < A::in_height; ++y)
    for (int x = 0; x < A::in_width; ++x) input[0][y][x] = img.at(y, x);
  const Maps p1 = pool(conv(input, A::conv1_filters, A::conv1_w_offset, A::conv1_b_offset));
  const Maps p2 = pool(conv(p1, A::conv2_filters, A::conv2_w_offset, A::conv2_b_offset));
  std::vector<double> flat;
  for (const auto& c : p2)
    for (const auto& row : c)
      for (double v : row) flat.push_back(v);
  FeatureVector out{};
  for (int o = 0; o < A::feature_dim; ++o) {
    double s = w[A::dense_b_offset + o];
    for (std::size_t i = 0; i < flat.size(); ++i) s += w[A::dense_w_offset + o * flat.size() + i] * flat[i];
    out[o] = s;
  }
  return out;
}

RenderedImage img(const char* s) { return render_string(std::string_view(s), *GlyphAtlas::bundled()); }

// Random biases so that pre-activations are not all tied at zero.
WeightSet random_weights(std::uint64_t seed) {
  WeightSet w = WeightSet::he_uniform(seed);
  Rng rng(seed ^ 0xb1a5);
  for (std::size_t i = A::conv1_b_offset; i < A::conv2_w_offset; ++i) w[i] = uniform_unit(rng) - 0.5;
  for (std::size_t i = A::conv2_b_offset; i < A::dense_w_offset; ++i) w[i] = uniform_unit(rng) - 0.5;
  return w;
}

}  // namespace

TEST_SUITE("net") {
  TEST_CASE("parameter layout") {
    CHECK(A::flat_size == 16 * 3 * 37);
    CHECK(A::param_count == 8 * 9 + 8 + 16 * 8 * 9 + 16 + 32 * 1776 + 32);
    CHECK(WeightSet::zeros().size() == 58112);
  }

  TEST_CASE("zero weights give the zero feature") {
    const auto f = forward(WeightSet::zeros(), img("svchost.exe"));
    for (double v : f) CHECK(v == 0.0);
  }

  TEST_CASE("forward matches the nested-loop oracle") {
    const char* texts[] = {"svchost.exe", "l", "iexplore.exe", "WWWWWWWWWWWW.com", "gооgle.com"};
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const WeightSet w = random_weights(seed);
      for (const char* t : texts) {
        const auto fast = forward(w, img(t), 0.01);
        const auto slow = naive_forward(w, img(t), 0.01);
        for (int k = 0; k < A::feature_dim; ++k) CHECK(fast[k] == doctest::Approx(slow[k]).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("he_uniform is seeded and finite") {
    CHECK(WeightSet::he_uniform(7) == WeightSet::he_uniform(7));
    CHECK_FALSE(WeightSet::he_uniform(7) == WeightSet::he_uniform(8));
    CHECK(WeightSet::he_uniform(7).all_finite());
    const WeightSet w = WeightSet::he_uniform(7);
    for (std::size_t i = A::conv1_b_offset; i < A::conv2_w_offset; ++i) CHECK(w[i] == 0.0);
  }

  TEST_CASE("distance") {
    FeatureVector a{}, b{};
    CHECK(distance(a, a) == 0.0);
    a[0] = 3;
    b[1] = 4;
    CHECK(distance(a, b) == 5.0);
    CHECK(distance(b, a) == 5.0);
    Rng rng(11);
    for (int t = 0; t < 200; ++t) {
      FeatureVector x, y, z;
      for (int k = 0; k < A::feature_dim; ++k) {
        x[k] = uniform_unit(rng);
        y[k] = uniform_unit(rng);
        z[k] = uniform_unit(rng);
      }
      CHECK(distance(x, z) <= distance(x, y) + distance(y, z) + 1e-12);
    }
  }

  TEST_CASE("contrastive loss") {
    CHECK(contrastive_loss(0.0, 0, 1.0) == 0.0);
    CHECK(contrastive_loss(0.5, 0, 1.0) == 0.25);
    CHECK(contrastive_loss(0.5, 1, 1.0) == 0.25);
    CHECK(contrastive_loss(1.0, 1, 1.0) == 0.0);
    CHECK(contrastive_loss(2.0, 1, 1.0) == 0.0);
    CHECK(contrastive_loss(0.0, 1, 1.0) == 1.0);
    double prev = -1;
    for (double d = 0; d < 3; d += 0.125) {
      CHECK(contrastive_loss(d, 0, 1.0) > prev);
      prev = contrastive_loss(d, 0, 1.0);
      CHECK(contrastive_loss(d, 1, 1.0) >= 0.0);
    }
  }

  TEST_CASE("gradient vanishes where the loss is flat") {
    const WeightSet w = random_weights(5);
    const auto a = img("svchost.exe"), b = img("notepad.exe");
    const double d = distance(forward(w, a), forward(w, b));
    REQUIRE(d > 0);
    const GradientSet g1 = backward(w, a, b, 1, d / 2);
    for (double v : g1.values()) CHECK(v == 0.0);
    const GradientSet g0 = backward(w, a, a, 0);
    for (double v : g0.values()) CHECK(v == 0.0);
  }

  TEST_CASE("backward matches central differences") {
    const char* pairs[][2] = {{"svchost.exe", "svch0st.exe"}, {"lsass.exe", "ls4ss.exe"}, {"paypal.com", "bank.org"}};
    Rng rng(3);
    int checked = 0;
    for (int t = 0; t < 6; ++t) {
      const WeightSet w = random_weights(100 + static_cast<std::uint64_t>(t));
      const auto& p = pairs[t % 3];
      std::vector<std::size_t> idx;
      // Always include every conv1 parameter, plus random deeper ones.
      for (std::size_t i = 0; i < A::conv2_w_offset; ++i) idx.push_back(i);
      for (int k = 0; k < 40; ++k) idx.push_back(uniform_index(rng, A::param_count));
      const int label = t % 2;
      // For y=1 put the margin just past d so the hinge is active and the
      // loss stays O(1).
      const double d = distance(forward(w, img(p[0])), forward(w, img(p[1])));
      const double margin = label == 1 ? d + 1.0 : 1.0;
      const auto r = testing::gradient_check(w, img(p[0]), img(p[1]), label, margin, 0.01, idx);
      CHECK(r.failed == 0);
      CHECK(r.worst_rel <= 1e-4);
      checked += r.checked;
    }
    CHECK(checked >= 100);
  }
}
