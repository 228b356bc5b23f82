#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "homoglyph/render.hpp"

namespace homoglyph {

// Fixed embedder architecture:
//   12x150 -> conv 3x3 (8) -> leaky -> maxpool 2 -> 6x75
//          -> conv 3x3 (16) -> leaky -> maxpool 2 -> 3x37 -> dense -> 32
struct Architecture {
  static constexpr int in_height = kImageHeight;
  static constexpr int in_width = kImageWidth;
  static constexpr int kernel = 3;
  static constexpr int pool = 2;
  static constexpr int conv1_filters = 8;
  static constexpr int conv2_filters = 16;
  static constexpr int feature_dim = 32;

  static constexpr int h1 = in_height / pool;  // 6
  static constexpr int w1 = in_width / pool;   // 75
  static constexpr int h2 = h1 / pool;         // 3
  static constexpr int w2 = w1 / pool;         // 37
  static constexpr int flat_size = conv2_filters * h2 * w2;

  static constexpr std::size_t conv1_weights = conv1_filters * kernel * kernel;
  static constexpr std::size_t conv1_bias = conv1_filters;
  static constexpr std::size_t conv2_weights = conv2_filters * conv1_filters * kernel * kernel;
  static constexpr std::size_t conv2_bias = conv2_filters;
  static constexpr std::size_t dense_weights = static_cast<std::size_t>(feature_dim) * flat_size;
  static constexpr std::size_t dense_bias = feature_dim;

  // Offsets of each block in the flat parameter vector.
  static constexpr std::size_t conv1_w_offset = 0;
  static constexpr std::size_t conv1_b_offset = conv1_w_offset + conv1_weights;
  static constexpr std::size_t conv2_w_offset = conv1_b_offset + conv1_bias;
  static constexpr std::size_t conv2_b_offset = conv2_w_offset + conv2_weights;
  static constexpr std::size_t dense_w_offset = conv2_b_offset + conv2_bias;
  static constexpr std::size_t dense_b_offset = dense_w_offset + dense_weights;
  static constexpr std::size_t param_count = dense_b_offset + dense_bias;
};

static_assert(Architecture::flat_size == 1776);
static_assert(Architecture::param_count == 58112);

inline constexpr double kDefaultLeakySlope = 0.01;
inline constexpr double kDefaultMargin = 1.0;

/// All learnable parameters in one flat vector, laid out as
/// conv1 weights [f][ky][kx], conv1 bias, conv2 weights [f][c][ky][kx],
/// conv2 bias, dense weights [out][in] (row-major), dense bias.
/// Gradients use the same type and layout.
class WeightSet {
 public:
  WeightSet() : values_(Architecture::param_count, 0.0) {}

  static WeightSet zeros() { return WeightSet(); }
  /// Uniform He fan-in initialisation, biases zero.
  static WeightSet he_uniform(std::uint64_t seed);

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  bool all_finite() const;
  void set_zero();
  WeightSet& operator+=(const WeightSet& other);
  WeightSet& operator*=(double s);
  bool operator==(const WeightSet& other) const { return values_ == other.values_; }

 private:
  std::vector<double> values_;
};

using GradientSet = WeightSet;

using FeatureVector = std::array<double, Architecture::feature_dim>;

/// Scratch buffers for one forward/backward pass. Reuse across calls to avoid
/// allocation; one per thread.
struct Workspace {
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using ColMatrix = Eigen::MatrixXd;

  RowMatrix col1;   // (12*150) x 9 im2col of the input
  ColMatrix z1;     // (12*150) x 8 pre-activation, one column per channel
  ColMatrix p1;     // (6*75) x 8 pooled activations
  std::vector<int> arg1;  // argmax position per pooled cell of layer 1
  RowMatrix col2;   // (6*75) x 72 im2col of p1
  ColMatrix z2;     // (6*75) x 16
  ColMatrix p2;     // (3*37) x 16, column-major storage == flatten order
  std::vector<int> arg2;
  Eigen::VectorXd feature;

  Workspace();
};

FeatureVector forward(const WeightSet& w, const RenderedImage& img,
                      double leaky_slope = kDefaultLeakySlope);
/// Forward pass that keeps intermediate activations in `ws` for backward.
FeatureVector forward(const WeightSet& w, const RenderedImage& img, double leaky_slope,
                      Workspace& ws);

double distance(const FeatureVector& a, const FeatureVector& b);

/// y = 0 (similar): d^2. y = 1 (dissimilar): max(0, margin - d)^2.
double contrastive_loss(double d, int label, double margin);

/// Adds d(loss)/d(weights) for one Siamese pair into `grad` and returns the
/// pair's loss. Both branches share `w`, so their contributions are summed.
double accumulate_pair_gradient(const WeightSet& w, const RenderedImage& img1,
                                const RenderedImage& img2, int label, double margin,
                                double leaky_slope, GradientSet& grad, Workspace& ws1,
                                Workspace& ws2);

/// Exact gradient of contrastive_loss(distance(g(img1), g(img2)), label, margin).
GradientSet backward(const WeightSet& w, const RenderedImage& img1, const RenderedImage& img2,
                     int label, double margin = kDefaultMargin,
                     double leaky_slope = kDefaultLeakySlope);

}  // namespace homoglyph
