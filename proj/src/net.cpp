#include "homoglyph/net.hpp"

#include <algorithm>
#include <cmath>

#include "homoglyph/rng.hpp"

namespace homoglyph {

namespace {

using A = Architecture;
using RowMatrix = Workspace::RowMatrix;
using ConstRowMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using RowMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;
using VecMap = Eigen::Map<Eigen::VectorXd>;

constexpr int kTaps = A::kernel * A::kernel;
constexpr double kMinDistance = 1e-12;

inline double leaky(double z, double slope) { return z > 0.0 ? z : slope * z; }
inline double leaky_grad(double z, double slope) { return z > 0.0 ? 1.0 : slope; }

// Fills `col` (rows = H*W output positions, cols = channels*9 taps) for a
// same-padded 3x3 convolution over `channels` maps of size h x w stored
// column-per-channel in `input`.
template <typename Input>
void im2col(const Input& input, int channels, int h, int w, RowMatrix& col) {
  col.setZero();
  for (int c = 0; c < channels; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double* row = col.data() + static_cast<std::ptrdiff_t>(y * w + x) * col.cols() + c * kTaps;
        for (int ky = 0; ky < A::kernel; ++ky) {
          const int iy = y + ky - 1;
          if (iy < 0 || iy >= h) continue;
          for (int kx = 0; kx < A::kernel; ++kx) {
            const int ix = x + kx - 1;
            if (ix < 0 || ix >= w) continue;
            row[ky * A::kernel + kx] = input(iy * w + ix, c);
          }
        }
      }
    }
  }
}

// 2x2 stride-2 max pool with floor semantics over leaky(z). Records the
// argmax input position (first maximum in scan order) for each output cell.
void maxpool(const Eigen::MatrixXd& z, int channels, int h, int w, double slope,
             Eigen::MatrixXd& out, std::vector<int>& arg) {
  const int oh = h / A::pool;
  const int ow = w / A::pool;
  for (int c = 0; c < channels; ++c) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        int best = (oy * A::pool) * w + ox * A::pool;
        double best_val = z(best, c);
        for (int dy = 0; dy < A::pool; ++dy) {
          for (int dx = 0; dx < A::pool; ++dx) {
            const int pos = (oy * A::pool + dy) * w + ox * A::pool + dx;
            if (z(pos, c) > best_val) {
              best_val = z(pos, c);
              best = pos;
            }
          }
        }
        const int cell = oy * ow + ox;
        out(cell, c) = leaky(best_val, slope);
        arg[static_cast<std::size_t>(c) * oh * ow + cell] = best;
      }
    }
  }
}

// Backpropagates feature gradient `gf` through one branch whose activations
// are held in `ws`, accumulating parameter gradients into `grad`.
void backward_branch(const WeightSet& w, const Workspace& ws, const Eigen::VectorXd& gf,
                     double slope, GradientSet& grad) {
  auto params = w.values();
  auto g = grad.values();

  // Dense layer.
  const ConstVecMap flat(ws.p2.data(), A::flat_size);
  RowMap d_dense(g.data() + A::dense_w_offset, A::feature_dim, A::flat_size);
  d_dense.noalias() += gf * flat.transpose();
  VecMap(g.data() + A::dense_b_offset, A::feature_dim) += gf;
  const ConstRowMap dense(params.data() + A::dense_w_offset, A::feature_dim, A::flat_size);
  const Eigen::VectorXd g_flat = dense.transpose() * gf;

  // Pool 2 + leaky 2 + conv2: only argmax positions receive gradient.
  const int cells2 = A::h2 * A::w2;
  const ConstRowMap w2(params.data() + A::conv2_w_offset, A::conv2_filters, A::conv1_filters * kTaps);
  RowMap dw2(g.data() + A::conv2_w_offset, A::conv2_filters, A::conv1_filters * kTaps);
  double* db2 = g.data() + A::conv2_b_offset;
  RowMatrix g_col2 = RowMatrix::Zero(A::h1 * A::w1, A::conv1_filters * kTaps);
  for (int f = 0; f < A::conv2_filters; ++f) {
    for (int cell = 0; cell < cells2; ++cell) {
      const double gp = g_flat[f * cells2 + cell];
      if (gp == 0.0) continue;
      const int pos = ws.arg2[static_cast<std::size_t>(f) * cells2 + cell];
      const double gz = gp * leaky_grad(ws.z2(pos, f), slope);
      dw2.row(f) += gz * ws.col2.row(pos);
      db2[f] += gz;
      g_col2.row(pos) += gz * w2.row(f);
    }
  }

  // col2im back onto the pooled layer-1 maps.
  Eigen::MatrixXd g_p1 = Eigen::MatrixXd::Zero(A::h1 * A::w1, A::conv1_filters);
  for (int y = 0; y < A::h1; ++y) {
    for (int x = 0; x < A::w1; ++x) {
      const auto row = g_col2.row(y * A::w1 + x);
      for (int c = 0; c < A::conv1_filters; ++c) {
        for (int ky = 0; ky < A::kernel; ++ky) {
          const int iy = y + ky - 1;
          if (iy < 0 || iy >= A::h1) continue;
          for (int kx = 0; kx < A::kernel; ++kx) {
            const int ix = x + kx - 1;
            if (ix < 0 || ix >= A::w1) continue;
            g_p1(iy * A::w1 + ix, c) += row[c * kTaps + ky * A::kernel + kx];
          }
        }
      }
    }
  }

  // Pool 1 + leaky 1 + conv1.
  const int cells1 = A::h1 * A::w1;
  RowMap dw1(g.data() + A::conv1_w_offset, A::conv1_filters, kTaps);
  double* db1 = g.data() + A::conv1_b_offset;
  for (int c = 0; c < A::conv1_filters; ++c) {
    for (int cell = 0; cell < cells1; ++cell) {
      const double gp = g_p1(cell, c);
      if (gp == 0.0) continue;
      const int pos = ws.arg1[static_cast<std::size_t>(c) * cells1 + cell];
      const double gz = gp * leaky_grad(ws.z1(pos, c), slope);
      dw1.row(c) += gz * ws.col1.row(pos);
      db1[c] += gz;
    }
  }
}

}  // namespace

WeightSet WeightSet::he_uniform(std::uint64_t seed) {
  WeightSet w;
  Rng rng(seed);
  auto fill = [&](std::size_t offset, std::size_t count, double fan_in) {
    const double bound = std::sqrt(6.0 / fan_in);
    for (std::size_t i = 0; i < count; ++i) w.values_[offset + i] = uniform_real(rng, -bound, bound);
  };
  fill(A::conv1_w_offset, A::conv1_weights, kTaps);
  fill(A::conv2_w_offset, A::conv2_weights, A::conv1_filters * kTaps);
  fill(A::dense_w_offset, A::dense_weights, A::flat_size);
  return w;
}

bool WeightSet::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void WeightSet::set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

WeightSet& WeightSet::operator+=(const WeightSet& other) {
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

WeightSet& WeightSet::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

Workspace::Workspace()
    : col1(A::in_height * A::in_width, kTaps),
      z1(A::in_height * A::in_width, A::conv1_filters),
      p1(A::h1 * A::w1, A::conv1_filters),
      arg1(static_cast<std::size_t>(A::conv1_filters) * A::h1 * A::w1),
      col2(A::h1 * A::w1, A::conv1_filters * kTaps),
      z2(A::h1 * A::w1, A::conv2_filters),
      p2(A::h2 * A::w2, A::conv2_filters),
      arg2(static_cast<std::size_t>(A::conv2_filters) * A::h2 * A::w2),
      feature(A::feature_dim) {}

FeatureVector forward(const WeightSet& w, const RenderedImage& img, double leaky_slope) {
  Workspace ws;
  return forward(w, img, leaky_slope, ws);
}

FeatureVector forward(const WeightSet& w, const RenderedImage& img, double leaky_slope,
                      Workspace& ws) {
  const auto params = w.values();

  // conv1 over the binary image.
  auto pixel = [&img](int pos, int) { return static_cast<double>(img.pixels[pos]); };
  im2col(pixel, 1, A::in_height, A::in_width, ws.col1);
  const ConstRowMap w1(params.data() + A::conv1_w_offset, A::conv1_filters, kTaps);
  const ConstVecMap b1(params.data() + A::conv1_b_offset, A::conv1_filters);
  ws.z1.noalias() = ws.col1 * w1.transpose();
  ws.z1.rowwise() += b1.transpose();
  maxpool(ws.z1, A::conv1_filters, A::in_height, A::in_width, leaky_slope, ws.p1, ws.arg1);

  // conv2.
  im2col(ws.p1, A::conv1_filters, A::h1, A::w1, ws.col2);
  const ConstRowMap w2(params.data() + A::conv2_w_offset, A::conv2_filters, A::conv1_filters * kTaps);
  const ConstVecMap b2(params.data() + A::conv2_b_offset, A::conv2_filters);
  ws.z2.noalias() = ws.col2 * w2.transpose();
  ws.z2.rowwise() += b2.transpose();
  maxpool(ws.z2, A::conv2_filters, A::h1, A::w1, leaky_slope, ws.p2, ws.arg2);

  // Dense.
  const ConstVecMap flat(ws.p2.data(), A::flat_size);
  const ConstRowMap dense(params.data() + A::dense_w_offset, A::feature_dim, A::flat_size);
  const ConstVecMap bd(params.data() + A::dense_b_offset, A::feature_dim);
  ws.feature.noalias() = dense * flat;
  ws.feature += bd;

  FeatureVector out;
  std::copy(ws.feature.data(), ws.feature.data() + A::feature_dim, out.begin());
  return out;
}

double distance(const FeatureVector& a, const FeatureVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double contrastive_loss(double d, int label, double margin) {
  if (label == 0) return d * d;
  const double hinge = std::max(0.0, margin - d);
  return hinge * hinge;
}

double accumulate_pair_gradient(const WeightSet& w, const RenderedImage& img1,
                                const RenderedImage& img2, int label, double margin,
                                double leaky_slope, GradientSet& grad, Workspace& ws1,
                                Workspace& ws2) {
  const FeatureVector f1 = forward(w, img1, leaky_slope, ws1);
  const FeatureVector f2 = forward(w, img2, leaky_slope, ws2);
  Eigen::VectorXd diff(A::feature_dim);
  for (int i = 0; i < A::feature_dim; ++i) diff[i] = f1[i] - f2[i];
  const double d = diff.norm();
  const double loss = contrastive_loss(d, label, margin);

  // dL/df1; dL/df2 is its negation.
  Eigen::VectorXd g;
  if (label == 0) {
    g = 2.0 * diff;
  } else {
    if (d >= margin) return loss;
    g = (-2.0 * (margin - d) / std::max(d, kMinDistance)) * diff;
  }
  if (g.isZero(0.0)) return loss;
  backward_branch(w, ws1, g, leaky_slope, grad);
  backward_branch(w, ws2, -g, leaky_slope, grad);
  return loss;
}

GradientSet backward(const WeightSet& w, const RenderedImage& img1, const RenderedImage& img2,
                     int label, double margin, double leaky_slope) {
  GradientSet grad;
  Workspace ws1, ws2;
  accumulate_pair_gradient(w, img1, img2, label, margin, leaky_slope, grad, ws1, ws2);
  return grad;
}

}  // namespace homoglyph
