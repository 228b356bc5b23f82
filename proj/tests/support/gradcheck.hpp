#pragma once

// Central finite-difference check of the Siamese gradient, shared by the unit
// and acceptance tests.

#include <algorithm>
#include <cmath>
#include <vector>

#include "homoglyph/net.hpp"

namespace homoglyph::testing {

/// Every piecewise-linear decision the loss depends on: signs of the
/// pre-activations, max-pool winners, and which side of the hinge d falls.
inline std::vector<int> activation_pattern(const WeightSet& w, const RenderedImage& a, const RenderedImage& b,
                                           int label, double margin, double slope) {
  std::vector<int> p;
  Workspace wa, wb;
  const auto fa = forward(w, a, slope, wa);
  const auto fb = forward(w, b, slope, wb);
  for (const Workspace* ws : {&wa, &wb}) {
    for (Eigen::Index i = 0; i < ws->z1.size(); ++i) p.push_back(ws->z1.data()[i] > 0);
    for (Eigen::Index i = 0; i < ws->z2.size(); ++i) p.push_back(ws->z2.data()[i] > 0);
    p.insert(p.end(), ws->arg1.begin(), ws->arg1.end());
    p.insert(p.end(), ws->arg2.begin(), ws->arg2.end());
  }
  if (label == 1) p.push_back(distance(fa, fb) < margin);
  return p;
}

struct GradCheck {
  int checked = 0;
  int skipped_kink = 0;
  int failed = 0;
  double worst_rel = 0.0;
};

/// Compares backward() with (L(w+h) - L(w-h)) / 2h on `indices`. Parameters
/// whose +-h perturbation changes the activation pattern sit next to a kink
/// and are skipped.
inline GradCheck gradient_check(const WeightSet& w, const RenderedImage& a, const RenderedImage& b, int label,
                                double margin, double slope, const std::vector<std::size_t>& indices,
                                double h = 1e-5, double tol = 1e-4) {
  GradCheck out;
  const GradientSet g = backward(w, a, b, label, margin, slope);
  const auto base = activation_pattern(w, a, b, label, margin, slope);
  auto loss = [&](const WeightSet& ww) {
    return contrastive_loss(distance(forward(ww, a, slope), forward(ww, b, slope)), label, margin);
  };
  for (std::size_t idx : indices) {
    WeightSet plus = w, minus = w;
    plus[idx] += h;
    minus[idx] -= h;
    if (activation_pattern(plus, a, b, label, margin, slope) != base ||
        activation_pattern(minus, a, b, label, margin, slope) != base) {
      ++out.skipped_kink;
      continue;
    }
    const double numeric = (loss(plus) - loss(minus)) / (2 * h);
    const double analytic = g[idx];
    const double scale = std::max(std::abs(numeric), std::abs(analytic));
    // Below ~1e-8 the difference quotient is dominated by rounding noise.
    const double rel = scale < 1e-8 ? 0.0 : std::abs(numeric - analytic) / scale;
    out.worst_rel = std::max(out.worst_rel, rel);
    ++out.checked;
    if (rel > tol) ++out.failed;
  }
  return out;
}

}  // namespace homoglyph::testing
