#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "homoglyph/net.hpp"
#include "homoglyph/pairs.hpp"
#include "homoglyph/render.hpp"

namespace homoglyph {

inline constexpr std::uint64_t kDefaultSeed = 20171103;

struct TrainConfig {
  double margin = kDefaultMargin;
  int batch_size = 8;
  double learning_rate = 1e-3;
  double rmsprop_decay = 0.9;
  int epochs = 25;
  int early_stop_patience = 5;
  double leaky_slope = kDefaultLeakySlope;
  std::uint64_t rng_seed = kDefaultSeed;

  /// Throws InvalidArgument when an invariant is violated.
  void validate() const;
};

inline constexpr double kRmsPropEpsilon = 1e-8;

/// Running average of squared gradients, one entry per parameter.
struct RmsPropState {
  std::vector<double> mean_square = std::vector<double>(Architecture::param_count, 0.0);
};

/// state <- decay*state + (1-decay)*g^2; w <- w - lr*g/(sqrt(state)+eps).
/// Throws NonFiniteUpdate, leaving `w` and `state` untouched, if any updated
/// value would be NaN or infinite.
void rmsprop_step(WeightSet& w, const GradientSet& g, RmsPropState& state,
                  const TrainConfig& cfg);

/// Elementwise RMSProp on an arbitrary parameter vector (used by the toy
/// objective checks and by rmsprop_step).
void rmsprop_update(std::span<double> w, std::span<const double> g,
                    std::span<double> mean_square, double learning_rate, double decay);

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double seconds = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

struct TrainResult {
  WeightSet weights;   // weights from the epoch with minimum validation loss
  TrainHistory history;
  int best_epoch = 0;  // 1-based
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mean contrastive loss per pair.
double mean_loss(const WeightSet& w, const std::vector<RenderedImage>& images,
                 const std::vector<std::pair<int, int>>& pairs, const std::vector<int>& labels,
                 double margin, double leaky_slope);

double mean_loss(const WeightSet& w, const PairList& pairs, const GlyphAtlas& atlas,
                 double margin, double leaky_slope);

/// Mini-batch RMSProp training with validation-based model selection and
/// early stopping. Stops once more than `early_stop_patience` consecutive
/// epochs fail to improve the best validation loss.
TrainResult train(const PairList& train_pairs, const PairList& val_pairs, const GlyphAtlas& atlas,
                  const TrainConfig& cfg, const EpochCallback& on_epoch = {});

}  // namespace homoglyph
