#include "homoglyph/train.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>

#include "homoglyph/errors.hpp"
#include "homoglyph/rng.hpp"

namespace homoglyph {

namespace {

struct IndexedPairs {
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> labels;
};

// Renders each distinct string once and maps pairs onto image indices.
class ImageCache {
 public:
  explicit ImageCache(const GlyphAtlas& atlas) : atlas_(atlas) {}

  IndexedPairs add(const PairList& pairs) {
    IndexedPairs out;
    out.pairs.reserve(pairs.size());
    out.labels.reserve(pairs.size());
    for (const PairExample& p : pairs) {
      out.pairs.emplace_back(intern(p.s1), intern(p.s2));
      out.labels.push_back(p.label);
    }
    return out;
  }
  const std::vector<RenderedImage>& images() const { return images_; }

 private:
  int intern(const std::string& s) {
    auto [it, inserted] = ids_.try_emplace(s, static_cast<int>(images_.size()));
    if (inserted) images_.push_back(render_string(std::string_view(s), atlas_));
    return it->second;
  }

  const GlyphAtlas& atlas_;
  std::unordered_map<std::string, int> ids_;
  std::vector<RenderedImage> images_;
};

void require_both_labels(const PairList& pairs, const char* which) {
  if (pairs.empty()) throw InvalidArgument(std::string(which) + " set is empty");
  bool has0 = false, has1 = false;
  for (const auto& p : pairs) {
    if (p.label == kLabelSpoof) has0 = true;
    else if (p.label == kLabelBenign) has1 = true;
    else throw InvalidArgument(std::string(which) + " set contains a label other than 0/1");
  }
  if (!has0 || !has1) throw InvalidArgument(std::string(which) + " set must contain both labels");
}

}  // namespace

void TrainConfig::validate() const {
  if (!(margin > 0.0)) throw InvalidArgument("margin must be positive");
  if (batch_size < 1) throw InvalidArgument("batch_size must be at least 1");
  if (!(rmsprop_decay > 0.0 && rmsprop_decay < 1.0)) {
    throw InvalidArgument("rmsprop_decay must lie in (0, 1)");
  }
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be positive");
  if (epochs < 1) throw InvalidArgument("epochs must be at least 1");
  if (early_stop_patience < 0) throw InvalidArgument("early_stop_patience must be >= 0");
  if (!(leaky_slope >= 0.0 && leaky_slope < 1.0)) throw InvalidArgument("leaky_slope must lie in [0, 1)");
}

void rmsprop_update(std::span<double> w, std::span<const double> g,
                    std::span<double> mean_square, double learning_rate, double decay) {
  if (w.size() != g.size() || w.size() != mean_square.size()) {
    throw InvalidArgument("rmsprop: parameter, gradient and state sizes differ");
  }
  std::vector<double> new_w(w.size());
  std::vector<double> new_ms(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    new_ms[i] = decay * mean_square[i] + (1.0 - decay) * g[i] * g[i];
    new_w[i] = w[i] - learning_rate * g[i] / (std::sqrt(new_ms[i]) + kRmsPropEpsilon);
    if (!std::isfinite(new_w[i]) || !std::isfinite(new_ms[i])) {
      throw NonFiniteUpdate("rmsprop produced a non-finite value at parameter " + std::to_string(i));
    }
  }
  std::copy(new_w.begin(), new_w.end(), w.begin());
  std::copy(new_ms.begin(), new_ms.end(), mean_square.begin());
}

void rmsprop_step(WeightSet& w, const GradientSet& g, RmsPropState& state,
                  const TrainConfig& cfg) {
  rmsprop_update(w.values(), g.values(), state.mean_square, cfg.learning_rate, cfg.rmsprop_decay);
}

double mean_loss(const WeightSet& w, const std::vector<RenderedImage>& images,
                 const std::vector<std::pair<int, int>>& pairs, const std::vector<int>& labels,
                 double margin, double leaky_slope) {
  if (pairs.empty()) return 0.0;
  // Embed each referenced image once.
  std::vector<FeatureVector> features(images.size());
  std::vector<char> done(images.size(), 0);
  Workspace ws;
  auto embed = [&](int id) -> const FeatureVector& {
    if (!done[id]) {
      features[id] = forward(w, images[id], leaky_slope, ws);
      done[id] = 1;
    }
    return features[id];
  };
  double total = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double d = distance(embed(pairs[i].first), embed(pairs[i].second));
    total += contrastive_loss(d, labels[i], margin);
  }
  return total / static_cast<double>(pairs.size());
}

double mean_loss(const WeightSet& w, const PairList& pairs, const GlyphAtlas& atlas,
                 double margin, double leaky_slope) {
  ImageCache cache(atlas);
  const IndexedPairs ip = cache.add(pairs);
  return mean_loss(w, cache.images(), ip.pairs, ip.labels, margin, leaky_slope);
}

TrainResult train(const PairList& train_pairs, const PairList& val_pairs, const GlyphAtlas& atlas,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  require_both_labels(train_pairs, "training");
  require_both_labels(val_pairs, "validation");

  ImageCache cache(atlas);
  const IndexedPairs tr = cache.add(train_pairs);
  const IndexedPairs va = cache.add(val_pairs);
  const auto& images = cache.images();

  TrainResult result;
  WeightSet w = WeightSet::he_uniform(mix_seed(cfg.rng_seed, 0));
  Rng shuffle_rng(mix_seed(cfg.rng_seed, 1));
  RmsPropState state;
  GradientSet grad;
  Workspace ws1, ws2;

  std::vector<std::size_t> order(tr.pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  double best_val = std::numeric_limits<double>::infinity();
  int stale = 0;
  result.weights = w;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    shuffle(std::span<std::size_t>(order), shuffle_rng);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      grad.set_zero();
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        epoch_loss += accumulate_pair_gradient(w, images[tr.pairs[i].first], images[tr.pairs[i].second],
                                               tr.labels[i], cfg.margin, cfg.leaky_slope, grad, ws1,
                                               ws2);
      }
      grad *= 1.0 / static_cast<double>(end - start);
      rmsprop_step(w, grad, state, cfg);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / static_cast<double>(order.size());
    rec.val_loss = mean_loss(w, images, va.pairs, va.labels, cfg.margin, cfg.leaky_slope);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!std::isfinite(rec.train_loss) || !std::isfinite(rec.val_loss)) {
      throw NonFiniteUpdate("loss became non-finite in epoch " + std::to_string(epoch));
    }
    result.history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (rec.val_loss < best_val) {
      best_val = rec.val_loss;
      result.weights = w;
      result.best_epoch = epoch;
      stale = 0;
    } else if (++stale > cfg.early_stop_patience) {
      break;
    }
  }
  return result;
}

}  // namespace homoglyph
