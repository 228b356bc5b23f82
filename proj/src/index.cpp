#include "homoglyph/index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <unordered_set>

#include "homoglyph/errors.hpp"
#include "homoglyph/model_io.hpp"
#include "homoglyph/rng.hpp"

namespace homoglyph {

namespace {

constexpr char kIndexMagic[8] = {'H', 'G', 'K', 'D', 'F', 'R', 'S', 'T'};
constexpr std::uint32_t kIndexFormatVersion = 1;
// Relative slack on bound-vs-radius comparisons so rounding in the bound can
// never prune a point that ties the current radius.
constexpr double kPruneSlack = 1e-12;

double squared_distance(const FeatureVector& a, const FeatureVector& b) {
  double s = 0.0;
  for (int i = 0; i < kIndexDim; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

struct Candidate {
  double dist2;
  std::uint32_t id;
  bool operator<(const Candidate& o) const { return dist2 < o.dist2 || (dist2 == o.dist2 && id < o.id); }
};

// Bounded max-heap of the k best candidates.
class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) {}
  void offer(Candidate c) {
    if (heap_.size() < k_) {
      heap_.push(c);
    } else if (c < heap_.top()) {
      heap_.pop();
      heap_.push(c);
    }
  }
  double radius2() const {
    return heap_.size() < k_ ? std::numeric_limits<double>::infinity() : heap_.top().dist2;
  }
  std::vector<Candidate> sorted() {
    std::vector<Candidate> out;
    out.reserve(heap_.size());
    while (!heap_.empty()) {
      out.push_back(heap_.top());
      heap_.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

 private:
  std::size_t k_;
  std::priority_queue<Candidate> heap_;
};

QueryResult to_result(const std::vector<Candidate>& found, const std::vector<std::string>& labels,
                      int checks) {
  QueryResult r;
  r.checks_used = checks;
  r.neighbors.reserve(found.size());
  for (const Candidate& c : found) r.neighbors.push_back({c.id, labels[c.id], std::sqrt(c.dist2)});
  return r;
}

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<FeatureVector>& points, std::uint64_t seed)
      : points_(points), rng_(seed) {}

  KDTree build() {
    std::vector<std::uint32_t> ids(points_.size());
    std::iota(ids.begin(), ids.end(), 0u);
    tree_.nodes.reserve(2 * ids.size());
    grow(ids);
    return std::move(tree_);
  }

 private:
  std::int32_t grow(std::span<std::uint32_t> ids) {
    const auto self = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    if (ids.size() == 1) {
      tree_.nodes[self].point = static_cast<std::int32_t>(ids[0]);
      return self;
    }

    // Per-dimension variance, summed in ascending id order.
    std::array<double, kIndexDim> mean{}, var{};
    for (std::uint32_t id : ids) {
      for (int d = 0; d < kIndexDim; ++d) mean[d] += points_[id][d];
    }
    for (int d = 0; d < kIndexDim; ++d) mean[d] /= static_cast<double>(ids.size());
    for (std::uint32_t id : ids) {
      for (int d = 0; d < kIndexDim; ++d) {
        const double x = points_[id][d] - mean[d];
        var[d] += x * x;
      }
    }
    std::array<int, kIndexDim> dims;
    std::iota(dims.begin(), dims.end(), 0);
    std::stable_sort(dims.begin(), dims.end(), [&](int a, int b) { return var[a] > var[b]; });
    const int dim = dims[uniform_index(rng_, kTopVarianceDims)];

    // Median split on (value, id).
    const std::size_t mid = ids.size() / 2;
    auto less = [&](std::uint32_t a, std::uint32_t b) {
      const double va = points_[a][dim], vb = points_[b][dim];
      return va < vb || (va == vb && a < b);
    };
    std::nth_element(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(mid), ids.end(), less);
    const double right_min = points_[ids[mid]][dim];
    double left_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mid; ++i) left_max = std::max(left_max, points_[ids[i]][dim]);

    auto left = ids.subspan(0, mid);
    auto right = ids.subspan(mid);
    std::sort(left.begin(), left.end());
    std::sort(right.begin(), right.end());

    const std::int32_t l = grow(left);
    const std::int32_t r = grow(right);
    KDNode& node = tree_.nodes[self];
    node.split_dim = dim;
    node.split_value = left_max + (right_min - left_max) * 0.5;
    node.left = l;
    node.right = r;
    return self;
  }

  const std::vector<FeatureVector>& points_;
  Rng rng_;
  KDTree tree_;
};

}  // namespace

KDForest KDForest::build(std::vector<FeatureVector> points, std::vector<std::string> labels,
                         int num_trees, std::uint64_t seed) {
  if (points.empty()) throw EmptyIndex("cannot build an index over zero points");
  if (labels.size() != points.size()) throw InvalidArgument("points and labels differ in length");
  if (num_trees < 1) throw InvalidArgument("num_trees must be at least 1");
  if (points.size() > static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max() / 2)) {
    throw InvalidArgument("too many points for 32-bit node indices");
  }
  for (const auto& p : points) {
    for (double v : p) {
      if (!std::isfinite(v)) throw InvalidArgument("feature vectors must be finite");
    }
  }
  KDForest forest;
  forest.points_ = std::move(points);
  forest.labels_ = std::move(labels);
  forest.seed_ = seed;
  forest.trees_.reserve(num_trees);
  for (int t = 0; t < num_trees; ++t) {
    forest.trees_.push_back(TreeBuilder(forest.points_, mix_seed(seed, t)).build());
  }
  return forest;
}

// Best-bin-first over all trees. Queue entries carry a lower bound on the
// squared distance from q to the branch's cell; the per-dimension offsets
// that make up that bound live in `offsets` so repeated splits on one
// dimension replace rather than add to its contribution.
template <typename Visit>
int KDForest::search(const FeatureVector& q, int checks, Visit&& visit) const {
  struct Entry {
    double bound;
    std::uint64_t seq;
    std::int32_t tree;
    std::int32_t node;
    std::size_t slot;
    bool operator>(const Entry& o) const { return bound > o.bound || (bound == o.bound && seq > o.seq); }
  };
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> queue;
  std::vector<double> offsets(kIndexDim, 0.0);  // slot 0: all-zero offsets
  std::uint64_t seq = 0;
  for (int t = 0; t < num_trees(); ++t) queue.push({0.0, seq++, t, 0, 0});

  std::unordered_set<std::uint32_t> scored;
  scored.reserve(static_cast<std::size_t>(std::min<std::size_t>(checks, points_.size())) * 2);
  std::array<double, kIndexDim> cur{};
  int visited = 0;

  while (!queue.empty() && visited < checks) {
    const Entry e = queue.top();
    queue.pop();
    double limit = visit.radius2();
    if (e.bound > limit * (1.0 + kPruneSlack)) break;

    std::copy_n(offsets.begin() + static_cast<std::ptrdiff_t>(e.slot * kIndexDim), kIndexDim, cur.begin());
    double bound = e.bound;
    const KDTree& tree = trees_[e.tree];
    std::int32_t n = e.node;
    while (!tree.nodes[n].is_leaf()) {
      const KDNode& node = tree.nodes[n];
      const int d = node.split_dim;
      const double gap = q[d] - node.split_value;
      const bool go_left = gap < 0.0;
      const std::int32_t near = go_left ? node.left : node.right;
      const std::int32_t far = go_left ? node.right : node.left;
      const double far_bound = bound - cur[d] * cur[d] + gap * gap;
      if (far_bound <= limit * (1.0 + kPruneSlack)) {
        const std::size_t slot = offsets.size() / kIndexDim;
        offsets.insert(offsets.end(), cur.begin(), cur.end());
        offsets[slot * kIndexDim + d] = gap;
        queue.push({far_bound, seq++, e.tree, far, slot});
      }
      n = near;
    }
    ++visited;
    const auto id = static_cast<std::uint32_t>(tree.nodes[n].point);
    if (scored.insert(id).second) visit.offer({squared_distance(q, points_[id]), id});
  }
  return visited;
}

QueryResult KDForest::query(const FeatureVector& q, int k, int checks) const {
  if (points_.empty()) throw EmptyIndex("query on an empty index");
  if (k < 1) throw InvalidArgument("k must be at least 1");
  if (checks < 1) throw InvalidArgument("checks must be at least 1");
  TopK top(static_cast<std::size_t>(k));
  const int used = search(q, checks, top);
  return to_result(top.sorted(), labels_, used);
}

QueryResult KDForest::query_radius(const FeatureVector& q, double threshold, int checks) const {
  if (points_.empty()) throw EmptyIndex("query on an empty index");
  if (checks < 1) throw InvalidArgument("checks must be at least 1");
  if (std::isnan(threshold) || threshold < 0.0) throw InvalidArgument("threshold must be >= 0");
  struct Collector {
    double r2;
    std::vector<Candidate> found;
    double radius2() const { return r2; }
    void offer(Candidate c) {
      if (c.dist2 <= r2) found.push_back(c);
    }
  } collect{threshold * threshold, {}};
  const int used = search(q, checks, collect);
  std::sort(collect.found.begin(), collect.found.end());
  return to_result(collect.found, labels_, used);
}

QueryResult linear_scan(const std::vector<FeatureVector>& points,
                        const std::vector<std::string>& labels, const FeatureVector& q, int k) {
  if (points.empty()) throw EmptyIndex("linear scan over zero points");
  if (k < 1) throw InvalidArgument("k must be at least 1");
  TopK top(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < points.size(); ++i) {
    top.offer({squared_distance(q, points[i]), static_cast<std::uint32_t>(i)});
  }
  return to_result(top.sorted(), labels, static_cast<int>(points.size()));
}

QueryResult linear_scan_radius(const std::vector<FeatureVector>& points,
                               const std::vector<std::string>& labels, const FeatureVector& q,
                               double threshold) {
  if (points.empty()) throw EmptyIndex("linear scan over zero points");
  const double r2 = threshold * threshold;
  std::vector<Candidate> found;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d2 = squared_distance(q, points[i]);
    if (d2 <= r2) found.push_back({d2, static_cast<std::uint32_t>(i)});
  }
  std::sort(found.begin(), found.end());
  return to_result(found, labels, static_cast<int>(points.size()));
}

std::vector<std::uint8_t> KDForest::serialize(const std::string& model_checksum) const {
  std::vector<std::uint8_t> out;
  le::put_bytes(out, kIndexMagic, sizeof(kIndexMagic));
  le::put_u32(out, kIndexFormatVersion);
  le::put_u32(out, kIndexDim);
  le::put_u64(out, points_.size());
  le::put_u32(out, static_cast<std::uint32_t>(trees_.size()));
  le::put_u64(out, seed_);
  le::put_u32(out, static_cast<std::uint32_t>(model_checksum.size()));
  le::put_bytes(out, model_checksum.data(), model_checksum.size());
  for (const auto& p : points_) {
    for (double v : p) le::put_f64(out, v);
  }
  for (const auto& label : labels_) {
    le::put_u32(out, static_cast<std::uint32_t>(label.size()));
    le::put_bytes(out, label.data(), label.size());
  }
  for (const auto& tree : trees_) {
    le::put_u64(out, tree.nodes.size());
    for (const KDNode& n : tree.nodes) {
      le::put_i32(out, n.split_dim);
      le::put_f64(out, n.split_value);
      le::put_i32(out, n.left);
      le::put_i32(out, n.right);
      le::put_i32(out, n.point);
    }
  }
  return out;
}

KDForest KDForest::deserialize(const std::vector<std::uint8_t>& bytes, std::string* model_checksum) {
  le::Cursor in(bytes);
  if (in.bytes(sizeof(kIndexMagic)) != std::string(kIndexMagic, sizeof(kIndexMagic))) {
    throw FormatError("not an index file (bad magic)");
  }
  if (const auto v = in.u32(); v != kIndexFormatVersion) {
    throw FormatError("unsupported index format version " + std::to_string(v));
  }
  if (const auto dim = in.u32(); dim != kIndexDim) {
    throw FormatError("index dimension " + std::to_string(dim) + " does not match " +
                      std::to_string(kIndexDim));
  }
  const std::uint64_t n = in.u64();
  const std::uint32_t n_trees = in.u32();
  KDForest forest;
  forest.seed_ = in.u64();
  const std::string checksum = in.bytes(in.u32());
  if (model_checksum) *model_checksum = checksum;
  if (n == 0 || n_trees == 0) throw FormatError("index has no points or no trees");
  if (n > bytes.size()) throw FormatError("index point count exceeds file size");

  forest.points_.resize(n);
  for (auto& p : forest.points_) {
    for (double& v : p) v = in.f64();
  }
  forest.labels_.resize(n);
  for (auto& label : forest.labels_) label = in.bytes(in.u32());
  forest.trees_.resize(n_trees);
  for (auto& tree : forest.trees_) {
    const std::uint64_t count = in.u64();
    if (count != 2 * n - 1) throw FormatError("tree node count does not match point count");
    tree.nodes.resize(count);
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      KDNode& node = tree.nodes[i];
      const auto self = static_cast<std::int64_t>(i);
      node.split_dim = in.i32();
      node.split_value = in.f64();
      node.left = in.i32();
      node.right = in.i32();
      node.point = in.i32();
      const auto limit = static_cast<std::int64_t>(count);
      if (node.is_leaf()) {
        if (node.point < 0 || static_cast<std::uint64_t>(node.point) >= n) {
          throw FormatError("leaf references an out-of-range point");
        }
      } else if (node.split_dim >= kIndexDim || node.left <= self || node.right <= self ||
                 node.left >= limit || node.right >= limit) {
        throw FormatError("internal node has invalid children or split dimension");
      }
    }
  }
  if (!in.at_end()) throw FormatError("trailing bytes after index data");
  return forest;
}

void KDForest::save(const std::filesystem::path& path, const std::string& model_checksum) const {
  write_file_bytes(path, serialize(model_checksum));
}

KDForest KDForest::load(const std::filesystem::path& path, std::string* model_checksum) {
  return deserialize(read_file_bytes(path), model_checksum);
}

}  // namespace homoglyph
