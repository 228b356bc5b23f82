#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "homoglyph/net.hpp"

namespace homoglyph {

inline constexpr int kIndexDim = Architecture::feature_dim;
inline constexpr int kDefaultTrees = 10;
inline constexpr int kDefaultChecks = 128;
/// Split dimension is drawn uniformly from this many highest-variance dims.
inline constexpr int kTopVarianceDims = 5;

struct Neighbor {
  std::uint32_t id = 0;
  std::string label;
  double distance = 0.0;

  bool operator==(const Neighbor&) const = default;
};

struct QueryResult {
  std::vector<Neighbor> neighbors;  // ascending by (distance, id)
  int checks_used = 0;

  bool operator==(const QueryResult&) const = default;
};

/// Flattened binary tree. Internal nodes have split_dim >= 0; leaves have
/// split_dim == -1 and hold one point id.
struct KDNode {
  std::int32_t split_dim = -1;
  double split_value = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::int32_t point = -1;

  bool is_leaf() const { return split_dim < 0; }
  bool operator==(const KDNode&) const = default;
};

struct KDTree {
  std::vector<KDNode> nodes;  // nodes[0] is the root
  bool operator==(const KDTree&) const = default;
};

/// Forest of randomized KD-trees grown to one point per leaf, searched with a
/// single best-bin-first queue shared by all trees. Immutable after build.
class KDForest {
 public:
  /// Throws EmptyIndex when `points` is empty and InvalidArgument when sizes
  /// disagree or num_trees < 1.
  static KDForest build(std::vector<FeatureVector> points, std::vector<std::string> labels,
                        int num_trees = kDefaultTrees, std::uint64_t seed = 0);

  /// Approximate k nearest neighbours, visiting at most `checks` leaves.
  QueryResult query(const FeatureVector& q, int k, int checks = kDefaultChecks) const;
  /// All visited points within `threshold` (inclusive), same leaf budget.
  QueryResult query_radius(const FeatureVector& q, double threshold,
                           int checks = kDefaultChecks) const;

  std::size_t size() const { return points_.size(); }
  int num_trees() const { return static_cast<int>(trees_.size()); }
  std::size_t leaf_count() const { return points_.size() * trees_.size(); }
  std::uint64_t seed() const { return seed_; }
  const std::vector<FeatureVector>& points() const { return points_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<KDTree>& trees() const { return trees_; }

  bool operator==(const KDForest&) const = default;

  // Index file layout (little-endian):
  //   char[8] "HGKDFRST", u32 version (1), u32 dim, u64 n, u32 trees, u64 seed,
  //   u32 model-checksum length + bytes,
  //   n x dim f64 points, n x (u32 length + UTF-8 bytes) labels,
  //   per tree: u64 node count, then per node i32 split_dim, f64 split_value,
  //   i32 left, i32 right, i32 point.
  std::vector<std::uint8_t> serialize(const std::string& model_checksum = {}) const;
  /// Returns the forest; the stored model checksum goes to `model_checksum`.
  static KDForest deserialize(const std::vector<std::uint8_t>& bytes,
                              std::string* model_checksum = nullptr);
  void save(const std::filesystem::path& path, const std::string& model_checksum = {}) const;
  static KDForest load(const std::filesystem::path& path, std::string* model_checksum = nullptr);

 private:
  template <typename Visit>
  int search(const FeatureVector& q, int checks, Visit&& visit) const;

  std::vector<FeatureVector> points_;
  std::vector<std::string> labels_;
  std::vector<KDTree> trees_;
  std::uint64_t seed_ = 0;
};

/// Exact top-k by Euclidean distance, ties broken by id. Throws EmptyIndex.
QueryResult linear_scan(const std::vector<FeatureVector>& points,
                        const std::vector<std::string>& labels, const FeatureVector& q, int k);

/// Exact radius query (distance <= threshold), ascending by (distance, id).
QueryResult linear_scan_radius(const std::vector<FeatureVector>& points,
                               const std::vector<std::string>& labels, const FeatureVector& q,
                               double threshold);

}  // namespace homoglyph
