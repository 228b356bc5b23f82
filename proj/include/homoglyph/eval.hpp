#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "homoglyph/baselines.hpp"
#include "homoglyph/index.hpp"
#include "homoglyph/net.hpp"

namespace homoglyph {

// Orientation: label 0 (spoof) is the positive class and a lower score is
// more spoof-like, so auc = P(score(spoof) < score(benign)) + P(tie) / 2.

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  /// Pairs with score <= threshold are flagged. -inf for the (0,0) point.
  double threshold = 0.0;
};

struct RocResult {
  std::string scorer;
  std::vector<RocPoint> points;  // (0,0) first, (1,1) last
  double auc = 0.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

/// Throws DegenerateLabels if one class is missing, InvalidArgument on a
/// length mismatch, a label outside {0,1} or a non-finite score.
RocResult roc_auc(const std::vector<double>& scores, const std::vector<int>& labels,
                  std::string scorer = {});
RocResult roc_auc(const std::vector<ScoredPair>& scored, std::string scorer = {});

/// Area under `points` by the trapezoid rule.
double trapezoid_auc(const std::vector<RocPoint>& points);

/// Threshold with the highest TPR among points with FPR <= max_fpr, placed
/// halfway to the next distinct score so that it does not sit on a sample.
double threshold_at_fpr(const RocResult& roc, double max_fpr);

struct RecallRow {
  int checks = 0;
  double recall = 0.0;
  double mean_query_us = 0.0;
};

struct RecallTimingCurve {
  std::vector<RecallRow> rows;
  double linear_scan_us = 0.0;  // mean per query, same protocol
  std::size_t queries = 0;
  std::size_t index_size = 0;
};

/// Exact top-1 id for every query.
std::vector<std::uint32_t> oracle_top1(const KDForest& forest, const std::vector<FeatureVector>& queries);

/// recall@1 against `oracle` for each checks value. Timing is single-threaded,
/// one warm-up pass, then the median of `timing_runs` passes.
RecallTimingCurve recall_vs_checks(const KDForest& forest, const std::vector<FeatureVector>& queries,
                                   const std::vector<std::uint32_t>& oracle,
                                   const std::vector<int>& checks_list, int timing_runs = 3);

inline constexpr int kHistogramBuckets = 20;

/// counts[b] holds names whose nearest-neighbour ratio lies in (b/20, (b+1)/20];
/// a ratio of exactly 0 (duplicates) lands in bucket 0.
struct PercentEditHistogram {
  std::array<std::size_t, kHistogramBuckets> counts{};
  std::size_t total() const;
};

/// Throws InvalidArgument for fewer than two names.
PercentEditHistogram percent_edit_distance_histogram(const std::vector<std::string>& names);

/// Histogram bucket for edit distance `d` over string length `len`.
int percent_bucket(std::size_t d, std::size_t len);

inline constexpr double kPcaTolerance = 1e-10;
inline constexpr int kPcaMaxIterations = 10000;

struct PcaResult {
  std::vector<std::array<double, 2>> coords;
  std::array<FeatureVector, 2> components{};
  std::array<double, 2> eigenvalues{};
  FeatureVector mean{};
};

/// Two-component PCA by power iteration with deflation. The first non-zero
/// loading of each component is positive. Throws InvalidArgument for fewer
/// than three vectors and ConvergenceFailure if an iteration stalls.
PcaResult pca_project(const std::vector<FeatureVector>& features);

struct ClusterSeparation {
  double intra = 0.0;
  double inter = 0.0;
};

/// Mean pairwise distance within groups and across groups. Throws
/// InvalidArgument unless there are >= 2 groups of >= 2 members.
ClusterSeparation cluster_separation(const std::vector<std::vector<FeatureVector>>& groups);

// CSV writers; every table starts with a header row.
std::string roc_csv(const RocResult& roc);
std::string recall_csv(const RecallTimingCurve& curve);
std::string histogram_csv(const PercentEditHistogram& hist);
std::string pca_csv(const std::vector<std::string>& labels, const PcaResult& pca);

}  // namespace homoglyph
