#include "homoglyph/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "homoglyph/errors.hpp"
#include "homoglyph/levenshtein.hpp"
#include "homoglyph/utf8.hpp"

namespace homoglyph {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// ROC

RocResult roc_auc(const std::vector<double>& scores, const std::vector<int>& labels, std::string scorer) {
  if (scores.size() != labels.size()) throw InvalidArgument("scores and labels differ in length");
  std::size_t pos = 0, neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw InvalidArgument("non-finite score");
    if (labels[i] == kLabelSpoof) ++pos;
    else if (labels[i] == kLabelBenign) ++neg;
    else throw InvalidArgument("label must be 0 or 1");
  }
  if (pos == 0 || neg == 0) throw DegenerateLabels("ROC needs both spoof and benign examples");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  RocResult r;
  r.scorer = std::move(scorer);
  r.positives = pos;
  r.negatives = neg;
  r.points.push_back({0.0, 0.0, -std::numeric_limits<double>::infinity()});

  // Sweep distinct scores upward; a positive beats every negative scoring
  // higher and ties with those in its own group. Counts are doubled so the
  // half credit stays integral.
  std::uint64_t twice_wins = 0;
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i, gp = 0, gn = 0;
    const double s = scores[order[i]];
    for (; j < order.size() && scores[order[j]] == s; ++j) (labels[order[j]] == kLabelSpoof ? gp : gn)++;
    const std::uint64_t neg_above = neg - fp - gn;
    twice_wins += static_cast<std::uint64_t>(gp) * (2 * neg_above + gn);
    tp += gp;
    fp += gn;
    r.points.push_back({static_cast<double>(fp) / neg, static_cast<double>(tp) / pos, s});
    i = j;
  }
  r.auc = static_cast<double>(twice_wins) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
  return r;
}

RocResult roc_auc(const std::vector<ScoredPair>& scored, std::string scorer) {
  std::vector<double> scores;
  std::vector<int> labels;
  for (const auto& s : scored) {
    scores.push_back(s.score);
    labels.push_back(s.label);
  }
  return roc_auc(scores, labels, std::move(scorer));
}

double trapezoid_auc(const std::vector<RocPoint>& points) {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) / 2.0;
  }
  return area;
}

double threshold_at_fpr(const RocResult& roc, double max_fpr) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < roc.points.size(); ++i) {
    if (roc.points[i].fpr <= max_fpr && roc.points[i].tpr > roc.points[best].tpr) best = i;
  }
  if (best == 0) {
    // Nothing can be flagged within the budget: stay below the lowest score.
    return roc.points.size() > 1 ? roc.points[1].threshold / 2.0 : 0.0;
  }
  if (best + 1 < roc.points.size()) return (roc.points[best].threshold + roc.points[best + 1].threshold) / 2.0;
  return roc.points[best].threshold;
}

// ---------------------------------------------------------------------------
// Recall and timing

std::vector<std::uint32_t> oracle_top1(const KDForest& forest, const std::vector<FeatureVector>& queries) {
  std::vector<std::uint32_t> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(linear_scan(forest.points(), forest.labels(), q, 1).neighbors[0].id);
  return out;
}

namespace {

template <typename Fn>
double median_run_us(int runs, std::size_t n, Fn&& fn) {
  using clock = std::chrono::steady_clock;
  fn();  // warm-up
  std::vector<double> totals;
  for (int r = 0; r < std::max(runs, 1); ++r) {
    const auto t0 = clock::now();
    fn();
    totals.push_back(std::chrono::duration<double, std::micro>(clock::now() - t0).count());
  }
  std::sort(totals.begin(), totals.end());
  return totals[totals.size() / 2] / static_cast<double>(std::max<std::size_t>(n, 1));
}

}  // namespace

RecallTimingCurve recall_vs_checks(const KDForest& forest, const std::vector<FeatureVector>& queries,
                                   const std::vector<std::uint32_t>& oracle,
                                   const std::vector<int>& checks_list, int timing_runs) {
  if (oracle.size() != queries.size()) throw InvalidArgument("oracle and query counts differ");
  RecallTimingCurve curve;
  curve.queries = queries.size();
  curve.index_size = forest.size();
  volatile double sink = 0.0;

  for (int checks : checks_list) {
    RecallRow row;
    row.checks = checks;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < queries.size(); ++i) {
      const auto res = forest.query(queries[i], 1, checks);
      if (!res.neighbors.empty() && res.neighbors[0].id == oracle[i]) ++hits;
    }
    row.recall = queries.empty() ? 1.0 : static_cast<double>(hits) / static_cast<double>(queries.size());
    row.mean_query_us = median_run_us(timing_runs, queries.size(), [&] {
      for (const auto& q : queries) sink = sink + forest.query(q, 1, checks).neighbors[0].distance;
    });
    curve.rows.push_back(row);
  }
  curve.linear_scan_us = median_run_us(timing_runs, queries.size(), [&] {
    for (const auto& q : queries) sink = sink + linear_scan(forest.points(), forest.labels(), q, 1).neighbors[0].distance;
  });
  return curve;
}

// ---------------------------------------------------------------------------
// Percent edit distance

std::size_t PercentEditHistogram::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

int percent_bucket(std::size_t d, std::size_t len) {
  if (len == 0 || d == 0) return 0;
  const std::size_t up = (kHistogramBuckets * d + len - 1) / len;  // ceil(20 d / len)
  return static_cast<int>(std::clamp<std::size_t>(up, 1, kHistogramBuckets)) - 1;
}

PercentEditHistogram percent_edit_distance_histogram(const std::vector<std::string>& names) {
  if (names.size() < 2) throw InvalidArgument("histogram needs at least two names");
  std::vector<std::u32string> decoded;
  for (const auto& n : names) decoded.push_back(utf8_decode(n));

  PercentEditHistogram h;
  for (std::size_t i = 0; i < decoded.size(); ++i) {
    std::size_t best_d = std::numeric_limits<std::size_t>::max(), best_j = 0;
    for (std::size_t j = 0; j < decoded.size(); ++j) {
      if (j == i) continue;
      const std::size_t li = decoded[i].size(), lj = decoded[j].size();
      if ((li > lj ? li - lj : lj - li) >= best_d) continue;
      const std::size_t cap = best_d == std::numeric_limits<std::size_t>::max() ? std::max(li, lj) : best_d - 1;
      const std::size_t d = bounded_levenshtein(decoded[i], decoded[j], cap);
      if (d <= cap && d < best_d) {
        best_d = d;
        best_j = j;
      }
    }
    const std::size_t len = std::max(decoded[i].size(), decoded[best_j].size());
    ++h.counts[static_cast<std::size_t>(percent_bucket(best_d, len))];
  }
  return h;
}

// ---------------------------------------------------------------------------
// PCA

PcaResult pca_project(const std::vector<FeatureVector>& features) {
  constexpr int D = kIndexDim;
  if (features.size() < 3) throw InvalidArgument("PCA needs at least three vectors");
  const auto n = static_cast<Eigen::Index>(features.size());
  Eigen::MatrixXd X(n, D);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int k = 0; k < D; ++k) X(i, k) = features[static_cast<std::size_t>(i)][k];
  }
  const Eigen::RowVectorXd mean = X.colwise().mean();
  X.rowwise() -= mean;
  Eigen::MatrixXd C = (X.transpose() * X) / static_cast<double>(n - 1);

  PcaResult out;
  for (int k = 0; k < D; ++k) out.mean[k] = mean(k);
  const double scale = std::max(C.diagonal().maxCoeff(), 1e-300);

  for (int c = 0; c < 2; ++c) {
    Eigen::VectorXd v(D);
    for (int k = 0; k < D; ++k) v(k) = 1.0 + 0.01 * k;
    // Start orthogonal to earlier components.
    for (int p = 0; p < c; ++p) {
      const Eigen::Map<const Eigen::VectorXd> u(out.components[p].data(), D);
      v -= u.dot(v) * u;
    }
    v.normalize();
    double lambda = 0.0;
    bool converged = false;
    for (int it = 0; it < kPcaMaxIterations; ++it) {
      Eigen::VectorXd w = C * v;
      const double norm = w.norm();
      if (norm <= 1e-14 * scale) {
        // Remaining variance is zero; any orthogonal direction will do.
        lambda = 0.0;
        converged = true;
        break;
      }
      w /= norm;
      const double change = (w - v).norm();
      v = w;
      lambda = norm;
      if (change < kPcaTolerance) {
        converged = true;
        break;
      }
    }
    if (!converged) throw ConvergenceFailure("power iteration did not converge");
    int first = 0;
    while (first < D && std::abs(v(first)) <= 1e-12) ++first;
    if (first < D && v(first) < 0) v = -v;
    for (int k = 0; k < D; ++k) out.components[c][k] = v(k);
    out.eigenvalues[c] = lambda;
    C -= lambda * v * v.transpose();
  }

  out.coords.resize(features.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int c = 0; c < 2; ++c) {
      const Eigen::Map<const Eigen::VectorXd> u(out.components[c].data(), D);
      out.coords[static_cast<std::size_t>(i)][c] = X.row(i).dot(u);
    }
  }
  return out;
}

ClusterSeparation cluster_separation(const std::vector<std::vector<FeatureVector>>& groups) {
  if (groups.size() < 2) throw InvalidArgument("cluster separation needs at least two groups");
  for (const auto& g : groups) {
    if (g.size() < 2) throw InvalidArgument("every group needs at least two members");
  }
  double intra = 0.0, inter = 0.0;
  std::size_t n_intra = 0, n_inter = 0;
  for (std::size_t a = 0; a < groups.size(); ++a) {
    for (std::size_t i = 0; i < groups[a].size(); ++i) {
      for (std::size_t j = i + 1; j < groups[a].size(); ++j, ++n_intra) intra += distance(groups[a][i], groups[a][j]);
      for (std::size_t b = a + 1; b < groups.size(); ++b) {
        for (const auto& f : groups[b]) {
          inter += distance(groups[a][i], f);
          ++n_inter;
        }
      }
    }
  }
  return {intra / static_cast<double>(n_intra), inter / static_cast<double>(n_inter)};
}

// ---------------------------------------------------------------------------
// CSV

std::string roc_csv(const RocResult& roc) {
  std::string out = "fpr,tpr,threshold\n";
  for (const auto& p : roc.points) out += fmt(p.fpr) + "," + fmt(p.tpr) + "," + fmt(p.threshold) + "\n";
  return out;
}

std::string recall_csv(const RecallTimingCurve& curve) {
  std::string out = "checks,recall,mean_query_us\n";
  for (const auto& r : curve.rows) out += std::to_string(r.checks) + "," + fmt(r.recall) + "," + fmt(r.mean_query_us) + "\n";
  out += "linear," + fmt(1.0) + "," + fmt(curve.linear_scan_us) + "\n";
  return out;
}

std::string histogram_csv(const PercentEditHistogram& hist) {
  std::string out = "bucket_low,bucket_high,count\n";
  char buf[64];
  for (int b = 0; b < kHistogramBuckets; ++b) {
    std::snprintf(buf, sizeof buf, "%.2f,%.2f,", b * 0.05, (b + 1) * 0.05);
    out += buf + std::to_string(hist.counts[static_cast<std::size_t>(b)]) + "\n";
  }
  return out;
}

std::string pca_csv(const std::vector<std::string>& labels, const PcaResult& pca) {
  if (labels.size() != pca.coords.size()) throw InvalidArgument("label count differs from PCA coordinates");
  std::string out = "label,pc1,pc2\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::string l = labels[i];
    if (l.find_first_of(",\"\n") != std::string::npos) {
      std::string q = "\"";
      for (char c : l) q += c == '"' ? std::string("\"\"") : std::string(1, c);
      l = q + "\"";
    }
    out += l + "," + fmt(pca.coords[i][0]) + "," + fmt(pca.coords[i][1]) + "\n";
  }
  return out;
}

}  // namespace homoglyph
