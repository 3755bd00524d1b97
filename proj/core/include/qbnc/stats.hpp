#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "qbnc/netdata.hpp"

namespace qbnc {

// Rows whose per-column z-scores (population mean/std over all rows) all
// satisfy |z| < threshold; a zero-variance column scores z = 0. Returns the
// kept row indices in ascending order. Requires m >= 2 and threshold > 0.
std::vector<int> zscore_filter(const Eigen::MatrixXd& x, double threshold = 3.0);

struct SplitResult {
  LabeledDataset train;
  LabeledDataset test;
};

// Deterministic split. Rows are first put in canonical order (ascending
// subject id), so the partition does not depend on input row order. The
// stratified mode shuffles each label group with its own seeded stream and
// takes round(fraction * group size) training rows, clamped to leave at
// least one row on each side; groups smaller than 2 are an error. The
// non-stratified mode shuffles and splits the whole set the same way.
SplitResult train_test_split(const LabeledDataset& data, double train_fraction,
                             std::uint64_t seed, bool stratified = true);

struct RocPoint {
  double threshold = 0.0;  // predict positive when score >= threshold
  double fpr = 0.0;
  double tpr = 0.0;
};

struct MetricsReport {
  long tp = 0, tn = 0, fp = 0, fn = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Ratios with a zero denominator are reported as 0 with the flag cleared.
  bool precision_defined = true;
  bool recall_defined = true;
  bool f1_defined = true;
  std::vector<RocPoint> roc;  // (0,0) to (1,1), thresholds descending
  double auc = 0.0;           // trapezoidal area under roc
};

// Confusion counts at the given 0/1 predictions plus a threshold-sweep ROC
// over the scores. Both classes must appear in y_true (the ROC rates are
// undefined otherwise).
MetricsReport compute_metrics(const std::vector<int>& y_true,
                              const std::vector<int>& y_pred,
                              const Eigen::VectorXd& scores);

struct UTestResult {
  double u = 0.0;    // min(u_x, u_y)
  double u_x = 0.0;  // #{x_i > y_j} + half ties
  double u_y = 0.0;
  double p_value = 1.0;  // two-sided
  int n_x = 0;
  int n_y = 0;
  bool exact = false;  // enumeration (true) or normal approximation
};

// Rank-sum comparison of two groups. Groups of size <= 8 each get the exact
// permutation p-value p = min(1, 2 * P(U_X <= u)) over all label
// assignments; larger groups use the normal approximation with tie and
// continuity corrections. Identical-distribution extremes: p = 1 when the
// statistic cannot vary at all.
UTestResult mann_whitney_u(std::span<const double> xs,
                           std::span<const double> ys);

struct RoiRank {
  std::string name;
  double loading = 0.0;
  double u = 0.0;
  double p_value = 1.0;
};

// Per-node group comparison: runs mann_whitney_u on each column of the two
// value matrices (rows = subjects), keeps nodes with p < alpha, and sorts
// them by |loading| descending (ties by column order).
std::vector<RoiRank> rank_rois(const std::vector<std::string>& names,
                               const Eigen::VectorXd& loadings,
                               const Eigen::MatrixXd& group_x,
                               const Eigen::MatrixXd& group_y,
                               double alpha = 0.05);

// CSV `threshold,fpr,tpr` (%.17g; the initial all-negative point prints its
// threshold as inf).
void write_roc_csv(const std::filesystem::path& path, const MetricsReport& m);

// Flat JSON of counts, ratios, defined-flags, and auc; keys sorted.
void write_metrics_json(const std::filesystem::path& path,
                        const MetricsReport& m);

}  // namespace qbnc
