#include "qbnc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "qbnc/rng.hpp"

namespace qbnc {

namespace {

void fisher_yates(std::vector<int>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[rng.below(i)]);
}

LabeledDataset take_rows(const LabeledDataset& data, const std::vector<int>& rows) {
  LabeledDataset out;
  out.X.resize(rows.size(), data.X.cols());
  out.feature_names = data.feature_names;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.X.row(r) = data.X.row(rows[r]);
    out.y.push_back(data.y[rows[r]]);
    if (!data.subject_ids.empty()) out.subject_ids.push_back(data.subject_ids[rows[r]]);
  }
  return out;
}

double pair_count_u(std::span<const double> xs, std::span<const double> ys) {
  double u = 0.0;
  for (const double x : xs)
    for (const double y : ys) {
      if (x > y)
        u += 1.0;
      else if (x == y)
        u += 0.5;
    }
  return u;
}

// P(U_X <= u_obs) over every way of assigning the pooled values to a group
// of size nx, by direct subset recursion.
double exact_tail_probability(const std::vector<double>& pooled, int nx,
                              double u_obs) {
  const int n = static_cast<int>(pooled.size());
  long long hits = 0, total = 0;
  std::vector<int> pick;
  pick.reserve(nx);

  // Walks subsets in lexicographic index order; `next` is the smallest
  // index still available for the group.
  auto recurse = [&](auto&& self, int next) -> void {
    if (static_cast<int>(pick.size()) == nx) {
      std::vector<char> in_x(n, 0);
      for (const int i : pick) in_x[i] = 1;
      double u = 0.0;
      for (int i = 0; i < n; ++i) {
        if (!in_x[i]) continue;
        for (int j = 0; j < n; ++j) {
          if (in_x[j]) continue;
          if (pooled[i] > pooled[j])
            u += 1.0;
          else if (pooled[i] == pooled[j])
            u += 0.5;
        }
      }
      ++total;
      if (u <= u_obs + 1e-12) ++hits;
      return;
    }
    const int remaining = nx - static_cast<int>(pick.size());
    for (int i = next; i <= n - remaining; ++i) {
      pick.push_back(i);
      self(self, i + 1);
      pick.pop_back();
    }
  };
  recurse(recurse, 0);
  return static_cast<double>(hits) / static_cast<double>(total);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

std::vector<int> zscore_filter(const Eigen::MatrixXd& x, double threshold) {
  if (x.rows() < 2)
    throw std::invalid_argument("zscore_filter: need at least two rows");
  if (!(threshold > 0.0))
    throw std::invalid_argument("zscore_filter: threshold must be positive");
  if (!x.allFinite())
    throw std::invalid_argument("zscore_filter: non-finite data");

  const Eigen::Index m = x.rows(), d = x.cols();
  const Eigen::VectorXd mean = x.colwise().mean();
  Eigen::VectorXd sd(d);
  for (Eigen::Index j = 0; j < d; ++j)
    sd[j] = std::sqrt((x.col(j).array() - mean[j]).square().sum() / m);

  std::vector<int> kept;
  for (Eigen::Index i = 0; i < m; ++i) {
    bool ok = true;
    for (Eigen::Index j = 0; j < d && ok; ++j) {
      const double z = sd[j] > 0.0 ? (x(i, j) - mean[j]) / sd[j] : 0.0;
      if (!(std::abs(z) < threshold)) ok = false;
    }
    if (ok) kept.push_back(static_cast<int>(i));
  }
  return kept;
}

SplitResult train_test_split(const LabeledDataset& data, double train_fraction,
                             std::uint64_t seed, bool stratified) {
  const int m = data.rows();
  if (m < 2) throw std::invalid_argument("train_test_split: need >= 2 rows");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("train_test_split: fraction must be in (0,1)");
  if (static_cast<int>(data.y.size()) != m)
    throw std::invalid_argument("train_test_split: label count mismatch");

  // Canonical order: ascending subject id when ids are present, so the
  // partition is a function of the data, not of row order.
  std::vector<int> canon(m);
  std::iota(canon.begin(), canon.end(), 0);
  const bool has_ids = static_cast<int>(data.subject_ids.size()) == m;
  if (has_ids)
    std::sort(canon.begin(), canon.end(), [&](int a, int b) {
      if (data.subject_ids[a] != data.subject_ids[b])
        return data.subject_ids[a] < data.subject_ids[b];
      return a < b;
    });

  std::vector<int> train_rows, test_rows;
  auto split_group = [&](std::vector<int> rows, std::uint64_t stream) {
    const int n = static_cast<int>(rows.size());
    if (n < 2)
      throw std::invalid_argument(
          "train_test_split: a label group has fewer than 2 rows");
    Rng rng(mix_seed(seed, stream));
    fisher_yates(rows, rng);
    int n_train = static_cast<int>(std::llround(train_fraction * n));
    n_train = std::clamp(n_train, 1, n - 1);
    train_rows.insert(train_rows.end(), rows.begin(), rows.begin() + n_train);
    test_rows.insert(test_rows.end(), rows.begin() + n_train, rows.end());
  };

  if (stratified) {
    std::vector<int> g0, g1;
    for (const int idx : canon) {
      if (data.y[idx] == 0)
        g0.push_back(idx);
      else if (data.y[idx] == 1)
        g1.push_back(idx);
      else
        throw std::invalid_argument("train_test_split: labels must be 0 or 1");
    }
    split_group(std::move(g0), 0);
    split_group(std::move(g1), 1);
  } else {
    split_group(canon, 2);
  }

  // Keep canonical order inside each side.
  std::map<int, int> canon_rank;
  for (int r = 0; r < m; ++r) canon_rank[canon[r]] = r;
  auto by_rank = [&](int a, int b) { return canon_rank[a] < canon_rank[b]; };
  std::sort(train_rows.begin(), train_rows.end(), by_rank);
  std::sort(test_rows.begin(), test_rows.end(), by_rank);

  return {take_rows(data, train_rows), take_rows(data, test_rows)};
}

MetricsReport compute_metrics(const std::vector<int>& y_true,
                              const std::vector<int>& y_pred,
                              const Eigen::VectorXd& scores) {
  const std::size_t m = y_true.size();
  if (m == 0) throw std::invalid_argument("compute_metrics: empty input");
  if (y_pred.size() != m || static_cast<std::size_t>(scores.size()) != m)
    throw std::invalid_argument("compute_metrics: length mismatch");
  if (!scores.allFinite())
    throw std::invalid_argument("compute_metrics: non-finite scores");

  MetricsReport r;
  long n_pos = 0, n_neg = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if ((y_true[i] != 0 && y_true[i] != 1) || (y_pred[i] != 0 && y_pred[i] != 1))
      throw std::invalid_argument("compute_metrics: labels must be 0 or 1");
    if (y_true[i] == 1) {
      ++n_pos;
      (y_pred[i] == 1) ? ++r.tp : ++r.fn;
    } else {
      ++n_neg;
      (y_pred[i] == 1) ? ++r.fp : ++r.tn;
    }
  }
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("compute_metrics: need both classes in y_true");

  r.accuracy = static_cast<double>(r.tp + r.tn) / static_cast<double>(m);
  if (r.tp + r.fp > 0)
    r.precision = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp);
  else
    r.precision_defined = false;
  if (r.tp + r.fn > 0)
    r.recall = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn);
  else
    r.recall_defined = false;
  if (r.precision_defined && r.recall_defined && r.precision + r.recall > 0.0)
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  else
    r.f1_defined = false;

  // Threshold sweep: predict positive at score >= t for each distinct score
  // t in descending order; tied scores enter as one group, which yields the
  // diagonal ROC segments that give ties half credit in the area.
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return scores[a] > scores[b];
  });
  r.roc.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  long tp_c = 0, fp_c = 0;
  std::size_t i = 0;
  while (i < m) {
    const double t = scores[order[i]];
    while (i < m && scores[order[i]] == t) {
      (y_true[order[i]] == 1) ? ++tp_c : ++fp_c;
      ++i;
    }
    r.roc.push_back({t, static_cast<double>(fp_c) / n_neg,
                     static_cast<double>(tp_c) / n_pos});
  }
  for (std::size_t s = 1; s < r.roc.size(); ++s)
    r.auc += 0.5 * (r.roc[s].fpr - r.roc[s - 1].fpr) *
             (r.roc[s].tpr + r.roc[s - 1].tpr);
  return r;
}

UTestResult mann_whitney_u(std::span<const double> xs,
                           std::span<const double> ys) {
  if (xs.empty() || ys.empty())
    throw std::invalid_argument("mann_whitney_u: empty group");
  UTestResult res;
  res.n_x = static_cast<int>(xs.size());
  res.n_y = static_cast<int>(ys.size());
  res.u_x = pair_count_u(xs, ys);
  res.u_y = static_cast<double>(res.n_x) * res.n_y - res.u_x;
  res.u = std::min(res.u_x, res.u_y);

  if (res.n_x <= 8 && res.n_y <= 8) {
    res.exact = true;
    std::vector<double> pooled(xs.begin(), xs.end());
    pooled.insert(pooled.end(), ys.begin(), ys.end());
    res.p_value =
        std::min(1.0, 2.0 * exact_tail_probability(pooled, res.n_x, res.u));
    return res;
  }

  // Normal approximation with tie correction; continuity correction moves
  // the statistic half a step toward the mean.
  const double nx = res.n_x, ny = res.n_y, n = nx + ny;
  std::vector<double> pooled(xs.begin(), xs.end());
  pooled.insert(pooled.end(), ys.begin(), ys.end());
  std::sort(pooled.begin(), pooled.end());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < pooled.size();) {
    std::size_t j = i;
    while (j < pooled.size() && pooled[j] == pooled[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  const double mu = nx * ny / 2.0;
  const double var =
      nx * ny / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (var <= 0.0) {
    res.p_value = 1.0;  // every pooled value tied; U cannot vary
    return res;
  }
  double z = (res.u - mu + 0.5) / std::sqrt(var);
  if (z > 0.0) z = 0.0;
  res.p_value = std::min(1.0, 2.0 * normal_cdf(z));
  return res;
}

std::vector<RoiRank> rank_rois(const std::vector<std::string>& names,
                               const Eigen::VectorXd& loadings,
                               const Eigen::MatrixXd& group_x,
                               const Eigen::MatrixXd& group_y, double alpha) {
  const Eigen::Index d = loadings.size();
  if (static_cast<Eigen::Index>(names.size()) != d ||
      group_x.cols() != d || group_y.cols() != d)
    throw std::invalid_argument("rank_rois: node sets do not match");
  if (group_x.rows() < 1 || group_y.rows() < 1)
    throw std::invalid_argument("rank_rois: empty group");

  std::vector<RoiRank> out;
  std::vector<double> xs(group_x.rows()), ys(group_y.rows());
  for (Eigen::Index c = 0; c < d; ++c) {
    for (Eigen::Index i = 0; i < group_x.rows(); ++i) xs[i] = group_x(i, c);
    for (Eigen::Index i = 0; i < group_y.rows(); ++i) ys[i] = group_y(i, c);
    const UTestResult t = mann_whitney_u(xs, ys);
    if (t.p_value < alpha)
      out.push_back({names[c], loadings[c], t.u, t.p_value});
  }
  std::stable_sort(out.begin(), out.end(), [](const RoiRank& a, const RoiRank& b) {
    return std::abs(a.loading) > std::abs(b.loading);
  });
  return out;
}

void write_roc_csv(const std::filesystem::path& path, const MetricsReport& m) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("write_roc_csv: cannot open " + path.string());
  out << "threshold,fpr,tpr\n";
  char buf[200];
  for (const RocPoint& p : m.roc) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.threshold, p.fpr,
                  p.tpr);
    out << buf;
  }
  if (!out) throw std::runtime_error("write_roc_csv: write failed");
}

void write_metrics_json(const std::filesystem::path& path,
                        const MetricsReport& m) {
  nlohmann::json j;
  j["tp"] = m.tp;
  j["tn"] = m.tn;
  j["fp"] = m.fp;
  j["fn"] = m.fn;
  j["accuracy"] = m.accuracy;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["precision_defined"] = m.precision_defined;
  j["recall_defined"] = m.recall_defined;
  j["f1_defined"] = m.f1_defined;
  j["auc"] = m.auc;
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("write_metrics_json: cannot open " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write_metrics_json: write failed");
}

}  // namespace qbnc
