#include "qbnc/pca.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "qbnc/linalg.hpp"

namespace qbnc {

PcaModel pca_fit(const Eigen::MatrixXd& data, int k,
                 std::vector<std::string> feature_names) {
  const int m = static_cast<int>(data.rows());
  const int d = static_cast<int>(data.cols());
  if (m < 2) throw std::invalid_argument("pca_fit: need at least 2 rows");
  if (k < 1 || k > std::min(m - 1, d))
    throw std::invalid_argument("pca_fit: k must lie in [1, min(m-1, d)]");
  if (!data.allFinite()) throw std::invalid_argument("pca_fit: non-finite data");
  if (!feature_names.empty() && static_cast<int>(feature_names.size()) != d)
    throw std::invalid_argument("pca_fit: feature name count does not match columns");

  PcaModel model;
  model.mean = data.colwise().mean();
  Eigen::MatrixXd centered = data.rowwise() - model.mean.transpose();
  Eigen::MatrixXd cov = (centered.transpose() * centered) / double(m - 1);

  SymmetricEigen eig = jacobi_eigensolve(cov);
  model.total_variance = cov.trace();

  model.components.resize(k, d);
  model.eigenvalues.resize(k);
  model.explained_ratio.resize(k);
  const double total = std::max(model.total_variance, 1e-300);
  for (int c = 0; c < k; ++c) {
    Eigen::VectorXd v = eig.vectors.col(c);
    // orient so the largest-|entry| coordinate is positive
    int arg = 0;
    for (int i = 1; i < d; ++i)
      if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
    if (v[arg] < 0.0) v = -v;
    model.components.row(c) = v.transpose();
    model.eigenvalues[c] = std::max(eig.values[c], 0.0);
    model.explained_ratio[c] = model.eigenvalues[c] / total;
  }

  if (feature_names.empty()) {
    feature_names.resize(d);
    for (int i = 0; i < d; ++i) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "f%02d", i);
      feature_names[i] = buf;
    }
  }
  model.feature_names = std::move(feature_names);
  return model;
}

Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& data) {
  if (data.cols() != model.dim())
    throw std::invalid_argument("pca_transform: column count does not match model");
  return (data.rowwise() - model.mean.transpose()) * model.components.transpose();
}

VarianceReport explained_variance_report(const PcaModel& model) {
  VarianceReport rep;
  double cum = 0.0;
  for (int c = 0; c < model.k(); ++c) {
    rep.ratio.push_back(model.explained_ratio[c]);
    cum += model.explained_ratio[c];
    rep.cumulative.push_back(cum);
  }
  return rep;
}

std::vector<std::pair<std::string, double>> loadings(const PcaModel& model,
                                                     int component) {
  if (component < 0 || component >= model.k())
    throw std::invalid_argument("loadings: component index out of range");
  std::vector<std::pair<std::string, double>> out;
  out.reserve(model.dim());
  for (int i = 0; i < model.dim(); ++i)
    out.emplace_back(model.feature_names[i], model.components(component, i));
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::abs(a.second) > std::abs(b.second);
  });
  return out;
}

std::vector<PlanePoint> factorial_plane(const PcaModel& model, int ci, int cj) {
  if (ci < 0 || ci >= model.k() || cj < 0 || cj >= model.k())
    throw std::invalid_argument("factorial_plane: component index out of range");
  std::vector<PlanePoint> pts(model.dim());
  for (int i = 0; i < model.dim(); ++i) {
    pts[i].feature = model.feature_names[i];
    pts[i].x = model.components(ci, i);
    pts[i].y = model.components(cj, i);
  }
  return pts;
}

}  // namespace qbnc
