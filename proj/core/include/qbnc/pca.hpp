#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace qbnc {

// Principal components of a mean-centered sample (covariance divisor m-1).
// Rows of `components` are orthonormal; eigenvalues are descending and
// explained_ratio is relative to the total variance of all d directions,
// so it sums to 1 only when k = d.
struct PcaModel {
  Eigen::VectorXd mean;            // d
  Eigen::MatrixXd components;      // k x d
  Eigen::VectorXd eigenvalues;     // k, descending, >= 0
  Eigen::VectorXd explained_ratio; // k
  double total_variance = 0.0;     // trace of the covariance
  std::vector<std::string> feature_names;  // d

  int k() const { return static_cast<int>(components.rows()); }
  int dim() const { return static_cast<int>(components.cols()); }
};

// Mean-centers, diagonalizes the covariance (cyclic Jacobi; deterministic),
// keeps the top k eigenpairs. Sign convention: in every component the entry
// of largest magnitude is positive (ties broken by lowest feature index).
// Requires m >= 2 rows, 1 <= k <= min(m-1, d), finite data.
PcaModel pca_fit(const Eigen::MatrixXd& data, int k,
                 std::vector<std::string> feature_names = {});

// (data - mean) * components^T; column count must match the model.
Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& data);

struct VarianceReport {
  std::vector<double> ratio;       // per retained component
  std::vector<double> cumulative;  // running sums of ratio
};
VarianceReport explained_variance_report(const PcaModel& model);

// Feature weights of one component, sorted by |loading| descending
// (ties by feature order).
std::vector<std::pair<std::string, double>> loadings(const PcaModel& model,
                                                     int component);

struct PlanePoint {
  std::string feature;
  double x = 0.0;
  double y = 0.0;
};
// Per-feature coordinates on two chosen components (biplot axes).
std::vector<PlanePoint> factorial_plane(const PcaModel& model, int ci, int cj);

}  // namespace qbnc
