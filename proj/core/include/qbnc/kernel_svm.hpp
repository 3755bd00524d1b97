#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "qbnc/circuits.hpp"

namespace qbnc {

struct KernelMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> row_ids;  // optional; export fills indices if empty
  std::vector<std::string> col_ids;
};

// Fidelity kernel between the feature states of the rows of a and b:
// entry (i, j) = |<phi(b_j)|phi(a_i)>|^2, computed from statevector inner
// products and clamped to [0, 1]. When a and b are the same matrix the Gram
// structure is enforced (unit diagonal, exact symmetry).
KernelMatrix quantum_kernel_exact(const Eigen::MatrixXd& a,
                                  const Eigen::MatrixXd& b,
                                  const FeatureMapSpec& fmap);

// Shot-based estimate: entry (i, j) is the frequency of the all-zeros
// outcome of U_phi(b_j)^dag U_phi(a_i) |0>, sampled with the per-entry seed
// mix_seed(seed, i, j). In the Gram case the diagonal is forced to 1 and
// the (i, j)/(j, i) estimates are averaged.
KernelMatrix quantum_kernel_sampled(const Eigen::MatrixXd& a,
                                    const Eigen::MatrixXd& b,
                                    const FeatureMapSpec& fmap,
                                    std::uint64_t shots, std::uint64_t seed);

enum class KernelKind { linear, rbf };

// linear: x . y;  rbf: exp(-gamma * |x - y|^2), gamma > 0.
KernelMatrix classical_kernel(KernelKind kind, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b, double gamma = 1.0);

// 1 / (d * var) with the population variance pooled over every entry of x;
// falls back to 1/d for constant data.
double rbf_gamma_scale(const Eigen::MatrixXd& x);

// Maximum-margin dual solution for the box-constrained problem
// min 1/2 a^T Q a - e^T a, y^T a = 0, 0 <= a <= C with Q_ij = y_i y_j K_ij.
struct SvmModel {
  std::vector<double> alpha;
  double bias = 0.0;
  std::vector<int> support;  // indices with alpha > 1e-12
  std::vector<int> y;        // training labels, each -1 or +1
  double C = 1.0;
  double psd_clip = 0.0;  // |most negative eigenvalue| removed, 0 if K was PSD
  long n_updates = 0;     // pairwise optimization steps taken
};

// Sequential two-variable coordinate optimization with max-violating-pair
// selection. Stops when the KKT gap is <= 1e-9. Kernels that fail PSD by
// more than 1e-8 are repaired by clipping negative eigenvalues to zero
// (recorded in psd_clip). The bias averages -y_i * gradient_i over free
// support vectors (0 < alpha < C), or takes the feasible midpoint when no
// vector is free. Requires both labels present and C > 0.
SvmModel svm_fit(const KernelMatrix& k, const std::vector<int>& y,
                 double C = 1.0);

// Score for one sample given its kernel values against every training row:
// sum_i alpha_i y_i k_row[i] + bias.
double svm_decision(const SvmModel& model, std::span<const double> k_row);

// sign(score); a score of exactly zero classifies as +1.
int svm_classify(const SvmModel& model, std::span<const double> k_row);

// CSV with an id header row and id-prefixed rows; %.17g values.
void write_kernel_csv(const std::filesystem::path& path, const KernelMatrix& k);

}  // namespace qbnc
