#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "qbnc/circuits.hpp"
#include "qbnc/netdata.hpp"
#include "qbnc/optim.hpp"
#include "qbnc/qsim.hpp"

namespace qbnc {

// Class-1 probability read out of a counts table: the share of shots whose
// bitstring has odd parity. Errors on zero shots.
double parity_probability(const CountsTable& counts);

// Infinite-shot limit: sum of |amplitude|^2 over odd-parity basis states.
double exact_parity_probability(const Statevector& s);

// Variational classifier: feature-map encoding, trainable rotation layers,
// parity readout, derivative-free training on binary cross-entropy.
struct VqcConfig {
  FeatureMapSpec feature_map;  // n_qubits must equal the feature count
  AnsatzSpec ansatz;           // same qubit count as the feature map
  std::uint64_t shots = 300;   // measurement shots per circuit; 0 = exact
  std::uint64_t seed = 0;
  OptimizerConfig optimizer;
  double scale_lo = 0.0;  // feature scaling target interval
  double scale_hi = kPi;
};

struct VqcModel {
  FeatureMapSpec feature_map;
  AnsatzSpec ansatz;
  std::vector<double> theta;
  FeatureScaler scaler;
  std::uint64_t shots = 300;
  std::uint64_t seed = 0;
  std::vector<EvalRecord> training_curve;  // loss per optimizer evaluation
};

// Mean binary cross-entropy of the parity probabilities at theta over the
// already-scaled rows of x. Probabilities are clamped to [1e-9, 1 - 1e-9].
// Shot sampling uses a fixed per-row seed, so the loss is a deterministic
// function of theta and repeated evaluations see the same noise draw.
double vqc_loss(std::span<const double> theta, const Eigen::MatrixXd& scaled_x,
                const std::vector<int>& y, const VqcConfig& config);

// Fits the scaler on the training features, draws theta0 uniformly from
// [-pi, pi] (seeded), and minimizes vqc_loss. Labels must be 0/1 with both
// classes present; the feature count must equal the qubit count.
VqcModel vqc_train(const LabeledDataset& train, const VqcConfig& config);

// Class-1 scores (parity probabilities at the trained theta); rows of x are
// raw features, scaled by the stored scaler. Deterministic given the model.
Eigen::VectorXd vqc_scores(const VqcModel& model, const Eigen::MatrixXd& x);

// Score >= 0.5 maps to label 1.
std::vector<int> vqc_predict(const VqcModel& model, const Eigen::MatrixXd& x);

// JSON model persistence; loading restores every field bit-exactly.
void save_vqc(const std::filesystem::path& path, const VqcModel& model);
VqcModel load_vqc(const std::filesystem::path& path);

}  // namespace qbnc
