#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qbnc/circuits.hpp"
#include "qbnc/netdata.hpp"
#include "qbnc/optim.hpp"
#include "qbnc/qsim.hpp"
#include "qbnc/stats.hpp"
#include "qbnc/synth.hpp"

namespace qbnc {

// One end-to-end run: data -> centrality features -> outlier filter ->
// stratified split -> dimensionality reduction -> feature scaling ->
// classifier -> metrics and plot-data files. Every field has a default so
// a config file may specify any subset; flags override file values.
struct PipelineConfig {
  // Data source: a cohort manifest path, or the synthetic generator when
  // the path is empty. `cohort` filters to "male" or "female" ("all" keeps
  // every subject).
  std::string manifest;
  SyntheticCohortSpec synth;
  std::string cohort = "all";

  bool zscore_enabled = true;
  double zscore_threshold = 3.0;

  double train_fraction = 0.7;
  bool stratified = true;

  int components = 4;           // retained eigendirections
  int loadings_component = 0;   // which component the loadings file reports

  int fmap_depth = 2;
  Entanglement entanglement = Entanglement::full;
  int ansatz_layers = 2;
  Entangler entangler = Entangler::cnot_chain;

  std::string classifier = "svm-classical";  // vqc | qsvm | svm-classical
  double svm_c = 1.0;
  std::uint64_t kernel_shots = 0;  // 0 = exact fidelity kernel
  std::uint64_t vqc_shots = 300;   // 0 = exact probabilities
  OptimizerConfig optimizer;

  // Gate/readout noise and the mitigation switch apply to the shot-count
  // distribution study only; the classifier stages sample noiselessly.
  NoiseModel noise;
  int resilience = 0;  // 0 = raw counts, 1 = readout mitigation
  bool emit_distribution = false;
  std::string distribution_circuit = "feature_map";  // or "ghz"

  std::uint64_t seed = 0;
  int threads = 0;  // 0 = hardware concurrency
  std::string out_dir = "qbnc-run";
  double scale_lo = 0.0;
  double scale_hi = kPi;
};

// Parses a JSON config (flat keys, all optional, unknown keys rejected).
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

// Canonical JSON rendering of every field (sorted keys); reloading it
// reproduces the config exactly.
std::string resolved_config_json(const PipelineConfig& config);

struct PipelineResult {
  MetricsReport test_metrics;
  double train_accuracy = 0.0;
  int subjects_total = 0;
  int subjects_after_filter = 0;
  std::filesystem::path out_dir;
};

// Executes the staged run and writes config.resolved.json, metrics.json,
// scree.csv, loadings.csv, roc.csv, kernel_train/test.csv (qsvm),
// training_curve.csv (vqc), and counts.json (when emit_distribution).
// Stage failures carry the stage name in the exception message.
PipelineResult run_pipeline(const PipelineConfig& config);

// Shot-distribution study: the chosen circuit sampled ideally, with the
// configured noise, and with readout mitigation applied to the noisy
// counts (resilience 0 leaves them raw). Returns the JSON text written to
// counts.json: the three distributions plus cumulative forms and total
// variation distances against ideal.
struct DistributionStudySpec {
  std::string circuit = "feature_map";  // or "ghz"
  int n_qubits = 4;
  int depth = 2;                 // feature-map repetitions
  std::vector<double> x;         // features; empty = pi/4 on every qubit
  NoiseModel noise;
  std::uint64_t shots = 10000;
  int resilience = 1;
  std::uint64_t seed = 0;
};

std::string emit_distribution_study(const DistributionStudySpec& spec);

}  // namespace qbnc
