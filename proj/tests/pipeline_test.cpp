#include <doctest.h>

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbnc/kernel_svm.hpp"
#include "qbnc/pca.hpp"
#include "qbnc/pipeline.hpp"
#include "qbnc/rng.hpp"

using namespace qbnc;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("qbnc_pipe_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

PipelineConfig small_config(const fs::path& out) {
  PipelineConfig cfg;
  cfg.synth.per_class = 6;
  cfg.synth.n_nodes = 8;
  cfg.synth.effect = 1.0;
  cfg.components = 3;
  cfg.classifier = "svm-classical";
  cfg.seed = 5;
  cfg.synth.seed = 5;
  cfg.threads = 1;
  cfg.out_dir = out.string();
  return cfg;
}

}  // namespace

TEST_CASE("pipeline reruns are byte-identical") {
  const fs::path dir = fresh_dir("rerun");
  const PipelineConfig cfg = small_config(dir);

  const PipelineResult a = run_pipeline(cfg);
  std::map<std::string, std::string> first;
  for (const char* name :
       {"config.resolved.json", "metrics.json", "scree.csv", "loadings.csv",
        "roc.csv"})
    first[name] = slurp(dir / name);

  const PipelineResult b = run_pipeline(cfg);
  for (const auto& [name, bytes] : first) CHECK(slurp(dir / name) == bytes);
  CHECK(a.test_metrics.accuracy == b.test_metrics.accuracy);
  CHECK(a.test_metrics.auc == b.test_metrics.auc);
  CHECK(a.train_accuracy == b.train_accuracy);
  CHECK(a.subjects_total == 24);
  CHECK(a.subjects_after_filter == b.subjects_after_filter);
  fs::remove_all(dir);
}

TEST_CASE("classical run writes the base artifact set and nothing else") {
  const fs::path dir = fresh_dir("classic");
  (void)run_pipeline(small_config(dir));
  for (const char* name :
       {"config.resolved.json", "metrics.json", "scree.csv", "loadings.csv",
        "roc.csv"})
    CHECK(fs::exists(dir / name));
  CHECK(!fs::exists(dir / "kernel_train.csv"));
  CHECK(!fs::exists(dir / "training_curve.csv"));
  CHECK(!fs::exists(dir / "counts.json"));

  // Headers of the plot-data files.
  CHECK(slurp(dir / "scree.csv").rfind("component,ratio,cumulative\n", 0) == 0);
  CHECK(slurp(dir / "loadings.csv").rfind("feature,loading\n", 0) == 0);
  CHECK(slurp(dir / "roc.csv").rfind("threshold,fpr,tpr\n", 0) == 0);

  const auto parsed = nlohmann::json::parse(slurp(dir / "metrics.json"));
  CHECK(parsed.contains("accuracy"));
  CHECK(parsed.contains("auc"));
  CHECK(parsed.contains("tp"));
  fs::remove_all(dir);
}

TEST_CASE("quantum kernel run adds the train and test kernel matrices") {
  const fs::path dir = fresh_dir("qsvm");
  PipelineConfig cfg = small_config(dir);
  cfg.classifier = "qsvm";
  const PipelineResult r = run_pipeline(cfg);
  CHECK(fs::exists(dir / "kernel_train.csv"));
  CHECK(fs::exists(dir / "kernel_test.csv"));
  CHECK(r.test_metrics.roc.size() > 2);

  // Kernel rows are labeled with subject ids from both classes.
  const std::string table = slurp(dir / "kernel_train.csv");
  CHECK(table.rfind("id,", 0) == 0);
  CHECK(table.find("_hc_") != std::string::npos);
  CHECK(table.find("_psp_") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("variational run writes the optimizer curve and the model file") {
  const fs::path dir = fresh_dir("vqc");
  PipelineConfig cfg = small_config(dir);
  cfg.classifier = "vqc";
  cfg.components = 2;
  cfg.vqc_shots = 0;
  cfg.optimizer.max_evals = 40;
  cfg.scale_hi = 0.5;
  (void)run_pipeline(cfg);
  CHECK(fs::exists(dir / "training_curve.csv"));
  CHECK(fs::exists(dir / "vqc_model.json"));
  const std::string curve = slurp(dir / "training_curve.csv");
  CHECK(curve.rfind("eval,objective\n", 0) == 0);
  CHECK(curve.find("\n1,") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("distribution study is requested through the pipeline switch") {
  const fs::path dir = fresh_dir("dist");
  PipelineConfig cfg = small_config(dir);
  cfg.emit_distribution = true;
  cfg.distribution_circuit = "ghz";
  cfg.noise.readout_p10 = {0.05};
  cfg.noise.readout_p01 = {0.05};
  cfg.resilience = 1;
  (void)run_pipeline(cfg);
  REQUIRE(fs::exists(dir / "counts.json"));
  const auto j = nlohmann::json::parse(slurp(dir / "counts.json"));
  CHECK(j.at("circuit") == "ghz");
  CHECK(j.at("shots") == 10000);
  CHECK(j.contains("ideal"));
  CHECK(j.contains("noisy"));
  CHECK(j.contains("mitigated"));
  CHECK(j.at("tv_mitigated_vs_ideal").get<double>() <
        j.at("tv_noisy_vs_ideal").get<double>());
  fs::remove_all(dir);
}

TEST_CASE("zero-noise study collapses to three identical distributions") {
  DistributionStudySpec spec;
  spec.circuit = "ghz";
  spec.n_qubits = 3;
  spec.shots = 4000;
  spec.seed = 9;
  spec.resilience = 1;
  const std::string text = emit_distribution_study(spec);
  const std::string again = emit_distribution_study(spec);
  CHECK(text == again);

  const auto j = nlohmann::json::parse(text);
  CHECK(j.at("ideal") == j.at("noisy"));
  CHECK(j.at("ideal") == j.at("mitigated"));
  CHECK(j.at("tv_noisy_vs_ideal").get<double>() == 0.0);
  CHECK(j.at("tv_mitigated_vs_ideal").get<double>() == 0.0);

  const auto cum = j.at("cumulative");
  const auto totals = cum.at("ideal").get<std::vector<double>>();
  REQUIRE(!totals.empty());
  CHECK(totals.back() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("readout flips are repaired by mitigation in the study output") {
  DistributionStudySpec spec;
  spec.circuit = "feature_map";
  spec.n_qubits = 3;
  spec.depth = 2;
  spec.noise.readout_p10 = {0.08};
  spec.noise.readout_p01 = {0.08};
  spec.shots = 20000;
  spec.seed = 4;
  spec.resilience = 1;
  const auto j = nlohmann::json::parse(emit_distribution_study(spec));
  CHECK(j.at("tv_mitigated_vs_ideal").get<double>() <
        j.at("tv_noisy_vs_ideal").get<double>());

  // resilience 0 leaves the noisy counts in place.
  spec.resilience = 0;
  const auto raw = nlohmann::json::parse(emit_distribution_study(spec));
  CHECK(raw.at("mitigated") == raw.at("noisy"));
  CHECK(raw.at("mitigated_quasi").empty());
}

TEST_CASE("pipeline metrics equal a by-hand module composition") {
  const fs::path dir = fresh_dir("manual");
  const PipelineConfig cfg = small_config(dir);
  const PipelineResult got = run_pipeline(cfg);

  SyntheticCohortSpec synth = cfg.synth;
  synth.seed = cfg.seed;
  const std::vector<SubjectRecord> subjects = synth_cohort(synth);
  LabeledDataset dataset = build_evc_dataset(subjects, 1e-10, 10000, cfg.threads);

  const std::vector<int> kept = zscore_filter(dataset.X, cfg.zscore_threshold);
  LabeledDataset filtered;
  filtered.X.resize(static_cast<Eigen::Index>(kept.size()), dataset.X.cols());
  filtered.feature_names = dataset.feature_names;
  for (std::size_t r = 0; r < kept.size(); ++r) {
    filtered.X.row(static_cast<Eigen::Index>(r)) = dataset.X.row(kept[r]);
    filtered.y.push_back(dataset.y[static_cast<std::size_t>(kept[r])]);
    filtered.subject_ids.push_back(
        dataset.subject_ids[static_cast<std::size_t>(kept[r])]);
  }

  const SplitResult split =
      train_test_split(filtered, cfg.train_fraction, cfg.seed, cfg.stratified);
  const PcaModel pca =
      pca_fit(split.train.X, cfg.components, split.train.feature_names);
  const Eigen::MatrixXd train_feat = pca_transform(pca, split.train.X);
  const Eigen::MatrixXd test_feat = pca_transform(pca, split.test.X);
  const auto [scaler, train_scaled] =
      scale_features(train_feat, cfg.scale_lo, cfg.scale_hi);
  const Eigen::MatrixXd test_scaled = apply_scaler(scaler, test_feat);

  const double gamma = rbf_gamma_scale(train_scaled);
  const KernelMatrix k_train =
      classical_kernel(KernelKind::rbf, train_scaled, train_scaled, gamma);
  const KernelMatrix k_test =
      classical_kernel(KernelKind::rbf, test_scaled, train_scaled, gamma);
  std::vector<int> y_pm;
  for (const int y : split.train.y) y_pm.push_back(y == 1 ? 1 : -1);
  const SvmModel svm = svm_fit(k_train, y_pm, cfg.svm_c);

  Eigen::VectorXd test_scores(k_test.values.rows());
  std::vector<int> test_pred;
  std::vector<double> row(static_cast<std::size_t>(k_test.values.cols()));
  for (Eigen::Index i = 0; i < k_test.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < k_test.values.cols(); ++j)
      row[static_cast<std::size_t>(j)] = k_test.values(i, j);
    test_scores(i) = svm_decision(svm, row);
    test_pred.push_back(test_scores(i) >= 0.0 ? 1 : 0);
  }
  const MetricsReport want = compute_metrics(split.test.y, test_pred, test_scores);

  CHECK(got.test_metrics.accuracy == want.accuracy);
  CHECK(got.test_metrics.auc == want.auc);
  CHECK(got.test_metrics.tp == want.tp);
  CHECK(got.test_metrics.tn == want.tn);
  CHECK(got.test_metrics.fp == want.fp);
  CHECK(got.test_metrics.fn == want.fn);
  CHECK(got.subjects_after_filter == filtered.rows());
  fs::remove_all(dir);
}

TEST_CASE("config file round trip preserves every field") {
  PipelineConfig cfg;
  cfg.manifest = "/data/some/manifest.csv";
  cfg.cohort = "female";
  cfg.zscore_enabled = false;
  cfg.zscore_threshold = 2.5;
  cfg.train_fraction = 0.6;
  cfg.stratified = false;
  cfg.components = 5;
  cfg.loadings_component = 2;
  cfg.fmap_depth = 3;
  cfg.entanglement = Entanglement::linear;
  cfg.ansatz_layers = 4;
  cfg.entangler = Entangler::cz_chain;
  cfg.classifier = "qsvm";
  cfg.svm_c = 7.5;
  cfg.kernel_shots = 512;
  cfg.vqc_shots = 128;
  cfg.optimizer.rho_begin = 0.8;
  cfg.optimizer.rho_end = 1e-5;
  cfg.optimizer.max_evals = 321;
  cfg.noise.depolarizing_1q = 0.01;
  cfg.noise.depolarizing_2q = 0.02;
  cfg.noise.readout_p10 = {0.03};
  cfg.noise.readout_p01 = {0.04};
  cfg.resilience = 1;
  cfg.emit_distribution = true;
  cfg.distribution_circuit = "ghz";
  cfg.seed = 99;
  cfg.threads = 2;
  cfg.out_dir = "somewhere/else";
  cfg.scale_lo = 0.1;
  cfg.scale_hi = 2.2;
  cfg.synth.per_class = 9;
  cfg.synth.n_nodes = 11;
  cfg.synth.effect = 0.7;
  cfg.synth.seed = 99;

  const std::string text = resolved_config_json(cfg);
  const fs::path path = fs::temp_directory_path() / "qbnc_cfg_roundtrip.json";
  std::ofstream(path) << text;
  const PipelineConfig back = load_pipeline_config(path);
  fs::remove(path);
  CHECK(resolved_config_json(back) == text);
}

TEST_CASE("config parsing rejects unknown keys and bad values") {
  const fs::path dir = fs::temp_directory_path();
  const fs::path bad = dir / "qbnc_cfg_bad.json";

  std::ofstream(bad) << "{\"bogus_key\": 1}\n";
  CHECK_THROWS_WITH_AS((void)load_pipeline_config(bad),
                       doctest::Contains("unknown key"), std::runtime_error);

  std::ofstream(bad) << "not json\n";
  CHECK_THROWS_AS((void)load_pipeline_config(bad), std::runtime_error);

  std::ofstream(bad) << "[1, 2]\n";
  CHECK_THROWS_AS((void)load_pipeline_config(bad), std::runtime_error);

  std::ofstream(bad) << "{\"entanglement\": \"ring\"}\n";
  CHECK_THROWS_AS((void)load_pipeline_config(bad), std::runtime_error);
  fs::remove(bad);

  PipelineConfig cfg;
  cfg.classifier = "forest";
  CHECK_THROWS_AS((void)run_pipeline(cfg), std::invalid_argument);
}

TEST_CASE("stage failures carry the stage name") {
  PipelineConfig cfg = small_config(fresh_dir("stagefail"));
  cfg.manifest = "/nonexistent/manifest.csv";
  CHECK_THROWS_WITH_AS((void)run_pipeline(cfg),
                       doctest::Contains("pipeline stage 'data'"),
                       std::runtime_error);

  PipelineConfig few = small_config(fresh_dir("stagefail2"));
  few.components = 40;  // more than the training rows can support
  CHECK_THROWS_WITH_AS((void)run_pipeline(few),
                       doctest::Contains("pipeline stage 'pca'"),
                       std::runtime_error);
  fs::remove_all(fs::temp_directory_path() / "qbnc_pipe_stagefail");
  fs::remove_all(fs::temp_directory_path() / "qbnc_pipe_stagefail2");
}
