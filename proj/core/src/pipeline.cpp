#include "qbnc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "qbnc/kernel_svm.hpp"
#include "qbnc/pca.hpp"
#include "qbnc/rng.hpp"
#include "qbnc/vqc.hpp"

namespace qbnc {

namespace {

using nlohmann::json;

[[noreturn]] void stage_error(const std::string& stage, const std::exception& e) {
  throw std::runtime_error("pipeline stage '" + stage + "': " + e.what());
}

std::string entanglement_name(Entanglement e) {
  return e == Entanglement::full ? "full" : "linear";
}
Entanglement entanglement_from(const std::string& s) {
  if (s == "full") return Entanglement::full;
  if (s == "linear") return Entanglement::linear;
  throw std::runtime_error("config: unknown entanglement '" + s + "'");
}
std::string entangler_name(Entangler e) {
  return e == Entangler::cnot_chain ? "cnot" : "cz";
}
Entangler entangler_from(const std::string& s) {
  if (s == "cnot") return Entangler::cnot_chain;
  if (s == "cz") return Entangler::cz_chain;
  throw std::runtime_error("config: unknown entangler '" + s + "'");
}

double scalar_readout(const std::vector<double>& v, const char* key) {
  if (v.empty()) return 0.0;
  if (v.size() == 1) return v[0];
  throw std::runtime_error(std::string("config: ") + key +
                           " must be a single probability in a config file");
}

json config_to_json(const PipelineConfig& c) {
  json j;
  j["manifest"] = c.manifest;
  j["synth_per_class"] = c.synth.per_class;
  j["synth_nodes"] = c.synth.n_nodes;
  j["synth_effect"] = c.synth.effect;
  j["cohort"] = c.cohort;
  j["zscore_enabled"] = c.zscore_enabled;
  j["zscore_threshold"] = c.zscore_threshold;
  j["train_fraction"] = c.train_fraction;
  j["stratified"] = c.stratified;
  j["components"] = c.components;
  j["loadings_component"] = c.loadings_component;
  j["fmap_depth"] = c.fmap_depth;
  j["entanglement"] = entanglement_name(c.entanglement);
  j["ansatz_layers"] = c.ansatz_layers;
  j["entangler"] = entangler_name(c.entangler);
  j["classifier"] = c.classifier;
  j["svm_c"] = c.svm_c;
  j["kernel_shots"] = c.kernel_shots;
  j["vqc_shots"] = c.vqc_shots;
  j["opt_rho_begin"] = c.optimizer.rho_begin;
  j["opt_rho_end"] = c.optimizer.rho_end;
  j["opt_max_evals"] = c.optimizer.max_evals;
  j["depolarizing_1q"] = c.noise.depolarizing_1q;
  j["depolarizing_2q"] = c.noise.depolarizing_2q;
  j["readout_p10"] = scalar_readout(c.noise.readout_p10, "readout_p10");
  j["readout_p01"] = scalar_readout(c.noise.readout_p01, "readout_p01");
  j["resilience"] = c.resilience;
  j["emit_distribution"] = c.emit_distribution;
  j["distribution_circuit"] = c.distribution_circuit;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["out_dir"] = c.out_dir;
  j["scale_lo"] = c.scale_lo;
  j["scale_hi"] = c.scale_hi;
  return j;
}

}  // namespace

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("config: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("config: invalid JSON in " + path.string() +
                             ": " + e.what());
  }
  if (!j.is_object()) throw std::runtime_error("config: not a JSON object");

  PipelineConfig c;
  const json defaults = config_to_json(c);
  for (const auto& [key, value] : j.items()) {
    if (!defaults.contains(key))
      throw std::runtime_error("config: unknown key '" + key + "'");
    (void)value;
  }
  auto get = [&](const char* key, auto fallback) {
    using T = decltype(fallback);
    return j.contains(key) ? j.at(key).get<T>() : fallback;
  };
  c.manifest = get("manifest", c.manifest);
  c.synth.per_class = get("synth_per_class", c.synth.per_class);
  c.synth.n_nodes = get("synth_nodes", c.synth.n_nodes);
  c.synth.effect = get("synth_effect", c.synth.effect);
  c.cohort = get("cohort", c.cohort);
  c.zscore_enabled = get("zscore_enabled", c.zscore_enabled);
  c.zscore_threshold = get("zscore_threshold", c.zscore_threshold);
  c.train_fraction = get("train_fraction", c.train_fraction);
  c.stratified = get("stratified", c.stratified);
  c.components = get("components", c.components);
  c.loadings_component = get("loadings_component", c.loadings_component);
  c.fmap_depth = get("fmap_depth", c.fmap_depth);
  c.entanglement =
      entanglement_from(get("entanglement", entanglement_name(c.entanglement)));
  c.ansatz_layers = get("ansatz_layers", c.ansatz_layers);
  c.entangler = entangler_from(get("entangler", entangler_name(c.entangler)));
  c.classifier = get("classifier", c.classifier);
  c.svm_c = get("svm_c", c.svm_c);
  c.kernel_shots = get("kernel_shots", c.kernel_shots);
  c.vqc_shots = get("vqc_shots", c.vqc_shots);
  c.optimizer.rho_begin = get("opt_rho_begin", c.optimizer.rho_begin);
  c.optimizer.rho_end = get("opt_rho_end", c.optimizer.rho_end);
  c.optimizer.max_evals = get("opt_max_evals", c.optimizer.max_evals);
  c.noise.depolarizing_1q = get("depolarizing_1q", c.noise.depolarizing_1q);
  c.noise.depolarizing_2q = get("depolarizing_2q", c.noise.depolarizing_2q);
  const double p10 = get("readout_p10", 0.0);
  const double p01 = get("readout_p01", 0.0);
  if (p10 != 0.0) c.noise.readout_p10 = {p10};
  if (p01 != 0.0) c.noise.readout_p01 = {p01};
  c.resilience = get("resilience", c.resilience);
  c.emit_distribution = get("emit_distribution", c.emit_distribution);
  c.distribution_circuit = get("distribution_circuit", c.distribution_circuit);
  c.seed = get("seed", c.seed);
  c.threads = get("threads", c.threads);
  c.out_dir = get("out_dir", c.out_dir);
  c.scale_lo = get("scale_lo", c.scale_lo);
  c.scale_hi = get("scale_hi", c.scale_hi);
  c.synth.seed = c.seed;
  return c;
}

std::string resolved_config_json(const PipelineConfig& config) {
  return config_to_json(config).dump(2) + "\n";
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_scree_csv(const std::filesystem::path& path, const PcaModel& model) {
  const VarianceReport rep = explained_variance_report(model);
  std::string text = "component,ratio,cumulative\n";
  char buf[128];
  for (std::size_t i = 0; i < rep.ratio.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i + 1, rep.ratio[i],
                  rep.cumulative[i]);
    text += buf;
  }
  write_text(path, text);
}

void write_loadings_csv(const std::filesystem::path& path, const PcaModel& model,
                        int component) {
  std::string text = "feature,loading\n";
  char buf[160];
  for (const auto& [name, value] : loadings(model, component)) {
    std::snprintf(buf, sizeof buf, "%s,%.17g\n", name.c_str(), value);
    text += buf;
  }
  write_text(path, text);
}

void write_training_curve_csv(const std::filesystem::path& path,
                              const std::vector<EvalRecord>& history) {
  std::string text = "eval,objective\n";
  char buf[96];
  for (const EvalRecord& r : history) {
    std::snprintf(buf, sizeof buf, "%d,%.17g\n", r.index, r.f);
    text += buf;
  }
  write_text(path, text);
}

// Distribution maps drop entries that projection zeroed, so the zero-noise
// case yields byte-identical ideal/noisy/mitigated objects.
json distribution_json(const std::map<std::string, double>& dist) {
  json j = json::object();
  for (const auto& [bits, p] : dist)
    if (std::abs(p) > 1e-15) j[bits] = p;
  return j;
}

struct ClassifierOutput {
  Eigen::VectorXd train_scores;
  Eigen::VectorXd test_scores;
  std::vector<int> train_pred;
  std::vector<int> test_pred;
};

}  // namespace

std::string emit_distribution_study(const DistributionStudySpec& spec) {
  if (spec.n_qubits < 1)
    throw std::invalid_argument("distribution study: need >= 1 qubit");
  if (spec.shots < 1)
    throw std::invalid_argument("distribution study: need >= 1 shot");
  if (spec.resilience != 0 && spec.resilience != 1)
    throw std::invalid_argument("distribution study: resilience must be 0 or 1");
  spec.noise.validate(spec.n_qubits);

  Circuit circuit(spec.n_qubits);
  if (spec.circuit == "ghz") {
    circuit.h(0);
    for (int q = 0; q + 1 < spec.n_qubits; ++q) circuit.cnot(q, q + 1);
  } else if (spec.circuit == "feature_map") {
    std::vector<double> x = spec.x;
    if (x.empty()) x.assign(spec.n_qubits, kPi / 4.0);
    FeatureMapSpec fmap;
    fmap.n_qubits = spec.n_qubits;
    fmap.depth = spec.depth;
    circuit = zz_feature_map(fmap, x);
  } else {
    throw std::invalid_argument("distribution study: unknown circuit '" +
                                spec.circuit + "'");
  }

  // Ideal and noisy samplers share the seed: with an all-zero noise model
  // the two runs consume identical random streams and coincide bit-exactly.
  const CountsTable ideal_counts = sample(circuit, {}, spec.shots, spec.seed);
  const CountsTable noisy_counts =
      sample(circuit, {}, spec.shots, spec.seed, spec.noise);
  const std::map<std::string, double> ideal =
      counts_to_probabilities(ideal_counts);
  const std::map<std::string, double> noisy =
      counts_to_probabilities(noisy_counts);

  std::map<std::string, double> mitigated = noisy;
  json quasi = json::object();
  if (spec.resilience == 1) {
    const MitigationResult mit = mitigate_counts(
        noisy_counts, readout_calibration(spec.noise, spec.n_qubits));
    mitigated = mit.projected;
    quasi = distribution_json(mit.quasi);
  }

  json j;
  j["circuit"] = spec.circuit;
  j["n_qubits"] = spec.n_qubits;
  j["shots"] = spec.shots;
  j["seed"] = spec.seed;
  j["resilience"] = spec.resilience;
  j["noise"] = {{"depolarizing_1q", spec.noise.depolarizing_1q},
                {"depolarizing_2q", spec.noise.depolarizing_2q},
                {"readout_p10", spec.noise.readout_p10},
                {"readout_p01", spec.noise.readout_p01}};
  j["ideal"] = distribution_json(ideal);
  j["noisy"] = distribution_json(noisy);
  j["mitigated"] = distribution_json(mitigated);
  j["mitigated_quasi"] = quasi;

  std::set<std::string> keys;
  for (const auto& [k, v] : ideal) keys.insert(k);
  for (const auto& [k, v] : noisy) keys.insert(k);
  for (const auto& [k, v] : mitigated) keys.insert(k);
  auto cumulative = [&](const std::map<std::string, double>& dist) {
    std::vector<double> c;
    double run = 0.0;
    for (const std::string& k : keys) {
      const auto it = dist.find(k);
      run += (it == dist.end()) ? 0.0 : it->second;
      c.push_back(run);
    }
    return c;
  };
  j["cumulative"] = {{"bitstrings", std::vector<std::string>(keys.begin(), keys.end())},
                     {"ideal", cumulative(ideal)},
                     {"noisy", cumulative(noisy)},
                     {"mitigated", cumulative(mitigated)}};
  j["tv_noisy_vs_ideal"] = total_variation(noisy, ideal);
  j["tv_mitigated_vs_ideal"] = total_variation(mitigated, ideal);
  return j.dump(2) + "\n";
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  namespace fs = std::filesystem;
  if (config.classifier != "vqc" && config.classifier != "qsvm" &&
      config.classifier != "svm-classical")
    throw std::invalid_argument("pipeline: unknown classifier '" +
                                config.classifier + "'");
  if (config.resilience != 0 && config.resilience != 1)
    throw std::invalid_argument("pipeline: resilience must be 0 or 1");
  if (config.cohort != "all" && config.cohort != "male" &&
      config.cohort != "female")
    throw std::invalid_argument("pipeline: cohort must be all, male, or female");

  const fs::path out_dir(config.out_dir);
  fs::create_directories(out_dir);
  write_text(out_dir / "config.resolved.json", resolved_config_json(config));

  PipelineResult result;
  result.out_dir = out_dir;

  // Stage: data.
  std::vector<SubjectRecord> subjects;
  try {
    if (config.manifest.empty()) {
      SyntheticCohortSpec synth = config.synth;
      synth.seed = config.seed;
      subjects = synth_cohort(synth);
    } else {
      subjects = load_manifest(config.manifest);
    }
    if (config.cohort != "all") {
      const Cohort keep = cohort_from_string(config.cohort);
      std::erase_if(subjects,
                    [&](const SubjectRecord& s) { return s.cohort != keep; });
    }
    if (subjects.size() < 4)
      throw std::runtime_error("fewer than 4 subjects after cohort filter");
  } catch (const std::exception& e) {
    stage_error("data", e);
  }
  result.subjects_total = static_cast<int>(subjects.size());

  // Stage: centrality features.
  LabeledDataset dataset;
  try {
    dataset = build_evc_dataset(subjects, 1e-10, 10000, config.threads);
  } catch (const std::exception& e) {
    stage_error("evc", e);
  }

  // Stage: outlier filter.
  try {
    if (config.zscore_enabled) {
      const std::vector<int> kept =
          zscore_filter(dataset.X, config.zscore_threshold);
      LabeledDataset filtered;
      filtered.X.resize(kept.size(), dataset.X.cols());
      filtered.feature_names = dataset.feature_names;
      for (std::size_t r = 0; r < kept.size(); ++r) {
        filtered.X.row(r) = dataset.X.row(kept[r]);
        filtered.y.push_back(dataset.y[kept[r]]);
        filtered.subject_ids.push_back(dataset.subject_ids[kept[r]]);
      }
      dataset = std::move(filtered);
    }
  } catch (const std::exception& e) {
    stage_error("zscore", e);
  }
  result.subjects_after_filter = dataset.rows();

  // Stage: split.
  SplitResult split;
  try {
    split = train_test_split(dataset, config.train_fraction, config.seed,
                             config.stratified);
  } catch (const std::exception& e) {
    stage_error("split", e);
  }

  // Stage: dimensionality reduction (fit on train only).
  PcaModel pca;
  Eigen::MatrixXd train_feat, test_feat;
  try {
    pca = pca_fit(split.train.X, config.components, split.train.feature_names);
    train_feat = pca_transform(pca, split.train.X);
    test_feat = pca_transform(pca, split.test.X);
    write_scree_csv(out_dir / "scree.csv", pca);
    write_loadings_csv(out_dir / "loadings.csv", pca, config.loadings_component);
  } catch (const std::exception& e) {
    stage_error("pca", e);
  }

  // Stage: feature scaling (fit on train only).
  Eigen::MatrixXd train_scaled, test_scaled;
  try {
    auto [scaler, scaled] =
        scale_features(train_feat, config.scale_lo, config.scale_hi);
    train_scaled = std::move(scaled);
    test_scaled = apply_scaler(scaler, test_feat);
  } catch (const std::exception& e) {
    stage_error("scale", e);
  }

  // Stage: classifier.
  ClassifierOutput cls;
  try {
    if (config.classifier == "vqc") {
      VqcConfig vc;
      vc.feature_map.n_qubits = config.components;
      vc.feature_map.depth = config.fmap_depth;
      vc.feature_map.entanglement = config.entanglement;
      vc.ansatz.n_qubits = config.components;
      vc.ansatz.layers = config.ansatz_layers;
      vc.ansatz.entangler = config.entangler;
      vc.shots = config.vqc_shots;
      vc.seed = config.seed;
      vc.optimizer = config.optimizer;
      vc.scale_lo = config.scale_lo;
      vc.scale_hi = config.scale_hi;

      LabeledDataset train = split.train;
      train.X = train_feat;  // classifier scales internally
      const VqcModel model = vqc_train(train, vc);
      cls.train_scores = vqc_scores(model, train_feat);
      cls.test_scores = vqc_scores(model, test_feat);
      for (Eigen::Index i = 0; i < cls.train_scores.size(); ++i)
        cls.train_pred.push_back(cls.train_scores[i] >= 0.5 ? 1 : 0);
      for (Eigen::Index i = 0; i < cls.test_scores.size(); ++i)
        cls.test_pred.push_back(cls.test_scores[i] >= 0.5 ? 1 : 0);
      write_training_curve_csv(out_dir / "training_curve.csv",
                               model.training_curve);
      save_vqc(out_dir / "vqc_model.json", model);
    } else {
      FeatureMapSpec fmap;
      fmap.n_qubits = config.components;
      fmap.depth = config.fmap_depth;
      fmap.entanglement = config.entanglement;

      KernelMatrix k_train, k_test;
      if (config.classifier == "qsvm") {
        k_train = (config.kernel_shots == 0)
                      ? quantum_kernel_exact(train_scaled, train_scaled, fmap)
                      : quantum_kernel_sampled(train_scaled, train_scaled,
                                               fmap, config.kernel_shots,
                                               config.seed);
        k_test = (config.kernel_shots == 0)
                     ? quantum_kernel_exact(test_scaled, train_scaled, fmap)
                     : quantum_kernel_sampled(test_scaled, train_scaled, fmap,
                                              config.kernel_shots,
                                              mix_seed(config.seed, 17));
        k_train.row_ids = k_train.col_ids = split.train.subject_ids;
        k_test.row_ids = split.test.subject_ids;
        k_test.col_ids = split.train.subject_ids;
        write_kernel_csv(out_dir / "kernel_train.csv", k_train);
        write_kernel_csv(out_dir / "kernel_test.csv", k_test);
      } else {
        const double gamma = rbf_gamma_scale(train_scaled);
        k_train = classical_kernel(KernelKind::rbf, train_scaled, train_scaled,
                                   gamma);
        k_test = classical_kernel(KernelKind::rbf, test_scaled, train_scaled,
                                  gamma);
      }

      std::vector<int> y_pm;
      for (const int y : split.train.y) y_pm.push_back(y == 1 ? 1 : -1);
      const SvmModel svm = svm_fit(k_train, y_pm, config.svm_c);

      auto score_rows = [&](const KernelMatrix& k, Eigen::VectorXd& scores,
                            std::vector<int>& pred) {
        scores.resize(k.values.rows());
        std::vector<double> row(k.values.cols());
        for (Eigen::Index i = 0; i < k.values.rows(); ++i) {
          for (Eigen::Index j = 0; j < k.values.cols(); ++j)
            row[j] = k.values(i, j);
          scores[i] = svm_decision(svm, row);
          pred.push_back(scores[i] >= 0.0 ? 1 : 0);
        }
      };
      score_rows(k_train, cls.train_scores, cls.train_pred);
      score_rows(k_test, cls.test_scores, cls.test_pred);
    }
  } catch (const std::exception& e) {
    stage_error("classifier", e);
  }

  // Stage: metrics.
  try {
    result.test_metrics =
        compute_metrics(split.test.y, cls.test_pred, cls.test_scores);
    long hits = 0;
    for (std::size_t i = 0; i < cls.train_pred.size(); ++i)
      if (cls.train_pred[i] == split.train.y[i]) ++hits;
    result.train_accuracy =
        static_cast<double>(hits) / static_cast<double>(cls.train_pred.size());
    write_metrics_json(out_dir / "metrics.json", result.test_metrics);
    write_roc_csv(out_dir / "roc.csv", result.test_metrics);
  } catch (const std::exception& e) {
    stage_error("metrics", e);
  }

  // Stage: shot-distribution study (optional).
  if (config.emit_distribution) {
    try {
      DistributionStudySpec dspec;
      dspec.circuit = config.distribution_circuit;
      dspec.n_qubits = config.components;
      dspec.depth = config.fmap_depth;
      if (dspec.circuit == "feature_map" && train_scaled.rows() > 0) {
        dspec.x.assign(train_scaled.cols(), 0.0);
        for (Eigen::Index j = 0; j < train_scaled.cols(); ++j)
          dspec.x[j] = train_scaled(0, j);
      }
      dspec.noise = config.noise;
      dspec.shots = 10000;
      dspec.resilience = config.resilience;
      dspec.seed = config.seed;
      write_text(out_dir / "counts.json", emit_distribution_study(dspec));
    } catch (const std::exception& e) {
      stage_error("distribution", e);
    }
  }
  return result;
}

}  // namespace qbnc
