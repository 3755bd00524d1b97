// qbnc: brain-network classification toolkit.
//
// Subcommands cover the individual pipeline stages (evc, pca, split,
// kernel, stats), cohort generation (synth), the end-to-end runs (train,
// pipeline) and the shot-distribution study (distribution). Every
// stochastic stage takes --seed; all output lands in --out (default from
// QBNC_OUTPUT_DIR, falling back to ./qbnc-run).

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qbnc/circuits.hpp"
#include "qbnc/kernel_svm.hpp"
#include "qbnc/netdata.hpp"
#include "qbnc/pca.hpp"
#include "qbnc/pipeline.hpp"
#include "qbnc/qsim.hpp"
#include "qbnc/rng.hpp"
#include "qbnc/stats.hpp"
#include "qbnc/synth.hpp"
#include "qbnc/vqc.hpp"

namespace fs = std::filesystem;
using namespace qbnc;

namespace {

std::string default_out_dir() {
  const char* env = std::getenv("QBNC_OUTPUT_DIR");
  return env && *env ? std::string(env) : std::string("qbnc-run");
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void emit(const fs::path& out, const std::string& text) {
  if (out.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    write_text(out, text);
    std::printf("wrote %s\n", out.string().c_str());
  }
}

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Shared data-source options: manifest (+ optional node-name file) and the
// cohort filter.
struct SourceOpts {
  std::string manifest;
  std::string nodes;
  std::string cohort = "all";
};

void add_source_opts(CLI::App* sub, SourceOpts& s, bool required = true) {
  auto* m = sub->add_option("--manifest", s.manifest,
                            "Cohort manifest CSV (subject_id,cohort,label,matrix_path)");
  if (required) m->required();
  sub->add_option("--nodes", s.nodes, "Node-name file, one name per line");
  sub->add_option("--cohort", s.cohort, "Subject filter")
      ->check(CLI::IsMember({"all", "male", "female"}));
}

std::vector<SubjectRecord> load_subjects(const SourceOpts& s) {
  std::vector<std::string> names;
  if (!s.nodes.empty()) names = load_node_names(s.nodes);
  std::vector<SubjectRecord> subjects = load_manifest(s.manifest, names);
  if (s.cohort != "all") {
    const Cohort keep = cohort_from_string(s.cohort);
    std::erase_if(subjects,
                  [&](const SubjectRecord& r) { return r.cohort != keep; });
  }
  if (subjects.empty())
    throw std::runtime_error("no subjects left after the cohort filter");
  return subjects;
}

std::string dataset_csv(const LabeledDataset& ds) {
  std::string text = "subject_id,label";
  for (const std::string& f : ds.feature_names) text += "," + f;
  text += "\n";
  for (int i = 0; i < ds.rows(); ++i) {
    text += ds.subject_ids[static_cast<std::size_t>(i)];
    text += ds.y[static_cast<std::size_t>(i)] == 1 ? ",PSP" : ",HC";
    for (int j = 0; j < ds.cols(); ++j) text += "," + g17(ds.X(i, j));
    text += "\n";
  }
  return text;
}

Eigen::MatrixXd keep_rows(const Eigen::MatrixXd& x, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  return out;
}

LabeledDataset filter_dataset(const LabeledDataset& ds, const std::vector<int>& rows) {
  LabeledDataset out;
  out.X = keep_rows(ds.X, rows);
  out.feature_names = ds.feature_names;
  out.y.reserve(rows.size());
  out.subject_ids.reserve(rows.size());
  for (int r : rows) {
    out.y.push_back(ds.y[static_cast<std::size_t>(r)]);
    out.subject_ids.push_back(ds.subject_ids[static_cast<std::size_t>(r)]);
  }
  return out;
}

// Flag set shared by `train` and `pipeline`. Values are only copied into
// the config when the flag was actually given, so file values and defaults
// survive untouched.
struct RunFlags {
  SourceOpts src;
  int synth_per_class = 0;
  int synth_nodes = 0;
  double synth_effect = 0.0;
  bool zscore = true;
  double zscore_threshold = 0.0;
  double train_fraction = 0.0;
  bool stratified = true;
  int components = 0;
  int loadings_component = 0;
  int fmap_depth = 0;
  std::string entanglement;
  int ansatz_layers = 0;
  std::string entangler;
  std::string classifier;
  double svm_c = 0.0;
  std::uint64_t kernel_shots = 0;
  std::uint64_t vqc_shots = 0;
  double rho_begin = 0.0;
  double rho_end = 0.0;
  int max_evals = 0;
  double depol1 = 0.0, depol2 = 0.0, p10 = 0.0, p01 = 0.0;
  int resilience = 0;
  bool emit_distribution = false;
  std::string distribution_circuit;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out;
  double scale_lo = 0.0, scale_hi = 0.0;
};

void add_run_flags(CLI::App* sub, RunFlags& f) {
  add_source_opts(sub, f.src, /*required=*/false);
  sub->add_option("--synth-per-class", f.synth_per_class,
                  "Synthetic subjects per cohort/label cell (no --manifest)");
  sub->add_option("--synth-nodes", f.synth_nodes, "Synthetic node count");
  sub->add_option("--synth-effect", f.synth_effect,
                  "Connectivity shift added to the affected nodes");
  sub->add_flag("--zscore,!--no-zscore", f.zscore, "Outlier filter on centralities");
  sub->add_option("--zscore-threshold", f.zscore_threshold, "Outlier cut, in sigmas");
  sub->add_option("--train-fraction", f.train_fraction, "Training share of subjects");
  sub->add_flag("--stratified,!--no-stratified", f.stratified,
                "Split each label group separately");
  sub->add_option("--components,-k", f.components, "Retained principal components");
  sub->add_option("--component", f.loadings_component,
                  "Component reported in loadings.csv (0-based)");
  sub->add_option("--depth", f.fmap_depth, "Feature-map repetitions");
  sub->add_option("--entanglement", f.entanglement, "Feature-map pair pattern")
      ->check(CLI::IsMember({"full", "linear"}));
  sub->add_option("--layers", f.ansatz_layers, "Ansatz entangling layers");
  sub->add_option("--entangler", f.entangler, "Ansatz two-qubit gate")
      ->check(CLI::IsMember({"cnot", "cz"}));
  sub->add_option("--svm-c", f.svm_c, "Soft-margin penalty C");
  sub->add_option("--kernel-shots", f.kernel_shots,
                  "Shots per kernel entry (0 = exact fidelity)");
  sub->add_option("--vqc-shots", f.vqc_shots,
                  "Shots per circuit evaluation (0 = exact probabilities)");
  sub->add_option("--rho-begin", f.rho_begin, "Optimizer initial trust radius");
  sub->add_option("--rho-end", f.rho_end, "Optimizer final trust radius");
  sub->add_option("--max-evals", f.max_evals, "Optimizer evaluation budget");
  sub->add_option("--depol1", f.depol1, "1-qubit depolarizing probability");
  sub->add_option("--depol2", f.depol2, "2-qubit depolarizing probability");
  sub->add_option("--p10", f.p10, "Readout flip 1->0 probability");
  sub->add_option("--p01", f.p01, "Readout flip 0->1 probability");
  sub->add_option("--resilience", f.resilience, "0 raw counts, 1 readout mitigation")
      ->check(CLI::Range(0, 1));
  sub->add_flag("--emit-distribution", f.emit_distribution,
                "Also write the shot-distribution study (counts.json)");
  sub->add_option("--distribution-circuit", f.distribution_circuit,
                  "Circuit for the distribution study")
      ->check(CLI::IsMember({"feature_map", "ghz"}));
  sub->add_option("--seed", f.seed, "Base seed for every stochastic stage");
  sub->add_option("--threads", f.threads, "Worker threads (0 = hardware)");
  sub->add_option("--out", f.out, "Run directory");
  sub->add_option("--scale-lo", f.scale_lo, "Feature-scaling lower bound");
  sub->add_option("--scale-hi", f.scale_hi, "Feature-scaling upper bound");
}

void apply_run_flags(const CLI::App* sub, const RunFlags& f, PipelineConfig& cfg) {
  auto given = [&](const std::string& name) { return sub->count(name) > 0; };
  if (given("--manifest")) cfg.manifest = f.src.manifest;
  if (given("--cohort")) cfg.cohort = f.src.cohort;
  if (given("--synth-per-class")) cfg.synth.per_class = f.synth_per_class;
  if (given("--synth-nodes")) cfg.synth.n_nodes = f.synth_nodes;
  if (given("--synth-effect")) cfg.synth.effect = f.synth_effect;
  if (given("--zscore")) cfg.zscore_enabled = f.zscore;
  if (given("--zscore-threshold")) cfg.zscore_threshold = f.zscore_threshold;
  if (given("--train-fraction")) cfg.train_fraction = f.train_fraction;
  if (given("--stratified")) cfg.stratified = f.stratified;
  if (given("--components")) cfg.components = f.components;
  if (given("--component")) cfg.loadings_component = f.loadings_component;
  if (given("--depth")) cfg.fmap_depth = f.fmap_depth;
  if (given("--entanglement"))
    cfg.entanglement = f.entanglement == "linear" ? Entanglement::linear
                                                  : Entanglement::full;
  if (given("--layers")) cfg.ansatz_layers = f.ansatz_layers;
  if (given("--entangler"))
    cfg.entangler = f.entangler == "cz" ? Entangler::cz_chain
                                        : Entangler::cnot_chain;
  if (given("--classifier"))
    cfg.classifier = f.classifier == "svm" ? "svm-classical" : f.classifier;
  if (given("--svm-c")) cfg.svm_c = f.svm_c;
  if (given("--kernel-shots")) cfg.kernel_shots = f.kernel_shots;
  if (given("--vqc-shots")) cfg.vqc_shots = f.vqc_shots;
  if (given("--rho-begin")) cfg.optimizer.rho_begin = f.rho_begin;
  if (given("--rho-end")) cfg.optimizer.rho_end = f.rho_end;
  if (given("--max-evals")) cfg.optimizer.max_evals = f.max_evals;
  if (given("--depol1")) cfg.noise.depolarizing_1q = f.depol1;
  if (given("--depol2")) cfg.noise.depolarizing_2q = f.depol2;
  if (given("--p10")) cfg.noise.readout_p10 = {f.p10};
  if (given("--p01")) cfg.noise.readout_p01 = {f.p01};
  if (given("--resilience")) cfg.resilience = f.resilience;
  if (given("--emit-distribution")) cfg.emit_distribution = f.emit_distribution;
  if (given("--distribution-circuit"))
    cfg.distribution_circuit = f.distribution_circuit;
  if (given("--seed")) {
    cfg.seed = f.seed;
    cfg.synth.seed = f.seed;
  }
  if (given("--threads")) cfg.threads = f.threads;
  if (given("--out")) cfg.out_dir = f.out;
  if (given("--scale-lo")) cfg.scale_lo = f.scale_lo;
  if (given("--scale-hi")) cfg.scale_hi = f.scale_hi;
}

void print_run_summary(const PipelineResult& r) {
  std::printf("subjects        %d loaded, %d kept\n", r.subjects_total,
              r.subjects_after_filter);
  std::printf("train accuracy  %.4f\n", r.train_accuracy);
  std::printf("test accuracy   %.4f\n", r.test_metrics.accuracy);
  std::printf("test auc        %.4f\n", r.test_metrics.auc);
  std::printf("artifacts       %s\n", r.out_dir.string().c_str());
}

void run_pipeline_and_report(PipelineConfig cfg) {
  print_run_summary(run_pipeline(std::move(cfg)));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Brain-network classification on a statevector simulator"};
  app.require_subcommand(1);

  // evc: node centralities, single matrix or whole cohort.
  auto evc_matrix = std::make_shared<std::string>();
  auto evc_src = std::make_shared<SourceOpts>();
  auto evc_tol = std::make_shared<double>(1e-10);
  auto evc_iters = std::make_shared<int>(10000);
  auto evc_threads = std::make_shared<int>(0);
  auto evc_out = std::make_shared<std::string>();
  {
    CLI::App* sub = app.add_subcommand("evc", "Eigenvector centralities");
    sub->add_option("--matrix", *evc_matrix, "Single connectivity matrix file");
    add_source_opts(sub, *evc_src, /*required=*/false);
    sub->add_option("--tol", *evc_tol, "Power-iteration residual bound");
    sub->add_option("--max-iter", *evc_iters, "Power-iteration cap");
    sub->add_option("--threads", *evc_threads, "Worker threads (0 = hardware)");
    sub->add_option("--out", *evc_out, "Output CSV (default stdout)");
    sub->callback([=]() {
      const bool single = !evc_matrix->empty();
      if (single == !evc_src->manifest.empty())
        throw CLI::ValidationError("evc", "give exactly one of --matrix / --manifest");
      std::string text;
      if (single) {
        std::vector<std::string> names;
        if (!evc_src->nodes.empty()) names = load_node_names(evc_src->nodes);
        const ConnectivityMatrix m = load_matrix_file(*evc_matrix, names);
        const Eigen::VectorXd c = eigenvector_centrality(m, *evc_tol, *evc_iters);
        text = "node,centrality\n";
        for (int i = 0; i < m.n(); ++i)
          text += m.node_names[static_cast<std::size_t>(i)] + "," + g17(c[i]) + "\n";
      } else {
        const auto subjects = load_subjects(*evc_src);
        text = dataset_csv(
            build_evc_dataset(subjects, *evc_tol, *evc_iters, *evc_threads));
      }
      emit(*evc_out, text);
    });
  }

  // pca: full-cohort variance structure.
  auto pca_src = std::make_shared<SourceOpts>();
  auto pca_k = std::make_shared<int>(4);
  auto pca_comp = std::make_shared<int>(0);
  auto pca_z = std::make_shared<bool>(true);
  auto pca_zt = std::make_shared<double>(3.0);
  auto pca_threads = std::make_shared<int>(0);
  auto pca_out = std::make_shared<std::string>(default_out_dir());
  {
    CLI::App* sub = app.add_subcommand("pca", "Principal components of the cohort centralities");
    add_source_opts(sub, *pca_src);
    sub->add_option("--components,-k", *pca_k, "Retained components");
    sub->add_option("--component", *pca_comp, "Component for loadings.csv (0-based)");
    sub->add_flag("--zscore,!--no-zscore", *pca_z, "Outlier filter before the fit");
    sub->add_option("--zscore-threshold", *pca_zt, "Outlier cut, in sigmas");
    sub->add_option("--threads", *pca_threads, "Worker threads");
    sub->add_option("--out", *pca_out, "Output directory");
    sub->callback([=]() {
      LabeledDataset ds = build_evc_dataset(load_subjects(*pca_src), 1e-10,
                                            10000, *pca_threads);
      if (*pca_z) ds = filter_dataset(ds, zscore_filter(ds.X, *pca_zt));
      const PcaModel model = pca_fit(ds.X, *pca_k, ds.feature_names);
      const VarianceReport rep = explained_variance_report(model);
      const fs::path dir = *pca_out;

      std::string scree = "component,ratio,cumulative\n";
      for (std::size_t i = 0; i < rep.ratio.size(); ++i)
        scree += std::to_string(i + 1) + "," + g17(rep.ratio[i]) + "," +
                 g17(rep.cumulative[i]) + "\n";
      write_text(dir / "scree.csv", scree);

      std::string ld = "feature,loading\n";
      for (const auto& [name, value] : loadings(model, *pca_comp))
        ld += name + "," + g17(value) + "\n";
      write_text(dir / "loadings.csv", ld);

      const Eigen::MatrixXd scores = pca_transform(model, ds.X);
      std::string sc = "subject_id,label";
      for (int j = 0; j < model.k(); ++j) sc += ",pc" + std::to_string(j + 1);
      sc += "\n";
      for (int i = 0; i < scores.rows(); ++i) {
        sc += ds.subject_ids[static_cast<std::size_t>(i)];
        sc += ds.y[static_cast<std::size_t>(i)] == 1 ? ",PSP" : ",HC";
        for (int j = 0; j < scores.cols(); ++j) sc += "," + g17(scores(i, j));
        sc += "\n";
      }
      write_text(dir / "scores.csv", sc);

      for (std::size_t i = 0; i < rep.ratio.size(); ++i)
        std::printf("pc%zu  %5.1f%%  (cumulative %5.1f%%)\n", i + 1,
                    100.0 * rep.ratio[i], 100.0 * rep.cumulative[i]);
      std::printf("artifacts  %s\n", dir.string().c_str());
    });
  }

  // split: train/test membership only.
  auto sp_src = std::make_shared<SourceOpts>();
  auto sp_frac = std::make_shared<double>(0.7);
  auto sp_seed = std::make_shared<std::uint64_t>(0);
  auto sp_strat = std::make_shared<bool>(true);
  auto sp_out = std::make_shared<std::string>();
  {
    CLI::App* sub = app.add_subcommand("split", "Deterministic train/test partition");
    add_source_opts(sub, *sp_src);
    sub->add_option("--fraction", *sp_frac, "Training share");
    sub->add_option("--seed", *sp_seed, "Shuffle seed");
    sub->add_flag("--stratified,!--no-stratified", *sp_strat,
                  "Split each label group separately");
    sub->add_option("--out", *sp_out, "Output CSV (default stdout)");
    sub->callback([=]() {
      const LabeledDataset ds = build_evc_dataset(load_subjects(*sp_src));
      const SplitResult split = train_test_split(ds, *sp_frac, *sp_seed, *sp_strat);
      std::string text = "subject_id,side\n";
      for (const std::string& id : split.train.subject_ids) text += id + ",train\n";
      for (const std::string& id : split.test.subject_ids) text += id + ",test\n";
      emit(*sp_out, text);
    });
  }

  // train: end-to-end run, classifier required.
  auto tr_flags = std::make_shared<RunFlags>();
  {
    CLI::App* sub = app.add_subcommand("train", "Fit a classifier end to end");
    add_run_flags(sub, *tr_flags);
    sub->add_option("--classifier", tr_flags->classifier, "Model kind")
        ->required()
        ->check(CLI::IsMember({"vqc", "qsvm", "svm", "svm-classical"}));
    sub->callback([=]() {
      PipelineConfig cfg;
      cfg.out_dir = default_out_dir();
      apply_run_flags(sub, *tr_flags, cfg);
      run_pipeline_and_report(std::move(cfg));
    });
  }

  // pipeline: config file plus overrides.
  auto pl_flags = std::make_shared<RunFlags>();
  auto pl_config = std::make_shared<std::string>();
  {
    CLI::App* sub = app.add_subcommand("pipeline", "Run from a JSON config");
    sub->add_option("--config", *pl_config, "JSON config file");
    add_run_flags(sub, *pl_flags);
    sub->add_option("--classifier", pl_flags->classifier, "Model kind")
        ->check(CLI::IsMember({"vqc", "qsvm", "svm", "svm-classical"}));
    sub->callback([=]() {
      PipelineConfig cfg;
      if (!pl_config->empty()) {
        cfg = load_pipeline_config(*pl_config);
      } else {
        cfg.out_dir = default_out_dir();
      }
      apply_run_flags(sub, *pl_flags, cfg);
      run_pipeline_and_report(std::move(cfg));
    });
  }

  // kernel: Gram matrices without the SVM fit.
  auto kn_src = std::make_shared<SourceOpts>();
  auto kn_k = std::make_shared<int>(4);
  auto kn_depth = std::make_shared<int>(2);
  auto kn_ent = std::make_shared<std::string>("full");
  auto kn_shots = std::make_shared<std::uint64_t>(0);
  auto kn_frac = std::make_shared<double>(0.7);
  auto kn_strat = std::make_shared<bool>(true);
  auto kn_z = std::make_shared<bool>(true);
  auto kn_zt = std::make_shared<double>(3.0);
  auto kn_seed = std::make_shared<std::uint64_t>(0);
  auto kn_threads = std::make_shared<int>(0);
  auto kn_out = std::make_shared<std::string>(default_out_dir());
  {
    CLI::App* sub = app.add_subcommand("kernel", "Quantum fidelity kernel matrices");
    add_source_opts(sub, *kn_src);
    sub->add_option("--components,-k", *kn_k, "Principal components / qubits");
    sub->add_option("--depth", *kn_depth, "Feature-map repetitions");
    sub->add_option("--entanglement", *kn_ent, "Feature-map pair pattern")
        ->check(CLI::IsMember({"full", "linear"}));
    sub->add_option("--shots", *kn_shots, "Shots per entry (0 = exact)");
    sub->add_option("--fraction", *kn_frac, "Training share");
    sub->add_flag("--stratified,!--no-stratified", *kn_strat,
                  "Split each label group separately");
    sub->add_flag("--zscore,!--no-zscore", *kn_z, "Outlier filter");
    sub->add_option("--zscore-threshold", *kn_zt, "Outlier cut, in sigmas");
    sub->add_option("--seed", *kn_seed, "Split / sampling seed");
    sub->add_option("--threads", *kn_threads, "Worker threads");
    sub->add_option("--out", *kn_out, "Output directory");
    sub->callback([=]() {
      LabeledDataset ds = build_evc_dataset(load_subjects(*kn_src), 1e-10,
                                            10000, *kn_threads);
      if (*kn_z) ds = filter_dataset(ds, zscore_filter(ds.X, *kn_zt));
      const SplitResult split = train_test_split(ds, *kn_frac, *kn_seed, *kn_strat);
      const PcaModel model = pca_fit(split.train.X, *kn_k, ds.feature_names);
      const Eigen::MatrixXd train_feat = pca_transform(model, split.train.X);
      const Eigen::MatrixXd test_feat = pca_transform(model, split.test.X);
      auto [scaler, train_scaled] = scale_features(train_feat);
      const Eigen::MatrixXd test_scaled = apply_scaler(scaler, test_feat);

      FeatureMapSpec fmap;
      fmap.n_qubits = *kn_k;
      fmap.depth = *kn_depth;
      fmap.entanglement = *kn_ent == "linear" ? Entanglement::linear
                                              : Entanglement::full;
      KernelMatrix k_train, k_test;
      if (*kn_shots == 0) {
        k_train = quantum_kernel_exact(train_scaled, train_scaled, fmap);
        k_test = quantum_kernel_exact(test_scaled, train_scaled, fmap);
      } else {
        k_train = quantum_kernel_sampled(train_scaled, train_scaled, fmap,
                                         *kn_shots, *kn_seed);
        k_test = quantum_kernel_sampled(test_scaled, train_scaled, fmap,
                                        *kn_shots, mix_seed(*kn_seed, 17));
      }
      k_train.row_ids = k_train.col_ids = split.train.subject_ids;
      k_test.row_ids = split.test.subject_ids;
      k_test.col_ids = split.train.subject_ids;

      const fs::path dir = *kn_out;
      fs::create_directories(dir);
      write_kernel_csv(dir / "kernel_train.csv", k_train);
      write_kernel_csv(dir / "kernel_test.csv", k_test);
      std::printf("train kernel  %ld x %ld\n",
                  static_cast<long>(k_train.values.rows()),
                  static_cast<long>(k_train.values.cols()));
      std::printf("test kernel   %ld x %ld\n",
                  static_cast<long>(k_test.values.rows()),
                  static_cast<long>(k_test.values.cols()));
      std::printf("artifacts     %s\n", dir.string().c_str());
    });
  }

  // stats: which nodes discriminate the groups.
  auto st_src = std::make_shared<SourceOpts>();
  auto st_k = std::make_shared<int>(4);
  auto st_comp = std::make_shared<int>(0);
  auto st_alpha = std::make_shared<double>(0.05);
  auto st_z = std::make_shared<bool>(true);
  auto st_zt = std::make_shared<double>(3.0);
  auto st_threads = std::make_shared<int>(0);
  auto st_out = std::make_shared<std::string>(default_out_dir());
  {
    CLI::App* sub = app.add_subcommand("stats", "Rank nodes by loading and group difference");
    add_source_opts(sub, *st_src);
    sub->add_option("--components,-k", *st_k, "Components in the PCA fit");
    sub->add_option("--component", *st_comp, "Component whose loadings rank the nodes");
    sub->add_option("--alpha", *st_alpha, "Significance cut for the rank-sum test");
    sub->add_flag("--zscore,!--no-zscore", *st_z, "Outlier filter");
    sub->add_option("--zscore-threshold", *st_zt, "Outlier cut, in sigmas");
    sub->add_option("--threads", *st_threads, "Worker threads");
    sub->add_option("--out", *st_out, "Output directory");
    sub->callback([=]() {
      LabeledDataset ds = build_evc_dataset(load_subjects(*st_src), 1e-10,
                                            10000, *st_threads);
      if (*st_z) ds = filter_dataset(ds, zscore_filter(ds.X, *st_zt));
      const PcaModel model = pca_fit(ds.X, *st_k, ds.feature_names);
      if (*st_comp < 0 || *st_comp >= model.k())
        throw std::runtime_error("--component out of range");

      std::vector<int> hc_rows, psp_rows;
      for (int i = 0; i < ds.rows(); ++i)
        (ds.y[static_cast<std::size_t>(i)] == 0 ? hc_rows : psp_rows).push_back(i);
      if (hc_rows.empty() || psp_rows.empty())
        throw std::runtime_error("need both groups for the rank-sum test");
      const std::vector<RoiRank> ranked =
          rank_rois(ds.feature_names, model.components.row(*st_comp),
                    keep_rows(ds.X, hc_rows), keep_rows(ds.X, psp_rows),
                    *st_alpha);

      std::string text = "node,loading,u,p_value\n";
      for (const RoiRank& r : ranked)
        text += r.name + "," + g17(r.loading) + "," + g17(r.u) + "," +
                g17(r.p_value) + "\n";
      write_text(fs::path(*st_out) / "rois.csv", text);

      std::printf("%zu of %zu nodes below alpha %.3g\n", ranked.size(),
                  ds.feature_names.size(), *st_alpha);
      for (const RoiRank& r : ranked)
        std::printf("  %-12s loading %+.4f  p %.4g\n", r.name.c_str(),
                    r.loading, r.p_value);
      std::printf("artifacts  %s\n",
                  (fs::path(*st_out) / "rois.csv").string().c_str());
    });
  }

  // synth: write a generated cohort to disk.
  auto sy_spec = std::make_shared<SyntheticCohortSpec>();
  auto sy_out = std::make_shared<std::string>();
  {
    CLI::App* sub = app.add_subcommand("synth", "Generate a synthetic cohort");
    sub->add_option("--per-class", sy_spec->per_class, "Subjects per cohort/label cell");
    sub->add_option("--nodes", sy_spec->n_nodes, "Node count");
    sub->add_option("--effect", sy_spec->effect, "Connectivity shift for the affected nodes");
    sub->add_option("--seed", sy_spec->seed, "Generator seed");
    sub->add_option("--out", *sy_out, "Cohort directory");
    sub->callback([=]() {
      fs::path dir = sy_out->empty() ? fs::path(default_out_dir()) / "synth-cohort"
                                     : fs::path(*sy_out);
      const fs::path manifest = write_cohort(dir, synth_cohort(*sy_spec));
      std::printf("%s\n", manifest.string().c_str());
    });
  }

  // distribution: ideal vs noisy vs mitigated counts.
  auto di_spec = std::make_shared<DistributionStudySpec>();
  auto di_noise = std::make_shared<std::vector<double>>(std::vector<double>{0, 0, 0, 0});
  auto di_out = std::make_shared<std::string>(default_out_dir());
  {
    CLI::App* sub = app.add_subcommand("distribution",
                                       "Shot distributions under noise and mitigation");
    sub->add_option("--circuit", di_spec->circuit, "feature_map or ghz")
        ->check(CLI::IsMember({"feature_map", "ghz"}));
    sub->add_option("--qubits", di_spec->n_qubits, "Circuit width");
    sub->add_option("--depth", di_spec->depth, "Feature-map repetitions");
    sub->add_option("--x", di_spec->x, "Feature values (default pi/4 each)");
    sub->add_option("--shots", di_spec->shots, "Samples per run");
    sub->add_option("--resilience", di_spec->resilience,
                    "0 raw counts, 1 readout mitigation")
        ->check(CLI::Range(0, 1));
    sub->add_option("--depol1", (*di_noise)[0], "1-qubit depolarizing probability");
    sub->add_option("--depol2", (*di_noise)[1], "2-qubit depolarizing probability");
    sub->add_option("--p10", (*di_noise)[2], "Readout flip 1->0 probability");
    sub->add_option("--p01", (*di_noise)[3], "Readout flip 0->1 probability");
    sub->add_option("--seed", di_spec->seed, "Sampler seed");
    sub->add_option("--out", *di_out, "Output directory");
    sub->callback([=]() {
      di_spec->noise = NoiseModel::uniform((*di_noise)[0], (*di_noise)[1],
                                           (*di_noise)[2], (*di_noise)[3]);
      const std::string json = emit_distribution_study(*di_spec);
      const fs::path path = fs::path(*di_out) / "counts.json";
      write_text(path, json);
      std::printf("wrote %s\n", path.string().c_str());
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "qbnc: %s\n", e.what());
    return 1;
  }
  return 0;
}
