#include "qbnc/vqc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "qbnc/rng.hpp"

namespace qbnc {

namespace {

constexpr double kProbClamp = 1e-9;

// Seed-stream tags: one derived stream per purpose so row indices can never
// collide with other uses of the model seed.
constexpr std::uint64_t kStreamLoss = 0;
constexpr std::uint64_t kStreamInit = 1;
constexpr std::uint64_t kStreamScore = 2;

bool odd_parity(const std::string& bits) {
  return std::count(bits.begin(), bits.end(), '1') % 2 == 1;
}

Circuit row_circuit(const FeatureMapSpec& fmap, const AnsatzSpec& ansatz,
                    const Eigen::MatrixXd& scaled_x, Eigen::Index row) {
  std::vector<double> x(scaled_x.cols());
  for (Eigen::Index j = 0; j < scaled_x.cols(); ++j) x[j] = scaled_x(row, j);
  return concat(zz_feature_map(fmap, x), real_amplitudes_ansatz(ansatz));
}

double row_probability(const Circuit& circuit, std::span<const double> theta,
                       std::uint64_t shots, std::uint64_t row_seed) {
  if (shots == 0)
    return exact_parity_probability(run_exact(circuit, theta));
  return parity_probability(sample(circuit, theta, shots, row_seed));
}

void check_config(const VqcConfig& config, Eigen::Index n_features) {
  if (config.feature_map.n_qubits != config.ansatz.n_qubits)
    throw std::invalid_argument("vqc: feature map and ansatz qubit counts differ");
  if (n_features != config.feature_map.n_qubits)
    throw std::invalid_argument("vqc: feature count must equal the qubit count");
}

std::string entanglement_name(Entanglement e) {
  return e == Entanglement::full ? "full" : "linear";
}
Entanglement entanglement_from(const std::string& s) {
  if (s == "full") return Entanglement::full;
  if (s == "linear") return Entanglement::linear;
  throw std::runtime_error("vqc model: unknown entanglement '" + s + "'");
}
std::string entangler_name(Entangler e) {
  return e == Entangler::cnot_chain ? "cnot" : "cz";
}
Entangler entangler_from(const std::string& s) {
  if (s == "cnot") return Entangler::cnot_chain;
  if (s == "cz") return Entangler::cz_chain;
  throw std::runtime_error("vqc model: unknown entangler '" + s + "'");
}

}  // namespace

double parity_probability(const CountsTable& counts) {
  if (counts.shots == 0)
    throw std::invalid_argument("parity_probability: zero shots");
  std::uint64_t odd = 0;
  for (const auto& [bits, n] : counts.counts)
    if (odd_parity(bits)) odd += n;
  return static_cast<double>(odd) / static_cast<double>(counts.shots);
}

double exact_parity_probability(const Statevector& s) {
  double p = 0.0;
  for (std::size_t idx = 0; idx < s.amps.size(); ++idx)
    if (std::popcount(idx) % 2 == 1) p += std::norm(s.amps[idx]);
  return std::min(p, 1.0);
}

double vqc_loss(std::span<const double> theta, const Eigen::MatrixXd& scaled_x,
                const std::vector<int>& y, const VqcConfig& config) {
  check_config(config, scaled_x.cols());
  const Eigen::Index m = scaled_x.rows();
  if (m < 1) throw std::invalid_argument("vqc_loss: empty dataset");
  if (static_cast<Eigen::Index>(y.size()) != m)
    throw std::invalid_argument("vqc_loss: label count mismatch");
  if (static_cast<int>(theta.size()) != config.ansatz.parameter_count())
    throw std::invalid_argument("vqc_loss: theta length mismatch");

  double loss = 0.0;
  for (Eigen::Index r = 0; r < m; ++r) {
    const Circuit c = row_circuit(config.feature_map, config.ansatz, scaled_x, r);
    double p = row_probability(
        c, theta, config.shots,
        mix_seed(config.seed, kStreamLoss, static_cast<std::uint64_t>(r)));
    p = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
    loss -= (y[r] == 1) ? std::log(p) : std::log(1.0 - p);
  }
  return loss / static_cast<double>(m);
}

VqcModel vqc_train(const LabeledDataset& train, const VqcConfig& config) {
  check_config(config, train.X.cols());
  if (train.rows() < 2)
    throw std::invalid_argument("vqc_train: need at least two rows");
  bool has0 = false, has1 = false;
  for (const int yi : train.y) {
    if (yi == 0)
      has0 = true;
    else if (yi == 1)
      has1 = true;
    else
      throw std::invalid_argument("vqc_train: labels must be 0 or 1");
  }
  if (!has0 || !has1)
    throw std::invalid_argument("vqc_train: both classes required");

  auto [scaler, scaled] =
      scale_features(train.X, config.scale_lo, config.scale_hi);

  Rng init_rng(mix_seed(config.seed, kStreamInit, 0));
  std::vector<double> theta0(config.ansatz.parameter_count());
  for (double& t : theta0) t = init_rng.uniform(-kPi, kPi);

  const Eigen::MatrixXd scaled_x = scaled;  // captured by the objective
  const std::vector<int> y = train.y;
  const Objective objective = [&scaled_x, &y, &config](std::span<const double> th) {
    return vqc_loss(th, scaled_x, y, config);
  };
  const OptimizationResult opt =
      cobyla_minimize(objective, theta0, {}, config.optimizer);

  VqcModel model;
  model.feature_map = config.feature_map;
  model.ansatz = config.ansatz;
  model.theta = opt.x_best;
  model.scaler = scaler;
  model.shots = config.shots;
  model.seed = config.seed;
  model.training_curve = opt.history;
  return model;
}

Eigen::VectorXd vqc_scores(const VqcModel& model, const Eigen::MatrixXd& x) {
  if (x.cols() != model.feature_map.n_qubits)
    throw std::invalid_argument("vqc_scores: column count mismatch");
  if (static_cast<int>(model.theta.size()) != model.ansatz.parameter_count())
    throw std::invalid_argument("vqc_scores: model theta length mismatch");
  const Eigen::MatrixXd scaled = apply_scaler(model.scaler, x);
  Eigen::VectorXd scores(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const Circuit c = row_circuit(model.feature_map, model.ansatz, scaled, r);
    scores[r] = row_probability(
        c, model.theta, model.shots,
        mix_seed(model.seed, kStreamScore, static_cast<std::uint64_t>(r)));
  }
  return scores;
}

std::vector<int> vqc_predict(const VqcModel& model, const Eigen::MatrixXd& x) {
  const Eigen::VectorXd scores = vqc_scores(model, x);
  std::vector<int> labels(scores.size());
  for (Eigen::Index i = 0; i < scores.size(); ++i)
    labels[i] = scores[i] >= 0.5 ? 1 : 0;
  return labels;
}

void save_vqc(const std::filesystem::path& path, const VqcModel& model) {
  nlohmann::json j;
  j["feature_map"] = {{"n_qubits", model.feature_map.n_qubits},
                      {"depth", model.feature_map.depth},
                      {"entanglement",
                       entanglement_name(model.feature_map.entanglement)}};
  j["ansatz"] = {{"n_qubits", model.ansatz.n_qubits},
                 {"layers", model.ansatz.layers},
                 {"entangler", entangler_name(model.ansatz.entangler)}};
  j["theta"] = model.theta;
  j["scaler"] = {
      {"min", std::vector<double>(model.scaler.min.begin(), model.scaler.min.end())},
      {"max", std::vector<double>(model.scaler.max.begin(), model.scaler.max.end())},
      {"lo", model.scaler.lo},
      {"hi", model.scaler.hi}};
  j["shots"] = model.shots;
  j["seed"] = model.seed;
  nlohmann::json curve = nlohmann::json::array();
  for (const EvalRecord& r : model.training_curve)
    curve.push_back({{"eval", r.index}, {"loss", r.f}});
  j["training_curve"] = curve;

  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("save_vqc: cannot open " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("save_vqc: write failed");
}

VqcModel load_vqc(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_vqc: cannot open " + path.string());
  nlohmann::json j;
  in >> j;

  VqcModel m;
  const auto& fm = j.at("feature_map");
  m.feature_map.n_qubits = fm.at("n_qubits").get<int>();
  m.feature_map.depth = fm.at("depth").get<int>();
  m.feature_map.entanglement =
      entanglement_from(fm.at("entanglement").get<std::string>());
  const auto& an = j.at("ansatz");
  m.ansatz.n_qubits = an.at("n_qubits").get<int>();
  m.ansatz.layers = an.at("layers").get<int>();
  m.ansatz.entangler = entangler_from(an.at("entangler").get<std::string>());
  m.theta = j.at("theta").get<std::vector<double>>();
  const auto& sc = j.at("scaler");
  const auto mins = sc.at("min").get<std::vector<double>>();
  const auto maxs = sc.at("max").get<std::vector<double>>();
  if (mins.size() != maxs.size())
    throw std::runtime_error("load_vqc: scaler min/max size mismatch");
  m.scaler.min = Eigen::Map<const Eigen::VectorXd>(mins.data(), mins.size());
  m.scaler.max = Eigen::Map<const Eigen::VectorXd>(maxs.data(), maxs.size());
  m.scaler.lo = sc.at("lo").get<double>();
  m.scaler.hi = sc.at("hi").get<double>();
  m.shots = j.at("shots").get<std::uint64_t>();
  m.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& rec : j.at("training_curve")) {
    EvalRecord r;
    r.index = rec.at("eval").get<int>();
    r.f = rec.at("loss").get<double>();
    m.training_curve.push_back(r);
  }
  return m;
}

}  // namespace qbnc
