#include "qbnc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "qbnc/rng.hpp"

namespace qbnc {

namespace {

constexpr double kNoiseVar = 0.25;  // diagonal regularizer delta^2

std::vector<std::string> default_node_names(int n) {
  std::vector<std::string> names;
  names.reserve(n);
  char buf[32];
  for (int i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof buf, "node_%02d", i);
    names.emplace_back(buf);
  }
  return names;
}

Eigen::MatrixXd subject_matrix(int n, double effect, const std::vector<int>& affected,
                               Rng& rng) {
  // q noise factors plus one signal factor. The signal loading effect*sqrt(q)
  // puts the affected-pair correlation near effect^2 / (1 + effect^2)
  // regardless of q, while unrelated pairs stay 0 +- 1/sqrt(q).
  const int q = std::max(2, n / 2);
  Eigen::MatrixXd load = Eigen::MatrixXd::Zero(n, q + 1);
  for (int i = 0; i < n; ++i)
    for (int f = 0; f < q; ++f) load(i, f) = rng.normal();
  for (const int i : affected) load(i, q) = effect * std::sqrt(double(q));

  Eigen::MatrixXd c = load * load.transpose();
  c.diagonal().array() += kNoiseVar;

  // Normalize to a correlation matrix; Cauchy-Schwarz keeps entries in
  // [-1, 1] up to rounding, which the clamp absorbs.
  Eigen::VectorXd d = c.diagonal().array().sqrt();
  Eigen::MatrixXd out(n, n);
  for (int i = 0; i < n; ++i) {
    out(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      const double v = std::clamp(c(i, j) / (d[i] * d[j]), -1.0, 1.0);
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

}  // namespace

std::vector<int> synth_affected_nodes(int n_nodes) {
  const int count = std::max(2, n_nodes / 2);
  std::vector<int> nodes(count);
  for (int i = 0; i < count; ++i) nodes[i] = i;
  return nodes;
}

std::vector<SubjectRecord> synth_cohort(const SyntheticCohortSpec& spec) {
  if (spec.per_class < 2)
    throw std::invalid_argument("synth_cohort: need >= 2 subjects per class");
  if (spec.n_nodes < 2)
    throw std::invalid_argument("synth_cohort: need >= 2 nodes");
  if (!(spec.effect >= 0.0))
    throw std::invalid_argument("synth_cohort: effect must be >= 0");

  const std::vector<int> affected = synth_affected_nodes(spec.n_nodes);
  const std::vector<std::string> names = default_node_names(spec.n_nodes);

  std::vector<SubjectRecord> subjects;
  subjects.reserve(4 * spec.per_class);
  char id[48];
  for (const Cohort cohort : {Cohort::male, Cohort::female}) {
    for (const Label label : {Label::HC, Label::PSP}) {
      const std::uint64_t cell =
          (cohort == Cohort::male ? 0u : 2u) + (label == Label::HC ? 0u : 1u);
      const double shift = (label == Label::PSP) ? spec.effect : 0.0;
      for (int s = 0; s < spec.per_class; ++s) {
        Rng rng(mix_seed(spec.seed, cell, static_cast<std::uint64_t>(s)));
        SubjectRecord rec;
        std::snprintf(id, sizeof id, "%c_%s_%02d",
                      cohort == Cohort::male ? 'm' : 'f',
                      label == Label::HC ? "hc" : "psp", s);
        rec.id = id;
        rec.cohort = cohort;
        rec.label = label;
        rec.matrix.weights = subject_matrix(spec.n_nodes, shift, affected, rng);
        rec.matrix.node_names = names;
        subjects.push_back(std::move(rec));
      }
    }
  }
  return subjects;
}

}  // namespace qbnc
