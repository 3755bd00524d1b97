#pragma once

#include <cstdint>
#include <vector>

#include "qbnc/netdata.hpp"

namespace qbnc {

// Synthetic correlation-network cohort from a latent-factor model: per
// subject, node loadings over max(2, n/2) noise factors are drawn from a
// unit normal, L L^T + 0.25 I is normalized to unit diagonal, and the
// class signal is one extra factor whose loading on a fixed node subset
// is effect * sqrt(#factors) in the shifted class (raising that block's
// correlations to about effect^2 / (1 + effect^2)). With effect = 0 the
// classes are drawn from the same distribution (exchangeable by design:
// labels never enter the generator).
struct SyntheticCohortSpec {
  int per_class = 12;    // subjects per cohort-class cell (>= 2)
  int n_nodes = 16;      // network size (>= 2)
  double effect = 0.0;   // class separation, >= 0
  std::uint64_t seed = 0;
};

// The shifted node subset: the first max(2, n/2) nodes.
std::vector<int> synth_affected_nodes(int n_nodes);

// Generates both cohorts (male, female) x both classes (HC, PSP), ids like
// "f_psp_03". Entries lie in [-1, 1] with a unit diagonal, matrices are
// exactly symmetric, and the same spec reproduces bit-identical values.
std::vector<SubjectRecord> synth_cohort(const SyntheticCohortSpec& spec);

}  // namespace qbnc
