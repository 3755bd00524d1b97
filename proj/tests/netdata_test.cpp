#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "qbnc/netdata.hpp"
#include "qbnc/rng.hpp"
#include "qbnc/synth.hpp"
#include "support/oracles.hpp"

using namespace qbnc;
namespace fs = std::filesystem;

namespace {

ConnectivityMatrix from_dense(const Eigen::MatrixXd& w) {
  ConnectivityMatrix m;
  m.weights = w;
  for (int i = 0; i < w.rows(); ++i)
    m.node_names.push_back("n" + std::to_string(i));
  return m;
}

Eigen::MatrixXd random_symmetric(int n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd w(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double v = rng.uniform(-1.0, 1.0);
      w(i, j) = v;
      w(j, i) = v;
    }
  return w;
}

// Oracle centrality: dominant eigenvector of |W| with zeroed diagonal via
// the dense symmetric eigensolver, sign-fixed to nonnegative orientation.
Eigen::VectorXd oracle_centrality(const Eigen::MatrixXd& w) {
  Eigen::MatrixXd b = w.cwiseAbs();
  b.diagonal().setZero();
  const oracle::EigenSym es = oracle::eigen_sym_desc(b);
  Eigen::VectorXd v = es.vectors.col(0);
  if (v.sum() < 0.0) v = -v;
  return v;
}

fs::path temp_dir(const char* tag) {
  const fs::path dir = fs::temp_directory_path() / (std::string("qbnc_test_") + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("matrix text parsing handles the documented shapes") {
  SUBCASE("2x2 with a half weight") {
    const ConnectivityMatrix m = load_matrix("0 0.5\n0.5 0\n");
    CHECK(m.n() == 2);
    CHECK(m.weights(0, 1) == 0.5);
    CHECK(m.weights(1, 0) == 0.5);
    CHECK(m.weights(0, 0) == 0.0);
  }
  SUBCASE("3x3 identity parses") {
    const ConnectivityMatrix m = load_matrix("1 0 0\n0 1 0\n0 0 1\n");
    CHECK(m.n() == 3);
    CHECK(m.weights.isApprox(Eigen::MatrixXd::Identity(3, 3)));
  }
  SUBCASE("comma delimiters, comments, blank lines") {
    const ConnectivityMatrix m = load_matrix("# header\n\n0, 1\n1, 0\n");
    CHECK(m.n() == 2);
    CHECK(m.weights(0, 1) == 1.0);
  }
  SUBCASE("one short row among 27 is an error") {
    std::string text;
    for (int r = 0; r < 27; ++r) {
      const int cols = r == 13 ? 26 : 27;
      for (int c = 0; c < cols; ++c) text += c ? " 0" : "0";
      text += "\n";
    }
    CHECK_THROWS(load_matrix(text));
  }
  SUBCASE("rejects junk") {
    CHECK_THROWS(load_matrix("0 a\n1 0\n"));         // non-numeric
    CHECK_THROWS(load_matrix("0 nan\nnan 0\n"));     // non-finite
    CHECK_THROWS(load_matrix("5\n"));                // n < 2
    CHECK_THROWS(load_matrix("0 1\n0.5 0\n"));       // asymmetric
  }
  SUBCASE("tiny asymmetry is averaged away") {
    const ConnectivityMatrix m = load_matrix("0 0.5000000001\n0.5 0\n");
    CHECK(m.weights(0, 1) == m.weights(1, 0));
  }
}

TEST_CASE("eigenvector centrality matches closed forms") {
  SUBCASE("triangle graph: uniform 1/sqrt(3)") {
    Eigen::MatrixXd w = Eigen::MatrixXd::Ones(3, 3);
    w.diagonal().setZero();
    const Eigen::VectorXd c = eigenvector_centrality(from_dense(w));
    for (int i = 0; i < 3; ++i)
      CHECK(c[i] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-10));
  }
  SUBCASE("star graph: hub dominates equal leaves") {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4, 4);
    for (int leaf = 1; leaf < 4; ++leaf) {
      w(0, leaf) = 1.0;
      w(leaf, 0) = 1.0;
    }
    const Eigen::VectorXd c = eigenvector_centrality(from_dense(w));
    CHECK(c[0] > c[1]);
    CHECK(c[1] == doctest::Approx(c[2]).epsilon(1e-12));
    CHECK(c[2] == doctest::Approx(c[3]).epsilon(1e-12));
    // Analytic: hub 1/sqrt(2), leaves 1/sqrt(6).
    CHECK(c[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
    CHECK(c[1] == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-9));
  }
  SUBCASE("random matrices match the dense eigensolver") {
    for (std::uint64_t seed : {11u, 22u, 33u, 44u}) {
      const Eigen::MatrixXd w = random_symmetric(5, seed);
      const Eigen::VectorXd got = eigenvector_centrality(from_dense(w));
      const Eigen::VectorXd want = oracle_centrality(w);
      CHECK((got - want).norm() <= 1e-8);
    }
  }
  SUBCASE("all-zero matrix is rejected") {
    CHECK_THROWS(eigenvector_centrality(from_dense(Eigen::MatrixXd::Zero(3, 3))));
  }
}

TEST_CASE("centrality invariances") {
  const Eigen::MatrixXd w = random_symmetric(6, 99);
  const Eigen::VectorXd base = eigenvector_centrality(from_dense(w));

  SUBCASE("positive scaling leaves the vector unchanged") {
    const Eigen::VectorXd scaled = eigenvector_centrality(from_dense(3.7 * w));
    CHECK((scaled - base).norm() <= 1e-8);
  }
  SUBCASE("node permutation permutes the vector") {
    const std::vector<int> perm = {2, 0, 5, 1, 4, 3};
    Eigen::MatrixXd pw(6, 6);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) pw(i, j) = w(perm[i], perm[j]);
    const Eigen::VectorXd pv = eigenvector_centrality(from_dense(pw));
    for (int i = 0; i < 6; ++i)
      CHECK(pv[i] == doctest::Approx(base[perm[i]]).epsilon(1e-8));
  }
}

TEST_CASE("cohort datasets assemble one centrality row per subject") {
  SUBCASE("28 subjects with 27 nodes give a 28x27 matrix") {
    SyntheticCohortSpec spec;
    spec.per_class = 7;
    spec.n_nodes = 27;
    spec.seed = 5;
    const std::vector<SubjectRecord> subjects = synth_cohort(spec);
    REQUIRE(subjects.size() == 28);
    const LabeledDataset ds = build_evc_dataset(subjects);
    CHECK(ds.rows() == 28);
    CHECK(ds.cols() == 27);
    CHECK(ds.feature_names.size() == 27);
    CHECK(ds.subject_ids.size() == 28);
    // Each row is the subject's centrality vector.
    const Eigen::VectorXd first = eigenvector_centrality(subjects[0].matrix);
    CHECK((ds.X.row(0).transpose() - first).norm() <= 1e-12);
  }
  SUBCASE("single subject works") {
    SubjectRecord rec;
    rec.id = "only";
    rec.matrix = from_dense(random_symmetric(4, 3));
    const LabeledDataset ds = build_evc_dataset({rec});
    CHECK(ds.rows() == 1);
    CHECK(ds.cols() == 4);
  }
  SUBCASE("mixed node counts are rejected") {
    SubjectRecord a, b;
    a.id = "a";
    a.matrix = from_dense(random_symmetric(4, 1));
    b.id = "b";
    b.matrix = from_dense(random_symmetric(5, 2));
    CHECK_THROWS(build_evc_dataset({a, b}));
  }
  SUBCASE("threaded and serial assembly agree bit for bit") {
    SyntheticCohortSpec spec;
    spec.per_class = 3;
    spec.n_nodes = 9;
    spec.seed = 17;
    const auto subjects = synth_cohort(spec);
    const LabeledDataset serial = build_evc_dataset(subjects, 1e-10, 10000, 1);
    const LabeledDataset threaded = build_evc_dataset(subjects, 1e-10, 10000, 4);
    CHECK(serial.X == threaded.X);
  }
}

TEST_CASE("manifest round trip is bit exact") {
  const fs::path dir = temp_dir("manifest");
  SyntheticCohortSpec spec;
  spec.per_class = 2;
  spec.n_nodes = 5;
  spec.effect = 0.8;
  spec.seed = 21;
  const std::vector<SubjectRecord> subjects = synth_cohort(spec);
  const fs::path manifest = write_cohort(dir, subjects);
  const std::vector<SubjectRecord> loaded = load_manifest(manifest);
  REQUIRE(loaded.size() == subjects.size());
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    CHECK(loaded[i].id == subjects[i].id);
    CHECK(loaded[i].cohort == subjects[i].cohort);
    CHECK(loaded[i].label == subjects[i].label);
    CHECK(loaded[i].matrix.weights == subjects[i].matrix.weights);
  }
  fs::remove_all(dir);
}

TEST_CASE("node name files and label strings") {
  const fs::path dir = temp_dir("names");
  {
    std::ofstream out(dir / "names.txt");
    out << "# comment\nalpha\n\nbeta\n";
  }
  const std::vector<std::string> names = load_node_names(dir / "names.txt");
  REQUIRE(names.size() == 2);
  CHECK(names[0] == "alpha");
  CHECK(names[1] == "beta");
  fs::remove_all(dir);

  CHECK(label_from_string("HC") == Label::HC);
  CHECK(label_from_string("PSP") == Label::PSP);
  CHECK(cohort_from_string("male") == Cohort::male);
  CHECK(cohort_from_string("female") == Cohort::female);
  CHECK(to_string(Label::PSP) == "PSP");
  CHECK(to_string(Cohort::female) == "female");
  CHECK_THROWS(label_from_string("psp-ish"));
  CHECK_THROWS(cohort_from_string("other"));
}
