#include <doctest.h>

#include <cmath>
#include <vector>

#include "qbnc/pca.hpp"
#include "qbnc/rng.hpp"
#include "support/oracles.hpp"

using namespace qbnc;

namespace {

Eigen::MatrixXd gaussian_rows(int m, int d, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd x(m, d);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = rng.normal();
  return x;
}

// Oracle: covariance eigendecomposition via the dense solver, with the
// same sign rule (largest-magnitude entry positive).
oracle::EigenSym oracle_pca(const Eigen::MatrixXd& x) {
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(x.rows() - 1);
  oracle::EigenSym es = oracle::eigen_sym_desc(cov);
  for (Eigen::Index j = 0; j < es.vectors.cols(); ++j) {
    Eigen::Index imax = 0;
    es.vectors.col(j).cwiseAbs().maxCoeff(&imax);
    if (es.vectors(imax, j) < 0.0) es.vectors.col(j) = -es.vectors.col(j);
  }
  return es;
}

}  // namespace

TEST_CASE("a perfect line puts all variance on one direction") {
  Eigen::MatrixXd x(5, 2);
  for (int i = 0; i < 5; ++i) {
    x(i, 0) = i;
    x(i, 1) = 2.0 * i;
  }
  const PcaModel model = pca_fit(x, 1);
  CHECK(model.explained_ratio[0] == doctest::Approx(1.0).epsilon(1e-12));
  const double s = std::sqrt(5.0);
  CHECK(model.components(0, 0) == doctest::Approx(1.0 / s).epsilon(1e-10));
  CHECK(model.components(0, 1) == doctest::Approx(2.0 / s).epsilon(1e-10));
}

TEST_CASE("isotropic cloud spreads variance evenly") {
  const Eigen::MatrixXd x = gaussian_rows(4000, 3, 7);
  const PcaModel model = pca_fit(x, 3);
  CHECK(model.eigenvalues[0] / model.eigenvalues[2] < 1.15);
}

TEST_CASE("eigenpairs match the dense oracle") {
  const Eigen::MatrixXd x = gaussian_rows(10, 6, 31);
  const PcaModel model = pca_fit(x, 6);
  const oracle::EigenSym want = oracle_pca(x);
  for (int j = 0; j < 6; ++j) {
    CHECK(std::abs(model.eigenvalues[j] - want.values[j]) <= 1e-8);
    CHECK((model.components.row(j).transpose() - want.vectors.col(j)).norm() <=
          1e-8);
  }
}

TEST_CASE("transform geometry") {
  const Eigen::MatrixXd x = gaussian_rows(12, 5, 77);
  const PcaModel model = pca_fit(x, 5);

  SUBCASE("the mean maps to the origin") {
    Eigen::MatrixXd mean(1, 5);
    mean.row(0) = x.colwise().mean();
    const Eigen::MatrixXd z = pca_transform(model, mean);
    CHECK(z.row(0).norm() <= 1e-10);
  }
  SUBCASE("full-rank round trip recovers the data") {
    const Eigen::MatrixXd z = pca_transform(model, x);
    const Eigen::MatrixXd back =
        (z * model.components).rowwise() + model.mean.transpose();
    CHECK((back - x).norm() <= 1e-8);
  }
  SUBCASE("score variance equals the eigenvalue") {
    const Eigen::MatrixXd z = pca_transform(model, x);
    for (int j = 0; j < 5; ++j) {
      const double mu = z.col(j).mean();
      const double var =
          (z.col(j).array() - mu).square().sum() / (z.rows() - 1.0);
      CHECK(var == doctest::Approx(model.eigenvalues[j]).epsilon(1e-6));
    }
  }
  SUBCASE("components are orthonormal") {
    const Eigen::MatrixXd gram = model.components * model.components.transpose();
    CHECK((gram - Eigen::MatrixXd::Identity(5, 5)).norm() <= 1e-10);
  }
}

TEST_CASE("rank-1 data gives ratios (1, 0, ...)") {
  Rng rng(13);
  Eigen::VectorXd dir(4);
  for (int j = 0; j < 4; ++j) dir[j] = rng.normal();
  Eigen::MatrixXd x(8, 4);
  for (int i = 0; i < 8; ++i) x.row(i) = rng.normal() * dir.transpose();
  const PcaModel model = pca_fit(x, 4);
  CHECK(model.explained_ratio[0] == doctest::Approx(1.0).epsilon(1e-10));
  for (int j = 1; j < 4; ++j) CHECK(std::abs(model.explained_ratio[j]) <= 1e-10);
}

TEST_CASE("variance report accumulates the ratios") {
  const Eigen::MatrixXd x = gaussian_rows(20, 6, 5);
  const PcaModel model = pca_fit(x, 4);
  const VarianceReport rep = explained_variance_report(model);
  REQUIRE(rep.ratio.size() == 4);
  double run = 0.0;
  for (std::size_t i = 0; i < rep.ratio.size(); ++i) {
    run += rep.ratio[i];
    CHECK(rep.cumulative[i] == doctest::Approx(run).epsilon(1e-12));
  }
  CHECK(rep.cumulative.back() <= 1.0 + 1e-12);
}

TEST_CASE("loadings and the factorial plane expose the same weights") {
  const Eigen::MatrixXd x = gaussian_rows(15, 5, 123);
  const PcaModel model =
      pca_fit(x, 3, {"f0", "f1", "f2", "f3", "f4"});

  const auto ranked = loadings(model, 0);
  REQUIRE(ranked.size() == 5);
  for (std::size_t i = 1; i < ranked.size(); ++i)
    CHECK(std::abs(ranked[i - 1].second) >= std::abs(ranked[i].second));
  // Every loading is a component entry; the row has unit norm.
  CHECK(model.components.row(0).norm() == doctest::Approx(1.0).epsilon(1e-12));

  const auto plane = factorial_plane(model, 0, 1);
  REQUIRE(plane.size() == 5);
  for (int f = 0; f < 5; ++f) {
    CHECK(plane[f].feature == model.feature_names[f]);
    CHECK(plane[f].x == model.components(0, f));
    CHECK(plane[f].y == model.components(1, f));
  }
}

TEST_CASE("fit validates its inputs") {
  const Eigen::MatrixXd x = gaussian_rows(6, 3, 9);
  CHECK_THROWS(pca_fit(x, 0));
  CHECK_THROWS(pca_fit(x, 4));                       // k > d
  CHECK_THROWS(pca_fit(gaussian_rows(1, 3, 9), 1));    // m < 2
  CHECK_THROWS(pca_fit(gaussian_rows(3, 5, 9), 3));    // k > m - 1
  Eigen::MatrixXd bad = x;
  bad(0, 0) = std::nan("");
  CHECK_THROWS(pca_fit(bad, 2));
  CHECK_THROWS(pca_transform(pca_fit(x, 2), gaussian_rows(2, 4, 1)));
}
