#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace qbnc {

// Undirected weighted brain network for one subject. Weights may be signed
// (correlation-based edges); centrality works on |weights| with the diagonal
// zeroed. Node order is shared across a cohort.
struct ConnectivityMatrix {
  Eigen::MatrixXd weights;              // n x n, symmetric, finite
  std::vector<std::string> node_names;  // size n
  std::optional<Eigen::MatrixXd> mni_coords;  // n x 3 stereotactic positions

  int n() const { return static_cast<int>(weights.rows()); }
};

enum class Cohort { male, female };
enum class Label { HC, PSP };

std::string to_string(Cohort c);
std::string to_string(Label l);
Cohort cohort_from_string(const std::string& s);
Label label_from_string(const std::string& s);

struct SubjectRecord {
  std::string id;
  Cohort cohort = Cohort::female;
  Label label = Label::HC;
  ConnectivityMatrix matrix;
};

// Feature matrix with binary labels; one row per subject.
struct LabeledDataset {
  Eigen::MatrixXd X;                       // m x d
  std::vector<int> y;                      // size m, 0 = HC, 1 = PSP
  std::vector<std::string> feature_names;  // size d
  std::vector<std::string> subject_ids;    // size m

  int rows() const { return static_cast<int>(X.rows()); }
  int cols() const { return static_cast<int>(X.cols()); }
};

// Parses an n x n matrix from plain text (whitespace or comma delimited,
// one row per line; blank lines and lines starting with '#' are skipped).
// Asymmetry up to 1e-6 is repaired by (A + A^T)/2; larger asymmetry, ragged
// rows, non-numeric fields, non-finite values, or n < 2 are errors.
ConnectivityMatrix load_matrix(const std::string& text,
                               std::vector<std::string> node_names = {});
ConnectivityMatrix load_matrix_file(const std::filesystem::path& path,
                                    std::vector<std::string> node_names = {});

// Dominant-eigenvector node scores of |weights| with the diagonal zeroed.
// Power iteration from the uniform vector, iterating on B + sigma*I
// (sigma = max row sum) so bipartite-like spectra still converge; the
// residual test ||Bx - lambda x||_2 <= tol applies to the unshifted matrix.
// Returns the unit-2-norm nonnegative eigenvector. Throws if the matrix is
// all zero or the iteration fails to reach tol within max_iter steps.
Eigen::VectorXd eigenvector_centrality(const ConnectivityMatrix& m,
                                       double tol = 1e-10, int max_iter = 10000);

// One centrality row per subject; y from labels (HC=0, PSP=1); feature
// names from node names. All subjects must share the node count.
LabeledDataset build_evc_dataset(const std::vector<SubjectRecord>& subjects,
                                 double tol = 1e-10, int max_iter = 10000,
                                 int threads = 0);

// Cohort manifest: CSV with header subject_id,cohort,label,matrix_path.
// matrix_path is resolved relative to the manifest's directory. Optional
// node_names apply to every loaded matrix.
std::vector<SubjectRecord> load_manifest(const std::filesystem::path& csv_path,
                                         std::vector<std::string> node_names = {});

// Writes dir/manifest.csv plus matrices/<id>.txt for every subject and
// returns the manifest path. Matrix entries use %.17g so a reload is
// bit-exact.
std::filesystem::path write_cohort(const std::filesystem::path& dir,
                                   const std::vector<SubjectRecord>& subjects);

// One name per line; '#' comments and blank lines skipped.
std::vector<std::string> load_node_names(const std::filesystem::path& path);

}  // namespace qbnc
