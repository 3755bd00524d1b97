#include "qbnc/netdata.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace qbnc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_double(const std::string& tok, const char* what) {
  double v = 0.0;
  const char* b = tok.data();
  const char* e = tok.data() + tok.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e)
    throw std::invalid_argument(std::string(what) + ": non-numeric field '" + tok + "'");
  return v;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> default_node_names(int n) {
  std::vector<std::string> names(n);
  for (int i = 0; i < n; ++i) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "node_%02d", i);
    names[i] = buf;
  }
  return names;
}

}  // namespace

std::string to_string(Cohort c) { return c == Cohort::male ? "male" : "female"; }
std::string to_string(Label l) { return l == Label::HC ? "HC" : "PSP"; }

Cohort cohort_from_string(const std::string& s) {
  const std::string t = trim(s);
  if (t == "male") return Cohort::male;
  if (t == "female") return Cohort::female;
  throw std::invalid_argument("unknown cohort '" + s + "' (expected male|female)");
}

Label label_from_string(const std::string& s) {
  const std::string t = trim(s);
  if (t == "HC") return Label::HC;
  if (t == "PSP") return Label::PSP;
  throw std::invalid_argument("unknown label '" + s + "' (expected HC|PSP)");
}

ConnectivityMatrix load_matrix(const std::string& text,
                               std::vector<std::string> node_names) {
  std::vector<std::vector<double>> rows;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::replace(t.begin(), t.end(), ',', ' ');
    std::istringstream fields(t);
    std::vector<double> row;
    std::string tok;
    while (fields >> tok) row.push_back(parse_double(tok, "load_matrix"));
    rows.push_back(std::move(row));
  }

  const auto n = rows.size();
  if (n < 2) throw std::invalid_argument("load_matrix: need at least a 2x2 matrix");
  for (const auto& r : rows)
    if (r.size() != n)
      throw std::invalid_argument("load_matrix: ragged rows (expected square matrix)");

  Eigen::MatrixXd w(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(rows[i][j]))
        throw std::invalid_argument("load_matrix: non-finite entry");
      w(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    }

  const double asym = (w - w.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-6)
    throw std::invalid_argument("load_matrix: asymmetry " + std::to_string(asym) +
                                " exceeds 1e-6");
  w = 0.5 * (w + w.transpose()).eval();

  ConnectivityMatrix m;
  m.weights = std::move(w);
  if (node_names.empty()) node_names = default_node_names(static_cast<int>(n));
  if (node_names.size() != n)
    throw std::invalid_argument("load_matrix: node name count does not match matrix size");
  m.node_names = std::move(node_names);
  return m;
}

ConnectivityMatrix load_matrix_file(const std::filesystem::path& path,
                                    std::vector<std::string> node_names) {
  try {
    return load_matrix(read_text_file(path), std::move(node_names));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

Eigen::VectorXd eigenvector_centrality(const ConnectivityMatrix& m, double tol,
                                       int max_iter) {
  if (tol <= 0.0) throw std::invalid_argument("eigenvector_centrality: tol must be > 0");
  const int n = m.n();
  if (n < 2 || m.weights.cols() != n)
    throw std::invalid_argument("eigenvector_centrality: invalid matrix");

  Eigen::MatrixXd b = m.weights.cwiseAbs();
  b.diagonal().setZero();
  if (b.maxCoeff() <= 0.0)
    throw std::invalid_argument("eigenvector_centrality: all-zero adjacency");

  // Shift keeps the dominant eigenvalue strictly largest in magnitude even
  // for bipartite graphs (where lambda_min = -lambda_max would otherwise
  // make plain power iteration oscillate).
  const double sigma = b.rowwise().sum().maxCoeff();

  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd bx = b * x;
    const double lambda = x.dot(bx);
    if ((bx - lambda * x).norm() <= tol) return x;
    Eigen::VectorXd z = bx + sigma * x;
    x = z / z.norm();
  }
  throw std::runtime_error("eigenvector_centrality: no convergence within " +
                           std::to_string(max_iter) + " iterations");
}

LabeledDataset build_evc_dataset(const std::vector<SubjectRecord>& subjects,
                                 double tol, int max_iter, int threads) {
  if (subjects.empty())
    throw std::invalid_argument("build_evc_dataset: empty subject list");
  const int n = subjects.front().matrix.n();
  for (const auto& s : subjects)
    if (s.matrix.n() != n)
      throw std::invalid_argument("build_evc_dataset: subject '" + s.id +
                                  "' has mismatched node count");

  const int m = static_cast<int>(subjects.size());
  std::vector<Eigen::VectorXd> rows(m);
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, m));

  std::exception_ptr first_error;
  std::mutex err_mu;
  auto work = [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      try {
        rows[i] = eigenvector_centrality(subjects[i].matrix, tol, max_iter);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  if (threads == 1) {
    work(0, m);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (m + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int begin = t * chunk;
      const int end = std::min(m, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  LabeledDataset ds;
  ds.X.resize(m, n);
  ds.y.resize(m);
  ds.subject_ids.resize(m);
  for (int i = 0; i < m; ++i) {
    ds.X.row(i) = rows[i].transpose();
    ds.y[i] = subjects[i].label == Label::PSP ? 1 : 0;
    ds.subject_ids[i] = subjects[i].id;
  }
  ds.feature_names = subjects.front().matrix.node_names;
  return ds;
}

std::vector<SubjectRecord> load_manifest(const std::filesystem::path& csv_path,
                                         std::vector<std::string> node_names) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open manifest " + csv_path.string());
  const auto base = csv_path.has_parent_path() ? csv_path.parent_path()
                                               : std::filesystem::path(".");
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("manifest " + csv_path.string() + " is empty");
  const auto header = split_csv_line(line);
  const std::vector<std::string> expected = {"subject_id", "cohort", "label",
                                             "matrix_path"};
  if (std::vector<std::string>(header.begin(), header.end()) != expected)
    throw std::invalid_argument("manifest header must be subject_id,cohort,label,matrix_path");

  std::vector<SubjectRecord> subjects;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4)
      throw std::invalid_argument("manifest row needs 4 fields: " + line);
    SubjectRecord rec;
    rec.id = f[0];
    rec.cohort = cohort_from_string(f[1]);
    rec.label = label_from_string(f[2]);
    std::filesystem::path mp = f[3];
    if (mp.is_relative()) mp = base / mp;
    rec.matrix = load_matrix_file(mp, node_names);
    subjects.push_back(std::move(rec));
  }
  if (subjects.empty())
    throw std::invalid_argument("manifest " + csv_path.string() + " has no subjects");
  return subjects;
}

std::filesystem::path write_cohort(const std::filesystem::path& dir,
                                   const std::vector<SubjectRecord>& subjects) {
  if (subjects.empty())
    throw std::invalid_argument("write_cohort: empty subject list");
  std::filesystem::create_directories(dir / "matrices");
  const auto manifest = dir / "manifest.csv";
  std::ofstream mf(manifest);
  if (!mf) throw std::runtime_error("cannot write " + manifest.string());
  mf << "subject_id,cohort,label,matrix_path\n";
  char buf[40];
  for (const auto& s : subjects) {
    const std::string rel = "matrices/" + s.id + ".txt";
    mf << s.id << ',' << to_string(s.cohort) << ',' << to_string(s.label) << ','
       << rel << '\n';
    std::ofstream out(dir / rel);
    if (!out) throw std::runtime_error("cannot write matrix for subject " + s.id);
    const auto& w = s.matrix.weights;
    for (int i = 0; i < w.rows(); ++i) {
      for (int j = 0; j < w.cols(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", w(i, j));
        out << (j ? " " : "") << buf;
      }
      out << '\n';
    }
  }
  return manifest;
}

std::vector<std::string> load_node_names(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open node-name file " + path.string());
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    names.push_back(t);
  }
  return names;
}

}  // namespace qbnc
