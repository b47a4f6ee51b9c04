#pragma once

// Helpers shared by the test binaries. The oracle functions here are written
// against plain vectors and loops on purpose: they must not reuse the library
// code they are checking.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "folio/align/matrix.hpp"
#include "folio/corpus/types.hpp"
#include "folio/index/vector_index.hpp"

namespace folio::testing {

inline std::vector<float> random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> n;
  std::vector<double> v(dim);
  double sq = 0;
  for (auto& x : v) {
    x = n(rng);
    sq += x * x;
  }
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] / std::sqrt(sq));
  return out;
}

inline align::Matrix gaussian_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> n(0.0, sd);
  align::Matrix m(rows, cols);
  for (auto& v : m.data()) v = n(rng);
  return m;
}

inline align::Matrix normalized_rows(align::Matrix m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double sq = 0;
    for (double v : m.row(i)) sq += v * v;
    const double norm = std::sqrt(sq);
    for (double& v : m.row(i)) v /= norm;
  }
  return m;
}

// Brute-force top-k: score every live record with a double dot product cast
// to float, sort by (score desc, id asc).
struct OracleHit {
  std::uint64_t id;
  float score;
};

inline std::vector<OracleHit> brute_force_topk(const std::vector<index::IndexedRecord>& records,
                                               const std::vector<float>& q, std::size_t k,
                                               const index::SearchFilter& filter = {}) {
  std::vector<OracleHit> all;
  for (const auto& r : records) {
    if (!filter.matches(r)) continue;
    double dot = 0;
    for (std::size_t i = 0; i < q.size(); ++i) dot += static_cast<double>(q[i]) * static_cast<double>(r.vector[i]);
    all.push_back({r.id, static_cast<float>(dot)});
  }
  std::sort(all.begin(), all.end(), [](const OracleHit& a, const OracleHit& b) {
    return a.score != b.score ? a.score > b.score : a.id < b.id;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

// Solves (X^T X) W = X^T T by Gaussian elimination with partial pivoting.
inline std::vector<std::vector<double>> normal_equations_solution(const align::Matrix& x, const align::Matrix& t) {
  const std::size_t d = x.cols();
  const std::size_t m = t.cols();
  std::vector<std::vector<double>> aug(d, std::vector<double>(d + m, 0.0));
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t i = 0; i < d; ++i) {
      const double xi = x(r, i);
      for (std::size_t j = 0; j < d; ++j) aug[i][j] += xi * x(r, j);
      for (std::size_t j = 0; j < m; ++j) aug[i][d + j] += xi * t(r, j);
    }
  }
  for (std::size_t col = 0; col < d; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < d; ++r) {
      if (std::abs(aug[r][col]) > std::abs(aug[pivot][col])) pivot = r;
    }
    std::swap(aug[col], aug[pivot]);
    for (std::size_t r = 0; r < d; ++r) {
      if (r == col) continue;
      const double f = aug[r][col] / aug[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < d + m; ++c) aug[r][c] -= f * aug[col][c];
    }
  }
  std::vector<std::vector<double>> w(d, std::vector<double>(m));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < m; ++j) w[i][j] = aug[i][d + j] / aug[i][i];
  }
  return w;
}

// Rank by row reduction with a relative pivot tolerance.
inline std::size_t matrix_rank(std::vector<std::vector<double>> a, double rel_tol = 1e-9) {
  if (a.empty()) return 0;
  double scale = 0;
  for (const auto& row : a)
    for (double v : row) scale = std::max(scale, std::abs(v));
  if (scale == 0) return 0;
  const std::size_t rows = a.size();
  const std::size_t cols = a[0].size();
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t pivot = rank;
    for (std::size_t r = rank + 1; r < rows; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[pivot][c])) pivot = r;
    }
    if (std::abs(a[pivot][c]) <= rel_tol * scale) continue;
    std::swap(a[rank], a[pivot]);
    for (std::size_t r = rank + 1; r < rows; ++r) {
      const double f = a[r][c] / a[rank][c];
      for (std::size_t cc = c; cc < cols; ++cc) a[r][cc] -= f * a[rank][cc];
    }
    ++rank;
  }
  return rank;
}

inline std::vector<std::vector<double>> to_rows(const align::Matrix& m) {
  std::vector<std::vector<double>> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i].assign(m.row(i).begin(), m.row(i).end());
  return out;
}

// Plain-loop product of row-major nested vectors.
inline std::vector<std::vector<double>> naive_matmul(const std::vector<std::vector<double>>& a,
                                                     const std::vector<std::vector<double>>& b) {
  std::vector<std::vector<double>> out(a.size(), std::vector<double>(b.empty() ? 0 : b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < b[0].size(); ++j) out[i][j] += a[i][k] * b[k][j];
  return out;
}

// W0 + (alpha / r) B A, from nested vectors.
inline std::vector<std::vector<double>> naive_lora_w(const align::Matrix& w0, const align::Matrix& b,
                                                     const align::Matrix& a, double alpha) {
  auto w = to_rows(w0);
  const auto ba = naive_matmul(to_rows(b), to_rows(a));
  const double s = alpha / static_cast<double>(b.cols());
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = 0; j < w[i].size(); ++j) w[i][j] += s * ba[i][j];
  return w;
}

// Symmetric InfoNCE of normalize(X W) against T written out term by term:
// 0.5 * mean over rows and 0.5 * mean over columns of -log softmax at the
// matching index, with logits <p_i, t_j> / tau.
inline double oracle_infonce(const std::vector<std::vector<double>>& w, const align::Matrix& x,
                             const align::Matrix& t, double tau) {
  const std::size_t k = x.rows();
  auto p = naive_matmul(to_rows(x), w);
  for (auto& row : p) {
    double sq = 0;
    for (double v : row) sq += v * v;
    for (double& v : row) v /= std::sqrt(sq);
  }
  std::vector<std::vector<double>> logits(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      double dot = 0;
      for (std::size_t c = 0; c < t.cols(); ++c) dot += p[i][c] * t(j, c);
      logits[i][j] = dot / tau;
    }
  auto neg_log_softmax = [](const std::vector<double>& z, std::size_t target) {
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0;
    for (double v : z) sum += std::exp(v - mx);
    return mx + std::log(sum) - z[target];
  };
  double rows = 0;
  double cols = 0;
  for (std::size_t i = 0; i < k; ++i) {
    rows += neg_log_softmax(logits[i], i);
    std::vector<double> col(k);
    for (std::size_t j = 0; j < k; ++j) col[j] = logits[j][i];
    cols += neg_log_softmax(col, i);
  }
  return 0.5 * rows / static_cast<double>(k) + 0.5 * cols / static_cast<double>(k);
}

inline double oracle_least_squares(const std::vector<std::vector<double>>& w, const align::Matrix& x,
                                   const align::Matrix& t) {
  const auto p = naive_matmul(to_rows(x), w);
  double sum = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < p[i].size(); ++j) sum += (p[i][j] - t(i, j)) * (p[i][j] - t(i, j));
  return sum / (2.0 * static_cast<double>(x.rows()));
}

// Central differences over every entry of theta with step 1e-4 * max(1, |theta_i|).
inline align::Matrix finite_difference_gradient(align::Matrix theta,
                                                const std::function<double(const align::Matrix&)>& loss) {
  align::Matrix g(theta.rows(), theta.cols());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double orig = theta.data()[i];
    const double h = 1e-4 * std::max(1.0, std::abs(orig));
    theta.data()[i] = orig + h;
    const double up = loss(theta);
    theta.data()[i] = orig - h;
    const double down = loss(theta);
    theta.data()[i] = orig;
    g.data()[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// Largest entrywise |a - n| / max(|a|, |n|); entries where both sides are
// below `floor` in magnitude are compared against `floor` instead.
inline double max_relative_error(const align::Matrix& analytic, const align::Matrix& numeric,
                                 double floor = 1e-6) {
  double worst = 0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double a = analytic.data()[i];
    const double n = numeric.data()[i];
    const double denom = std::max({std::abs(a), std::abs(n), floor});
    worst = std::max(worst, std::abs(a - n) / denom);
  }
  return worst;
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("folio-test-" + std::to_string(rd()) + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

// A document whose every page carries one token found nowhere else, with a
// small page image per page so image records exist too.
struct SyntheticDoc {
  corpus::DocumentBundle bundle;
  std::vector<std::string> markers;  // markers[i] belongs to page i + 1
};

inline std::string marker_token(std::size_t doc, std::size_t page) {
  // Letters only, so the text stub's punctuation trimming leaves it intact.
  std::string s = "mk";
  std::size_t v = doc * 97 + page;
  for (int i = 0; i < 4; ++i) {
    s += static_cast<char>('a' + v % 26);
    v /= 26;
  }
  return s + "q";
}

inline SyntheticDoc make_synthetic_doc(const std::filesystem::path& dir, std::size_t doc, std::size_t pages) {
  static const char* kFiller[] = {"the", "study", "reports", "results", "for", "documents", "with", "figures",
                                  "and", "tables", "across", "several", "pages", "of", "text"};
  SyntheticDoc out;
  out.bundle.doc_id = "doc" + std::to_string(doc);
  out.bundle.title = "Synthetic document " + std::to_string(doc);
  std::mt19937_64 rng(doc * 7919 + 1);
  for (std::size_t p = 1; p <= pages; ++p) {
    corpus::PageSource page;
    page.page_no = static_cast<int>(p);
    const auto img = dir / (out.bundle.doc_id + "_p" + std::to_string(p) + ".png");
    write_text(img, "page-image:" + out.bundle.doc_id + ":" + std::to_string(p));
    page.image_ref = img.string();
    const auto marker = marker_token(doc, p);
    std::string text;
    for (int i = 0; i < 24; ++i) {
      text += std::string(kFiller[rng() % 15]) + " ";
      if (i % 8 == 7) text += marker + " ";
    }
    page.text = text;
    out.markers.push_back(marker);
    out.bundle.pages.push_back(std::move(page));
  }
  return out;
}

}  // namespace folio::testing
