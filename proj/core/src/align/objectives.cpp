#include "folio/align/objectives.hpp"

#include <cmath>
#include <string>

#include "folio/error.hpp"

namespace folio::align {

namespace {

void require_same_shape(const Matrix& p, const Matrix& t) {
  if (p.rows() != t.rows() || p.cols() != t.cols()) {
    throw Error(Errc::DimMismatch, "InfoNCE needs matching k x d matrices, got " + std::to_string(p.rows()) + "x" +
                                       std::to_string(p.cols()) + " and " + std::to_string(t.rows()) + "x" +
                                       std::to_string(t.cols()));
  }
}

}  // namespace

ProjectedLoss infonce_on_projected(const Matrix& p, const Matrix& t, double tau) {
  require_same_shape(p, t);
  if (!(tau > 0.0)) throw Error(Errc::InvalidArgument, "temperature must be > 0");
  const std::size_t k = p.rows();
  ProjectedLoss out{0.0, Matrix(k, p.cols())};
  if (k == 0) return out;

  Matrix logits = matmul_a_bt(p, t);
  logits *= 1.0 / tau;

  // g[i][j] = d loss / d logits[i][j]
  Matrix g(k, k);
  const double half_mean = 0.5 / static_cast<double>(k);

  for (std::size_t i = 0; i < k; ++i) {
    double mx = logits(i, 0);
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, logits(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) z += std::exp(logits(i, j) - mx);
    const double lse = mx + std::log(z);
    out.loss += half_mean * (lse - logits(i, i));
    for (std::size_t j = 0; j < k; ++j) {
      g(i, j) += half_mean * (std::exp(logits(i, j) - lse) - (i == j ? 1.0 : 0.0));
    }
  }
  for (std::size_t j = 0; j < k; ++j) {
    double mx = logits(0, j);
    for (std::size_t i = 1; i < k; ++i) mx = std::max(mx, logits(i, j));
    double z = 0.0;
    for (std::size_t i = 0; i < k; ++i) z += std::exp(logits(i, j) - mx);
    const double lse = mx + std::log(z);
    out.loss += half_mean * (lse - logits(j, j));
    for (std::size_t i = 0; i < k; ++i) {
      g(i, j) += half_mean * (std::exp(logits(i, j) - lse) - (i == j ? 1.0 : 0.0));
    }
  }

  out.grad_p = matmul(g, t);
  out.grad_p *= 1.0 / tau;
  return out;
}

Matrix project_rows(const Matrix& x, const Matrix& w) {
  Matrix z = matmul(x, w);
  for (std::size_t i = 0; i < z.rows(); ++i) {
    auto row = z.row(i);
    double sq = 0.0;
    for (double v : row) sq += v * v;
    const double norm = std::sqrt(sq);
    if (!(norm >= kZeroProjectionThreshold)) throw Error(Errc::ZeroProjection, "projected row has norm below 1e-12");
    for (double& v : row) v /= norm;
  }
  return z;
}

LoraLoss infonce_loss(const ProjectionModel& m, const Matrix& x, const Matrix& t, double tau) {
  validate(m);
  if (x.cols() != m.d_img() || t.cols() != m.d_txt() || x.rows() != t.rows()) {
    throw Error(Errc::DimMismatch, "InfoNCE batch shapes do not match the projection model");
  }
  const Matrix w = lora_merge(m);
  Matrix z = matmul(x, w);
  Matrix p(z.rows(), z.cols());
  std::vector<double> norms(z.rows());
  for (std::size_t i = 0; i < z.rows(); ++i) {
    double sq = 0.0;
    for (double v : z.row(i)) sq += v * v;
    norms[i] = std::sqrt(sq);
    if (!(norms[i] >= kZeroProjectionThreshold)) {
      throw Error(Errc::ZeroProjection, "projected row has norm below 1e-12");
    }
    for (std::size_t c = 0; c < z.cols(); ++c) p(i, c) = z(i, c) / norms[i];
  }

  ProjectedLoss pl = infonce_on_projected(p, t, tau);

  // Back through p = z / ||z||: dz = (g - (g . p) p) / ||z||
  Matrix dz(z.rows(), z.cols());
  for (std::size_t i = 0; i < z.rows(); ++i) {
    double gp = 0.0;
    for (std::size_t c = 0; c < z.cols(); ++c) gp += pl.grad_p(i, c) * p(i, c);
    for (std::size_t c = 0; c < z.cols(); ++c) dz(i, c) = (pl.grad_p(i, c) - gp * p(i, c)) / norms[i];
  }

  LoraLoss out;
  out.loss = pl.loss;
  out.grad_w = matmul_at_b(x, dz);
  out.grad_b = m.scale() * matmul_a_bt(out.grad_w, m.a);
  out.grad_a = m.scale() * matmul_at_b(m.b, out.grad_w);
  return out;
}

DenseLoss least_squares_loss(const Matrix& w, const Matrix& x, const Matrix& t) {
  if (x.cols() != w.rows() || t.cols() != w.cols() || x.rows() != t.rows()) {
    throw Error(Errc::DimMismatch, "least-squares batch shapes do not match W");
  }
  DenseLoss out;
  const std::size_t k = x.rows();
  if (k == 0) {
    out.grad_w = Matrix(w.rows(), w.cols());
    return out;
  }
  Matrix resid = matmul(x, w) - t;
  double sq = 0.0;
  for (double v : resid.data()) sq += v * v;
  out.loss = sq / (2.0 * static_cast<double>(k));
  out.grad_w = matmul_at_b(x, resid);
  out.grad_w *= 1.0 / static_cast<double>(k);
  return out;
}

double retrieval_accuracy(const Matrix& p, const Matrix& t) {
  require_same_shape(p, t);
  const std::size_t k = p.rows();
  if (k == 0) return 0.0;
  const Matrix s = matmul_a_bt(p, t);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < k; ++j)
      if (s(i, j) > s(i, best)) best = j;
    if (best == i) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(k);
}

}  // namespace folio::align
