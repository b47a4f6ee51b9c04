#include "folio/align/projection.hpp"

#include <cmath>
#include <random>
#include <string>

#include "folio/error.hpp"

namespace folio::align {

void validate(const ProjectionModel& m) {
  if (m.w0.rows() == 0 || m.w0.cols() == 0) throw Error(Errc::InvalidArgument, "projection base matrix is empty");
  if (m.b.cols() == 0) throw Error(Errc::InvalidArgument, "LoRA rank must be >= 1");
  if (m.b.rows() != m.d_img()) throw Error(Errc::DimMismatch, "B must have d_img rows");
  if (m.a.rows() != m.rank()) throw Error(Errc::DimMismatch, "A must have r rows");
  if (m.a.cols() != m.d_txt()) throw Error(Errc::DimMismatch, "A must have d_txt columns");
  if (!(m.alpha > 0.0) || !std::isfinite(m.alpha)) throw Error(Errc::InvalidArgument, "alpha must be > 0");
}

ProjectionModel make_lora_model(Matrix w0, std::size_t rank, double alpha, std::uint64_t seed, double init_scale) {
  if (rank == 0) throw Error(Errc::InvalidArgument, "LoRA rank must be >= 1");
  ProjectionModel m;
  m.b = Matrix(w0.rows(), rank);
  m.a = Matrix(rank, w0.cols());
  m.alpha = alpha > 0.0 ? alpha : 2.0 * static_cast<double>(rank);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-init_scale, init_scale);
  for (double& v : m.b.data()) v = dist(rng);
  m.w0 = std::move(w0);
  validate(m);
  return m;
}

Matrix default_base_matrix(std::size_t d_img, std::size_t d_txt, std::uint64_t seed) {
  if (d_img == d_txt) return Matrix::identity(d_img);
  Matrix w(d_img, d_txt);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(d_txt)));
  for (double& v : w.data()) v = dist(rng);
  return w;
}

Matrix lora_delta(const ProjectionModel& m) {
  validate(m);
  return m.scale() * matmul(m.b, m.a);
}

Matrix lora_merge(const ProjectionModel& m) { return m.w0 + lora_delta(m); }

ProjectionModel merged_model(const ProjectionModel& m) {
  ProjectionModel out;
  out.w0 = lora_merge(m);
  out.b = Matrix(m.b.rows(), m.b.cols());
  out.a = m.a;
  out.alpha = m.alpha;
  return out;
}

std::vector<double> project_with(std::span<const double> x, const Matrix& w) {
  auto y = vec_mat(x, w);
  double sq = 0.0;
  for (double v : y) sq += v * v;
  const double norm = std::sqrt(sq);
  if (!(norm >= kZeroProjectionThreshold)) {
    throw Error(Errc::ZeroProjection, "projected vector has norm below 1e-12");
  }
  for (double& v : y) v /= norm;
  return y;
}

std::vector<double> project(std::span<const double> x, const ProjectionModel& m) {
  if (x.size() != m.d_img()) {
    throw Error(Errc::DimMismatch, "project: input has length " + std::to_string(x.size()) + ", model expects " +
                                       std::to_string(m.d_img()));
  }
  return project_with(x, lora_merge(m));
}

std::vector<double> project(std::span<const float> x, const ProjectionModel& m) {
  std::vector<double> xd(x.begin(), x.end());
  return project(std::span<const double>(xd), m);
}

}  // namespace folio::align
