#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "folio/align/matrix.hpp"

namespace folio::align {

// Image-space to text-space projection with a LoRA-parameterized update:
// W = W0 + (alpha / r) * B * A. W0 is d_img x d_txt and frozen during
// low-rank training; B is d_img x r, A is r x d_txt.
struct ProjectionModel {
  Matrix w0;
  Matrix b;
  Matrix a;
  double alpha = 2.0;

  std::size_t d_img() const noexcept { return w0.rows(); }
  std::size_t d_txt() const noexcept { return w0.cols(); }
  std::size_t rank() const noexcept { return b.cols(); }
  double scale() const noexcept { return alpha / static_cast<double>(rank()); }

  // r * (d_img + d_txt)
  std::size_t trainable_parameter_count() const noexcept { return rank() * (d_img() + d_txt()); }

  bool operator==(const ProjectionModel&) const = default;
};

// Throws DimMismatch / InvalidArgument if the shapes or alpha are inconsistent.
void validate(const ProjectionModel& m);

// LoRA initialization: B small uniform in [-init_scale, init_scale) drawn
// from seed, A zero, so the update starts at exactly zero. alpha <= 0 selects
// the default 2r.
ProjectionModel make_lora_model(Matrix w0, std::size_t rank, double alpha, std::uint64_t seed,
                                double init_scale = 0.01);

// Base map for mismatched dims: seeded Gaussian entries scaled by 1/sqrt(d_txt),
// or the identity when d_img == d_txt.
Matrix default_base_matrix(std::size_t d_img, std::size_t d_txt, std::uint64_t seed);

// (alpha / r) * B * A
Matrix lora_delta(const ProjectionModel& m);

// W0 + lora_delta(m)
Matrix lora_merge(const ProjectionModel& m);

// Same map with the update folded into the base and B zeroed.
ProjectionModel merged_model(const ProjectionModel& m);

inline constexpr double kZeroProjectionThreshold = 1e-12;

// y = normalize(x * W). Throws DimMismatch, or ZeroProjection when
// ||x * W|| < 1e-12.
std::vector<double> project(std::span<const double> x, const ProjectionModel& m);
std::vector<double> project(std::span<const float> x, const ProjectionModel& m);

// Same as project() with W already merged; avoids recomputing B * A per call.
std::vector<double> project_with(std::span<const double> x, const Matrix& w);

}  // namespace folio::align
