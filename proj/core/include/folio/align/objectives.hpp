#pragma once

#include "folio/align/matrix.hpp"
#include "folio/align/projection.hpp"

namespace folio::align {

inline constexpr double kDefaultTemperature = 0.07;

struct ProjectedLoss {
  double loss = 0.0;
  Matrix grad_p;  // d loss / d P, k x d_txt
};

// Symmetric InfoNCE over k matched rows. Logits L[i][j] = <P_i, T_j> / tau;
// loss = 0.5 * mean_i CE(row i, target i) + 0.5 * mean_j CE(column j, target j).
// Rows of P and T are expected to be unit norm. Throws DimMismatch.
ProjectedLoss infonce_on_projected(const Matrix& p, const Matrix& t, double tau);

struct LoraLoss {
  double loss = 0.0;
  Matrix grad_b;
  Matrix grad_a;
  Matrix grad_w;  // gradient w.r.t. the effective W, before the LoRA chain rule
};

// InfoNCE of normalize(X * W) against T, with exact gradients w.r.t. B and A
// through the normalization and the low-rank factorization. X is k x d_img,
// T is k x d_txt with unit rows.
LoraLoss infonce_loss(const ProjectionModel& m, const Matrix& x, const Matrix& t, double tau);

struct DenseLoss {
  double loss = 0.0;
  Matrix grad_w;
};

// Mean squared error 1/(2k) * sum_i ||x_i W - t_i||^2 and its gradient
// (1/k) X^T (X W - T).
DenseLoss least_squares_loss(const Matrix& w, const Matrix& x, const Matrix& t);

// Fraction of rows i whose best-scoring column in P * T^T is i (ties count
// as misses unless i is the lowest tied index).
double retrieval_accuracy(const Matrix& p, const Matrix& t);

// Row-normalized X * W; throws ZeroProjection on a degenerate row.
Matrix project_rows(const Matrix& x, const Matrix& w);

}  // namespace folio::align
