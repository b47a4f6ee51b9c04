#pragma once

#include "folio/align/matrix.hpp"

namespace folio::align {

// Single-head cross-attention from m queries over n patch features. Keys and
// values are linear maps of the patches; no positional encoding, so the
// result is invariant under any permutation of patch rows.
struct CrossAttentionParams {
  Matrix wk;  // d_p x d_k
  Matrix wv;  // d_p x d_q
};

struct AttentionOutput {
  Matrix pooled;   // m x d_q
  Matrix weights;  // m x n, each row a probability distribution
};

// K = P Wk, V = P Wv, S = Q K^T / sqrt(d_k), out = softmax_rows(S) V.
// Queries are used directly, so d_q must equal d_k. Throws DimMismatch.
AttentionOutput cross_attention(const Matrix& queries, const Matrix& patches, const CrossAttentionParams& params);

// The pooled m x d_q matrix only; m rows regardless of patch count.
Matrix cross_attention_pool(const Matrix& queries, const Matrix& patches, const CrossAttentionParams& params);

// (resolution / patch_size)^2; throws NotDivisible unless patch_size divides resolution.
int patch_count(int resolution, int patch_size);

}  // namespace folio::align
