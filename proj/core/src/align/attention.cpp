#include "folio/align/attention.hpp"

#include <cmath>
#include <string>

#include "folio/error.hpp"

namespace folio::align {

AttentionOutput cross_attention(const Matrix& queries, const Matrix& patches, const CrossAttentionParams& params) {
  if (patches.rows() == 0) throw Error(Errc::InvalidArgument, "cross-attention needs at least one patch");
  if (patches.cols() != params.wk.rows() || patches.cols() != params.wv.rows()) {
    throw Error(Errc::DimMismatch, "patch dim does not match Wk/Wv rows");
  }
  if (params.wk.cols() == 0) throw Error(Errc::InvalidArgument, "d_k must be >= 1");
  if (queries.cols() != params.wk.cols()) {
    throw Error(Errc::DimMismatch, "query dim " + std::to_string(queries.cols()) + " must equal d_k " +
                                       std::to_string(params.wk.cols()));
  }
  if (params.wv.cols() != queries.cols()) {
    throw Error(Errc::DimMismatch, "Wv must map patches to the query dim");
  }

  const Matrix keys = matmul(patches, params.wk);
  const Matrix values = matmul(patches, params.wv);
  Matrix scores = matmul_a_bt(queries, keys);
  scores *= 1.0 / std::sqrt(static_cast<double>(params.wk.cols()));

  for (std::size_t i = 0; i < scores.rows(); ++i) {
    auto row = scores.row(i);
    double mx = row[0];
    for (double v : row) mx = std::max(mx, v);
    double z = 0.0;
    for (double& v : row) {
      v = std::exp(v - mx);
      z += v;
    }
    for (double& v : row) v /= z;
  }

  AttentionOutput out;
  out.pooled = matmul(scores, values);
  out.weights = std::move(scores);
  return out;
}

Matrix cross_attention_pool(const Matrix& queries, const Matrix& patches, const CrossAttentionParams& params) {
  return cross_attention(queries, patches, params).pooled;
}

int patch_count(int resolution, int patch_size) {
  if (resolution <= 0 || patch_size <= 0) {
    throw Error(Errc::InvalidArgument, "resolution and patch size must be positive");
  }
  if (resolution % patch_size != 0) {
    throw Error(Errc::NotDivisible, "patch size " + std::to_string(patch_size) + " does not divide resolution " +
                                        std::to_string(resolution));
  }
  const int per_side = resolution / patch_size;
  return per_side * per_side;
}

}  // namespace folio::align
