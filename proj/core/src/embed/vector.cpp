#include "folio/embed/vector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "folio/error.hpp"

namespace folio::embed {

std::string_view to_string(Modality m) noexcept { return m == Modality::Text ? "text" : "image"; }

namespace {
template <typename T>
void normalize_impl(std::span<const T> raw, std::vector<float>& out) {
  if (raw.empty()) throw Error(Errc::ProviderBadResponse, "embedding has zero dimensions");
  double sq = 0.0;
  for (T v : raw) {
    if (!std::isfinite(static_cast<double>(v))) {
      throw Error(Errc::ProviderBadResponse, "embedding contains non-finite values");
    }
    sq += static_cast<double>(v) * static_cast<double>(v);
  }
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error(Errc::ProviderBadResponse, "embedding has zero norm");
  }
  out.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = static_cast<float>(static_cast<double>(raw[i]) / norm);
}
}  // namespace

EmbeddingVector EmbeddingVector::normalize(std::span<const double> raw, Modality modality) {
  EmbeddingVector v;
  normalize_impl(raw, v.values_);
  v.modality_ = modality;
  return v;
}

EmbeddingVector EmbeddingVector::normalize(std::span<const float> raw, Modality modality) {
  EmbeddingVector v;
  normalize_impl(raw, v.values_);
  v.modality_ = modality;
  return v;
}

double cosine(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) {
    throw Error(Errc::DimMismatch,
                "cosine of vectors with dims " + std::to_string(u.size()) + " and " + std::to_string(v.size()));
  }
  // Stored values are f32, so their norms sit within ~1e-7 of one; dividing
  // by the recomputed norms keeps cosine(u, u) at 1 to double precision.
  double dot = 0.0;
  double uu = 0.0;
  double vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = u[i];
    const double b = v[i];
    dot += a * b;
    uu += a * a;
    vv += b * b;
  }
  if (uu == 0.0 || vv == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(uu * vv), -1.0, 1.0);
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) { return cosine(u.values(), v.values()); }

}  // namespace folio::embed
