#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace folio::embed {

enum class Modality { Text, Image };

std::string_view to_string(Modality m) noexcept;

// Modality-tagged unit-norm float vector. The only way to build one is
// normalize(), so every instance satisfies the norm and finiteness invariants.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;

  // L2-normalizes raw. Throws ProviderBadResponse on non-finite input or a
  // zero vector.
  static EmbeddingVector normalize(std::span<const double> raw, Modality modality);
  static EmbeddingVector normalize(std::span<const float> raw, Modality modality);

  std::size_t dim() const noexcept { return values_.size(); }
  Modality modality() const noexcept { return modality_; }
  std::span<const float> values() const noexcept { return values_; }
  float operator[](std::size_t i) const { return values_[i]; }

  bool operator==(const EmbeddingVector&) const = default;

 private:
  std::vector<float> values_;
  Modality modality_ = Modality::Text;
};

// Dot product of unit vectors, clamped to [-1, 1]. Throws DimMismatch.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);
double cosine(std::span<const float> u, std::span<const float> v);

}  // namespace folio::embed
