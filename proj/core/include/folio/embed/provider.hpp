#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "folio/embed/vector.hpp"

namespace folio::embed {

enum class ProviderKind { RemoteHttp, Stub };

struct EmbedderConfig {
  ProviderKind provider_kind = ProviderKind::Stub;
  std::optional<std::string> endpoint;
  std::size_t dim = 384;
  Modality modality = Modality::Text;
  int timeout_ms = 30000;
  std::uint64_t stub_seed = 0;
  // Remote only: concurrent requests per provider and inputs per request.
  std::size_t max_in_flight = 4;
  std::size_t batch_size = 16;
};

// Throws InvalidArgument when the config breaks its invariants.
void validate(const EmbedderConfig& cfg);

// A text or image encoder. Every returned vector is re-checked against dim
// and normalized at this boundary regardless of what the backend produced.
class Embedder {
 public:
  explicit Embedder(EmbedderConfig cfg);
  virtual ~Embedder() = default;

  Embedder(const Embedder&) = delete;
  Embedder& operator=(const Embedder&) = delete;

  const EmbedderConfig& config() const noexcept { return cfg_; }

  EmbeddingVector embed_text(std::string_view text);
  EmbeddingVector embed_image(const std::filesystem::path& image);

  std::vector<EmbeddingVector> embed_texts(std::span<const std::string> texts);
  std::vector<EmbeddingVector> embed_images(std::span<const std::filesystem::path> images);

 protected:
  // Backends return raw rows; the base class validates and normalizes them.
  virtual std::vector<std::vector<double>> raw_texts(std::span<const std::string> texts) = 0;
  virtual std::vector<std::vector<double>> raw_images(
      std::span<const std::vector<std::uint8_t>> images) = 0;

 private:
  std::vector<EmbeddingVector> finish(std::vector<std::vector<double>> rows, std::size_t expected);

  EmbedderConfig cfg_;
};

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& cfg);

// One-shot helpers. embed_text requires cfg.modality == Text and embed_image
// requires Image (InvalidArgument otherwise).
EmbeddingVector embed_text(std::string_view text, const EmbedderConfig& cfg);
EmbeddingVector embed_image(const std::filesystem::path& image, const EmbedderConfig& cfg);

}  // namespace folio::embed
