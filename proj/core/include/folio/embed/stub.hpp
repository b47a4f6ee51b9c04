#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

#include "folio/embed/vector.hpp"

namespace folio::embed {

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) noexcept;

// One step of the splitmix64 generator; advances state in place.
std::uint64_t splitmix64_next(std::uint64_t& state) noexcept;

// Deterministic pseudo-embedding: state = fnv1a64(bytes) ^ seed, then dim
// splitmix64 draws mapped to [-1, 1) via (u >> 11) * 2^-53 * 2 - 1, then
// L2-normalized. Pure function of (bytes, dim, seed).
EmbeddingVector stub_embed(std::span<const std::uint8_t> bytes, std::size_t dim, std::uint64_t seed,
                           Modality modality = Modality::Text);

EmbeddingVector stub_embed(std::string_view bytes, std::size_t dim, std::uint64_t seed,
                           Modality modality = Modality::Text);

// Text stub: normalized sum of stub_embed over the lowercased,
// punctuation-trimmed whitespace tokens, so texts sharing tokens land close
// together. Text without any such token falls back to hashing the raw bytes.
EmbeddingVector stub_embed_text(std::string_view text, std::size_t dim, std::uint64_t seed);

}  // namespace folio::embed
