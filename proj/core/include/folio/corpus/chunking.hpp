#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "folio/corpus/types.hpp"

namespace folio::corpus {

struct ChunkingOptions {
  std::size_t max_units = 512;
  std::size_t overlap = 64;
};

// Greedy left-to-right tiling of n units into spans of at most max_units,
// consecutive spans sharing exactly `overlap` units. Throws InvalidChunking
// unless 0 <= overlap < max_units.
std::vector<UnitSpan> tile_units(std::size_t n, const ChunkingOptions& opts);

// Chunks with ids "{id_prefix}:{ordinal}"; ordinals start at 0.
std::vector<Chunk> chunk_text(std::string_view text, const ChunkingOptions& opts,
                              std::string_view id_prefix = "");

std::string chunk_id(std::string_view doc_id, int page_no, std::size_t ordinal);

}  // namespace folio::corpus
