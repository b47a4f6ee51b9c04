#include "folio/corpus/chunking.hpp"

#include <algorithm>

#include "folio/error.hpp"
#include "folio/util/text.hpp"

namespace folio::corpus {

std::vector<UnitSpan> tile_units(std::size_t n, const ChunkingOptions& opts) {
  if (opts.max_units == 0 || opts.overlap >= opts.max_units) {
    throw Error(Errc::InvalidChunking,
                "overlap (" + std::to_string(opts.overlap) + ") must be smaller than max_units (" +
                    std::to_string(opts.max_units) + ")");
  }
  std::vector<UnitSpan> spans;
  std::size_t start = 0;
  while (start < n) {
    const std::size_t end = std::min(start + opts.max_units, n);
    spans.push_back({start, end});
    if (end == n) break;
    start = end - opts.overlap;
  }
  return spans;
}

std::string chunk_id(std::string_view doc_id, int page_no, std::size_t ordinal) {
  return std::string(doc_id) + ":" + std::to_string(page_no) + ":" + std::to_string(ordinal);
}

std::vector<Chunk> chunk_text(std::string_view text_in, const ChunkingOptions& opts,
                              std::string_view id_prefix) {
  const auto tokens = text::split_whitespace(text_in);
  const auto spans = tile_units(tokens.size(), opts);

  std::vector<Chunk> chunks;
  chunks.reserve(spans.size());
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto& sp = spans[i];
    std::vector<std::string_view> window(tokens.begin() + static_cast<std::ptrdiff_t>(sp.start),
                                         tokens.begin() + static_cast<std::ptrdiff_t>(sp.end));
    Chunk c;
    c.chunk_id = id_prefix.empty() ? std::to_string(i) : std::string(id_prefix) + ":" + std::to_string(i);
    c.text = text::join(window);
    c.span = sp;
    chunks.push_back(std::move(c));
  }
  return chunks;
}

}  // namespace folio::corpus
