#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace folio::corpus {

struct FigureImageRef {
  std::optional<std::string> label_hint;
  std::string image_ref;

  bool operator==(const FigureImageRef&) const = default;
};

struct PageSource {
  int page_no = 0;
  std::string image_ref;
  std::string text;
  std::vector<FigureImageRef> figure_image_refs;

  bool operator==(const PageSource&) const = default;
};

// Normalized, post-rasterization form of one document.
struct DocumentBundle {
  std::string doc_id;
  std::string title;
  std::vector<PageSource> pages;

  bool operator==(const DocumentBundle&) const = default;
};

struct FigureCaptionPair {
  std::string label;  // "Fig 4", "Figure 2"
  std::string caption_raw;
  std::string caption_clean;
  std::optional<std::string> image_ref;

  bool operator==(const FigureCaptionPair&) const = default;
};

// Half-open span in whitespace-token units.
struct UnitSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - start; }
  bool operator==(const UnitSpan&) const = default;
};

struct Chunk {
  std::string chunk_id;  // "doc:page:ordinal"
  std::string text;
  UnitSpan span;

  bool operator==(const Chunk&) const = default;
};

struct PageRecord {
  std::string doc_id;
  int page_no = 0;
  std::string image_ref;
  std::string text;
  std::vector<FigureCaptionPair> figures;
  std::vector<Chunk> chunks;

  bool operator==(const PageRecord&) const = default;
};

}  // namespace folio::corpus
