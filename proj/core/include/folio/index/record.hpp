#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace folio::index {

enum class Space : std::uint8_t { TextSpace = 0, ImageSpaceProjected = 1 };
enum class RecordKind : std::uint8_t { TextChunk = 0, PageImage = 1, FigureImage = 2 };

std::string_view to_string(Space s) noexcept;
std::string_view to_string(RecordKind k) noexcept;
std::optional<RecordKind> parse_record_kind(std::string_view s) noexcept;

struct Payload {
  std::string doc_id;
  int page_no = 0;
  std::optional<std::string> chunk_id;
  std::optional<std::string> label;
  std::optional<std::string> text;
  std::optional<std::string> image_ref;

  bool operator==(const Payload&) const = default;
};

// What callers hand to insert(); the index assigns the id.
struct NewRecord {
  std::vector<float> vector;
  Space space = Space::TextSpace;
  RecordKind kind = RecordKind::TextChunk;
  Payload payload;
};

struct IndexedRecord {
  std::uint64_t id = 0;
  std::vector<float> vector;
  Space space = Space::TextSpace;
  RecordKind kind = RecordKind::TextChunk;
  Payload payload;

  bool operator==(const IndexedRecord&) const = default;
};

// Fixed predicate over kind, space and doc_id; unset fields match anything.
struct SearchFilter {
  std::optional<std::vector<RecordKind>> kinds;
  std::optional<Space> space;
  std::optional<std::string> doc_id;

  bool matches(RecordKind kind, Space sp, const std::string& doc) const;
  bool matches(const IndexedRecord& r) const { return matches(r.kind, r.space, r.payload.doc_id); }
};

struct SearchHit {
  std::uint64_t id = 0;
  float score = 0.0f;  // cosine similarity
  RecordKind kind = RecordKind::TextChunk;
  Space space = Space::TextSpace;
  Payload payload;

  bool operator==(const SearchHit&) const = default;
};

// Descending score, ascending id on ties.
inline bool hit_before(float score_a, std::uint64_t id_a, float score_b, std::uint64_t id_b) noexcept {
  return score_a != score_b ? score_a > score_b : id_a < id_b;
}

}  // namespace folio::index
