#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "folio/index/record.hpp"

namespace folio::rag {

struct RetrievalResult {
  std::vector<index::SearchHit> text_hits;
  std::vector<index::SearchHit> image_hits;
  std::vector<float> query_vector;
};

struct Citation {
  std::string doc_id;
  int page_no = 0;
  index::RecordKind kind = index::RecordKind::TextChunk;
  std::optional<std::string> label;
  // Display extras for clients; not part of the identity of a citation.
  float score = 0.0f;
  std::string snippet;

  bool operator==(const Citation&) const = default;
};

enum class Role { User, Assistant };

std::string_view to_string(Role r) noexcept;

struct Turn {
  Role role = Role::User;
  std::string text;
  std::vector<Citation> citations;
  std::int64_t timestamp_ms = 0;  // unix epoch

  bool operator==(const Turn&) const = default;
};

}  // namespace folio::rag
