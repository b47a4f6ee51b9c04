#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "folio/rag/types.hpp"

namespace folio::rag {

struct EvidenceBlock {
  std::string tag;  // "[doc:page]" or "[doc:page:label]"
  std::string doc_id;
  int page_no = 0;
  index::RecordKind kind = index::RecordKind::TextChunk;
  std::optional<std::string> label;
  std::optional<std::string> chunk_id;
  std::string text;  // chunk text, or caption for image evidence
  std::optional<std::string> image_ref;
  float score = 0.0f;

  bool operator==(const EvidenceBlock&) const = default;
};

struct Prompt {
  std::string text;
  std::vector<EvidenceBlock> evidence;  // surviving blocks, in prompt order
  std::vector<std::string> images;      // attachment refs of surviving image evidence
  std::size_t history_turns = 0;        // turns that survived budgeting
  std::size_t units = 0;                // budgeted units actually used
  bool evidence_dropped = false;

  bool operator==(const Prompt&) const = default;
};

std::string evidence_tag(std::string_view doc_id, int page_no, const std::optional<std::string>& label);

// Text and image hits merged by score (ties by id), de-duplicated by chunk_id
// for text and by (doc, page, label) for images.
std::vector<EvidenceBlock> collect_evidence(const RetrievalResult& result);


struct PromptOptions {
  std::size_t budget_units = 3000;
  // Prefix for attachment refs; images are referenced through the server's
  // page-image endpoint, e.g. "http://host:8080".
  std::string image_base_url;
};

// Deterministic template: preamble, evidence in hit order, history, query.
// The budget covers the query, evidence and history in whitespace units (the
// fixed preamble is not counted). History is trimmed oldest first, then
// evidence lowest score first. Throws BudgetTooSmall when the query alone
// exceeds the budget.
Prompt assemble_prompt(std::string_view query, const RetrievalResult& result, std::span<const Turn> history,
                       const PromptOptions& opts);

std::string image_endpoint(std::string_view base_url, std::string_view doc_id, int page_no,
                           const std::optional<std::string>& label);

std::string url_encode(std::string_view s);

}  // namespace folio::rag
