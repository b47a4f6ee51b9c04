#include "folio/rag/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <set>
#include <tuple>

#include "folio/error.hpp"
#include "folio/util/text.hpp"

namespace folio::rag {

namespace {

constexpr std::string_view kPreamble =
    "You answer questions about the indexed documents. Use only the evidence below and cite the "
    "bracketed tags you rely on. Image evidence is attached by reference.\n";

bool is_image(index::RecordKind k) { return k != index::RecordKind::TextChunk; }

std::string render_block(const EvidenceBlock& b, const PromptOptions& opts) {
  std::string line = b.tag;
  if (is_image(b.kind)) {
    line += " (image: " + image_endpoint(opts.image_base_url, b.doc_id, b.page_no, b.label) + ")";
  }
  if (!b.text.empty()) line += " " + b.text;
  return line;
}

std::string render_turn(const Turn& t) { return std::string(to_string(t.role)) + ": " + t.text; }

}  // namespace

std::string_view to_string(Role r) noexcept { return r == Role::User ? "User" : "Assistant"; }

std::string evidence_tag(std::string_view doc_id, int page_no, const std::optional<std::string>& label) {
  std::string tag = "[" + std::string(doc_id) + ":" + std::to_string(page_no);
  if (label) tag += ":" + *label;
  return tag + "]";
}

std::string url_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 15];
    }
  }
  return out;
}

std::string image_endpoint(std::string_view base_url, std::string_view doc_id, int page_no,
                           const std::optional<std::string>& label) {
  std::string url = std::string(base_url) + "/v1/pages/" + url_encode(doc_id) + "/" + std::to_string(page_no) +
                    "/image";
  if (label) url += "?label=" + url_encode(*label);
  return url;
}

std::vector<EvidenceBlock> collect_evidence(const RetrievalResult& result) {
  std::vector<const index::SearchHit*> hits;
  for (const auto& h : result.text_hits) hits.push_back(&h);
  for (const auto& h : result.image_hits) hits.push_back(&h);
  std::stable_sort(hits.begin(), hits.end(), [](const auto* a, const auto* b) {
    return index::hit_before(a->score, a->id, b->score, b->id);
  });

  std::set<std::string> seen_chunks;
  std::set<std::tuple<std::string, int, std::string>> seen_images;
  std::vector<EvidenceBlock> blocks;
  for (const auto* h : hits) {
    const auto& p = h->payload;
    if (!is_image(h->kind)) {
      const std::string key = p.chunk_id.value_or("#" + std::to_string(h->id));
      if (!seen_chunks.insert(key).second) continue;
    } else if (!seen_images.insert({p.doc_id, p.page_no, p.label.value_or("")}).second) {
      continue;
    }
    EvidenceBlock b;
    b.doc_id = p.doc_id;
    b.page_no = p.page_no;
    b.kind = h->kind;
    b.label = p.label;
    b.chunk_id = p.chunk_id;
    b.text = p.text.value_or("");
    b.image_ref = p.image_ref;
    b.score = h->score;
    b.tag = evidence_tag(b.doc_id, b.page_no, b.label);
    blocks.push_back(std::move(b));
  }
  return blocks;
}

Prompt assemble_prompt(std::string_view query, const RetrievalResult& result, std::span<const Turn> history,
                       const PromptOptions& opts) {
  const std::size_t query_units = text::count_units(query);
  if (query_units > opts.budget_units) {
    throw Error(Errc::BudgetTooSmall, "query needs " + std::to_string(query_units) + " units, budget is " +
                                          std::to_string(opts.budget_units));
  }

  auto blocks = collect_evidence(result);
  std::vector<std::string> lines;
  std::vector<std::size_t> block_units;
  for (const auto& b : blocks) {
    lines.push_back(render_block(b, opts));
    block_units.push_back(text::count_units(lines.back()));
  }
  std::deque<std::size_t> turns;
  std::size_t total = query_units;
  for (std::size_t i = 0; i < history.size(); ++i) {
    turns.push_back(i);
    total += text::count_units(render_turn(history[i]));
  }
  for (auto u : block_units) total += u;

  while (total > opts.budget_units && !turns.empty()) {
    total -= text::count_units(render_turn(history[turns.front()]));
    turns.pop_front();
  }
  bool dropped = false;
  // Blocks are in descending score order, so the lowest-scored is always last.
  while (total > opts.budget_units && !blocks.empty()) {
    total -= block_units.back();
    blocks.pop_back();
    lines.pop_back();
    block_units.pop_back();
    dropped = true;
  }

  Prompt p;
  p.text = std::string(kPreamble);
  if (!blocks.empty()) {
    p.text += "\nEvidence:\n";
    for (const auto& line : lines) p.text += line + "\n";
  }
  if (!turns.empty()) {
    p.text += "\nConversation:\n";
    for (auto i : turns) p.text += render_turn(history[i]) + "\n";
  }
  p.text += "\nQuestion: " + std::string(query) + "\n";
  for (const auto& b : blocks) {
    if (is_image(b.kind)) p.images.push_back(image_endpoint(opts.image_base_url, b.doc_id, b.page_no, b.label));
  }
  p.evidence = std::move(blocks);
  p.history_turns = turns.size();
  p.units = total;
  p.evidence_dropped = dropped;
  return p;
}

}  // namespace folio::rag
