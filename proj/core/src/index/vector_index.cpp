#include "folio/index/vector_index.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include "folio/error.hpp"

namespace folio::index {

std::string_view to_string(Space s) noexcept {
  return s == Space::TextSpace ? "text_space" : "image_space_projected";
}

std::string_view to_string(RecordKind k) noexcept {
  switch (k) {
    case RecordKind::TextChunk: return "text_chunk";
    case RecordKind::PageImage: return "page_image";
    case RecordKind::FigureImage: return "figure_image";
  }
  return "unknown";
}

std::optional<RecordKind> parse_record_kind(std::string_view s) noexcept {
  if (s == "text_chunk") return RecordKind::TextChunk;
  if (s == "page_image") return RecordKind::PageImage;
  if (s == "figure_image") return RecordKind::FigureImage;
  return std::nullopt;
}

bool SearchFilter::matches(RecordKind kind, Space sp, const std::string& doc) const {
  if (kinds && std::find(kinds->begin(), kinds->end(), kind) == kinds->end()) return false;
  if (space && *space != sp) return false;
  if (doc_id && *doc_id != doc) return false;
  return true;
}

VectorIndex::VectorIndex(std::size_t dim) : dim_(dim) {}

void VectorIndex::check_vector(std::span<const float> v, std::size_t expected_dim) const {
  if (expected_dim != 0 && v.size() != expected_dim) {
    throw Error(Errc::DimMismatch, "vector has dim " + std::to_string(v.size()) + ", index dim is " +
                                       std::to_string(expected_dim));
  }
  if (v.empty()) throw Error(Errc::DimMismatch, "vector has zero dimensions");
  double sq = 0.0;
  for (float x : v) {
    if (!std::isfinite(x)) throw Error(Errc::InvalidArgument, "vector contains non-finite values");
    sq += static_cast<double>(x) * x;
  }
  if (std::abs(std::sqrt(sq) - 1.0) > 1e-3) throw Error(Errc::InvalidArgument, "vector is not unit norm");
}

std::uint64_t VectorIndex::append_locked(NewRecord&& r) {
  if (dim_ == 0) dim_ = r.vector.size();
  const auto slot = static_cast<std::uint32_t>(meta_.size());
  vectors_.insert(vectors_.end(), r.vector.begin(), r.vector.end());
  IndexedRecord rec;
  rec.id = next_id_++;
  rec.space = r.space;
  rec.kind = r.kind;
  rec.payload = std::move(r.payload);
  meta_.push_back(std::move(rec));
  deleted_.push_back(0);
  ++live_;
  if (graph_) graph_->insert(slot, view());
  return meta_.back().id;
}

std::uint64_t VectorIndex::insert(NewRecord record) {
  std::unique_lock lock(mu_);
  check_vector(record.vector, dim_);
  return append_locked(std::move(record));
}

std::vector<std::uint64_t> VectorIndex::insert_batch(std::vector<NewRecord> records) {
  std::unique_lock lock(mu_);
  std::size_t dim = dim_;
  for (const auto& r : records) {
    check_vector(r.vector, dim);
    if (dim == 0) dim = r.vector.size();
  }
  std::vector<std::uint64_t> ids;
  ids.reserve(records.size());
  for (auto& r : records) ids.push_back(append_locked(std::move(r)));
  return ids;
}

bool VectorIndex::remove(std::uint64_t id) {
  std::unique_lock lock(mu_);
  auto it = std::lower_bound(meta_.begin(), meta_.end(), id,
                             [](const IndexedRecord& r, std::uint64_t v) { return r.id < v; });
  if (it == meta_.end() || it->id != id) return false;
  const auto slot = static_cast<std::size_t>(it - meta_.begin());
  if (deleted_[slot]) return false;
  deleted_[slot] = 1;
  --live_;
  return true;
}

std::size_t VectorIndex::remove_if_doc(const std::string& doc_id) {
  std::unique_lock lock(mu_);
  std::size_t n = 0;
  for (std::size_t s = 0; s < meta_.size(); ++s) {
    if (!deleted_[s] && meta_[s].payload.doc_id == doc_id) {
      deleted_[s] = 1;
      --live_;
      ++n;
    }
  }
  return n;
}

std::optional<IndexedRecord> VectorIndex::get(std::uint64_t id) const {
  std::shared_lock lock(mu_);
  auto it = std::lower_bound(meta_.begin(), meta_.end(), id,
                             [](const IndexedRecord& r, std::uint64_t v) { return r.id < v; });
  if (it == meta_.end() || it->id != id) return std::nullopt;
  const auto slot = static_cast<std::size_t>(it - meta_.begin());
  if (deleted_[slot]) return std::nullopt;
  IndexedRecord out = *it;
  out.vector.assign(vectors_.begin() + static_cast<std::ptrdiff_t>(slot * dim_),
                    vectors_.begin() + static_cast<std::ptrdiff_t>((slot + 1) * dim_));
  return out;
}

std::vector<IndexedRecord> VectorIndex::records() const {
  std::shared_lock lock(mu_);
  std::vector<IndexedRecord> out;
  out.reserve(live_);
  for (std::size_t s = 0; s < meta_.size(); ++s) {
    if (deleted_[s]) continue;
    IndexedRecord r = meta_[s];
    r.vector.assign(vectors_.begin() + static_cast<std::ptrdiff_t>(s * dim_),
                    vectors_.begin() + static_cast<std::ptrdiff_t>((s + 1) * dim_));
    out.push_back(std::move(r));
  }
  return out;
}

std::size_t VectorIndex::size() const {
  std::shared_lock lock(mu_);
  return live_;
}

std::size_t VectorIndex::dim() const {
  std::shared_lock lock(mu_);
  return dim_;
}

std::uint64_t VectorIndex::next_id() const {
  std::shared_lock lock(mu_);
  return next_id_;
}

SearchHit VectorIndex::make_hit(std::uint32_t slot, float score) const {
  const auto& m = meta_[slot];
  return {m.id, score, m.kind, m.space, m.payload};
}

std::vector<SearchHit> VectorIndex::search_flat(std::span<const float> query, std::size_t k,
                                                const SearchFilter& filter) const {
  std::shared_lock lock(mu_);
  if (k == 0 || live_ == 0) return {};
  if (query.size() != dim_) {
    throw Error(Errc::DimMismatch, "query has dim " + std::to_string(query.size()) + ", index dim is " +
                                       std::to_string(dim_));
  }
  std::vector<std::pair<float, std::uint32_t>> scored;
  scored.reserve(live_);
  for (std::size_t s = 0; s < meta_.size(); ++s) {
    if (deleted_[s] || !filter.matches(meta_[s])) continue;
    scored.emplace_back(dot_similarity(query.data(), vectors_.data() + s * dim_, dim_), static_cast<std::uint32_t>(s));
  }
  // Slots are in id order, so comparing slots breaks ties by ascending id.
  auto better = [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; };
  const std::size_t n = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), better);
  std::vector<SearchHit> hits;
  hits.reserve(n);
  for (std::size_t i = 0; i < n; ++i) hits.push_back(make_hit(scored[i].second, scored[i].first));
  return hits;
}

void VectorIndex::build_hnsw(const HnswConfig& cfg) {
  validate(cfg);
  std::unique_lock lock(mu_);
  if (live_ == 0) throw Error(Errc::EmptyIndex, "cannot build HNSW over an empty index");
  auto graph = std::make_unique<HnswGraph>(cfg);
  for (std::size_t s = 0; s < meta_.size(); ++s) graph->insert(static_cast<std::uint32_t>(s), view());
  graph_ = std::move(graph);
}

bool VectorIndex::has_hnsw() const {
  std::shared_lock lock(mu_);
  return graph_ != nullptr;
}

void VectorIndex::drop_hnsw() {
  std::unique_lock lock(mu_);
  graph_.reset();
}

std::vector<SearchHit> VectorIndex::search_hnsw(std::span<const float> query, std::size_t k,
                                                const SearchFilter& filter, std::optional<std::size_t> ef) const {
  std::shared_lock lock(mu_);
  if (!graph_ || live_ == 0) throw Error(Errc::EmptyIndex, "no HNSW graph has been built");
  const std::size_t effective_ef = ef.value_or(graph_->config().ef_search);
  if (effective_ef < k) {
    throw Error(Errc::EfTooSmall, "ef " + std::to_string(effective_ef) + " is smaller than k " + std::to_string(k));
  }
  if (k == 0) return {};
  if (query.size() != dim_) {
    throw Error(Errc::DimMismatch, "query has dim " + std::to_string(query.size()) + ", index dim is " +
                                       std::to_string(dim_));
  }
  const std::function<bool(std::uint32_t)> accept = [&](std::uint32_t slot) {
    return !deleted_[slot] && filter.matches(meta_[slot]);
  };
  auto found = graph_->search(query.data(), view(), effective_ef, accept);
  if (found.size() > k) found.resize(k);
  std::vector<SearchHit> hits;
  hits.reserve(found.size());
  for (const auto& [score, slot] : found) hits.push_back(make_hit(slot, score));
  return hits;
}

void VectorIndex::clear() {
  std::unique_lock lock(mu_);
  dim_ = 0;
  next_id_ = 1;
  vectors_.clear();
  meta_.clear();
  deleted_.clear();
  live_ = 0;
  graph_.reset();
}

}  // namespace folio::index
