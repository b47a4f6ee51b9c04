#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <vector>

#include "folio/embed/vector.hpp"
#include "folio/index/hnsw.hpp"
#include "folio/index/record.hpp"

namespace folio::index {

// Embedded multimodal vector store. Exact flat search over all live records,
// optional HNSW graph for approximate search, binary persistence.
//
// Many concurrent readers, one writer at a time: searches hold a shared lock
// and therefore see either all or none of a batch insert.
class VectorIndex {
 public:
  // dim == 0 lets the first insert fix the dimension.
  explicit VectorIndex(std::size_t dim = 0);

  VectorIndex(const VectorIndex&) = delete;
  VectorIndex& operator=(const VectorIndex&) = delete;

  // Returns the new id; ids start at 1 and strictly increase. Throws
  // DimMismatch, or InvalidArgument for a non-finite or non-unit vector.
  std::uint64_t insert(NewRecord record);

  // All-or-nothing: every record is validated before any is stored.
  std::vector<std::uint64_t> insert_batch(std::vector<NewRecord> records);

  // Tombstones the record; it disappears from results and is dropped on persist.
  bool remove(std::uint64_t id);
  std::size_t remove_if_doc(const std::string& doc_id);

  std::optional<IndexedRecord> get(std::uint64_t id) const;
  std::vector<IndexedRecord> records() const;

  std::size_t size() const;  // live records
  std::size_t dim() const;
  std::uint64_t next_id() const;

  // Exact top-k by cosine among live records passing the filter.
  std::vector<SearchHit> search_flat(std::span<const float> query, std::size_t k,
                                     const SearchFilter& filter = {}) const;
  std::vector<SearchHit> search_flat(const embed::EmbeddingVector& query, std::size_t k,
                                     const SearchFilter& filter = {}) const {
    return search_flat(query.values(), k, filter);
  }

  // Builds a graph over the current records; later inserts join it. Throws EmptyIndex.
  void build_hnsw(const HnswConfig& cfg = {});
  bool has_hnsw() const;
  void drop_hnsw();

  // Throws EmptyIndex when no graph has been built, EfTooSmall when the
  // effective ef (override or configured ef_search) is below k.
  std::vector<SearchHit> search_hnsw(std::span<const float> query, std::size_t k, const SearchFilter& filter = {},
                                     std::optional<std::size_t> ef = std::nullopt) const;

  // FRIX file; tombstoned records are compacted away. load() replaces the
  // contents and drops any graph. Throws Io or CorruptFile.
  void persist(const std::filesystem::path& path) const;
  void load(const std::filesystem::path& path);
  std::vector<std::uint8_t> serialize() const;
  void deserialize(std::span<const std::uint8_t> bytes);

  void clear();

 private:
  void check_vector(std::span<const float> v, std::size_t expected_dim) const;
  std::uint64_t append_locked(NewRecord&& r);
  SearchHit make_hit(std::uint32_t slot, float score) const;
  VectorView view() const noexcept { return {vectors_.data(), dim_}; }

  mutable std::shared_mutex mu_;
  std::size_t dim_ = 0;
  std::uint64_t next_id_ = 1;
  std::vector<float> vectors_;  // slot-major
  std::vector<IndexedRecord> meta_;  // vector field left empty; see vectors_
  std::vector<char> deleted_;
  std::size_t live_ = 0;
  std::unique_ptr<HnswGraph> graph_;
};

}  // namespace folio::index
