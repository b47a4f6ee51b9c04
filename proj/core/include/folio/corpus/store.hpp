#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "folio/corpus/types.hpp"

namespace folio::corpus {

// Raw (unprojected) image embedding kept so images can be re-projected after
// the projection model is retrained.
struct ImageVectorEntry {
  std::string doc_id;
  int page_no = 0;
  std::optional<std::string> label;  // empty for whole-page images
  std::string image_ref;
  std::string caption;
  std::vector<float> vector;

  bool operator==(const ImageVectorEntry&) const = default;
};

struct StoredDocument {
  std::string doc_id;
  std::string title;
  std::vector<PageRecord> pages;
  std::vector<ImageVectorEntry> image_vectors;
};

struct DocumentSummary {
  std::string doc_id;
  std::string title;
  std::size_t pages = 0;
};

// Thread-safe document store, keyed by doc_id.
class CorpusStore {
 public:
  bool contains(const std::string& doc_id) const;

  // Throws DuplicateDocId if doc_id is already present.
  void add(StoredDocument doc);

  bool remove(const std::string& doc_id);

  std::vector<DocumentSummary> list() const;
  std::optional<StoredDocument> get(const std::string& doc_id) const;
  std::optional<PageRecord> page(const std::string& doc_id, int page_no) const;
  std::vector<StoredDocument> snapshot() const;
  std::size_t size() const;

  // One JSON document per line. load() replaces the current contents; a
  // missing file loads as empty.
  void save(const std::filesystem::path& path) const;
  void load(const std::filesystem::path& path);

 private:
  mutable std::shared_mutex mu_;
  std::map<std::string, StoredDocument> docs_;
};

}  // namespace folio::corpus
