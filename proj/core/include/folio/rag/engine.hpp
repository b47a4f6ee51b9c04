#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "folio/align/projection.hpp"
#include "folio/corpus/chunking.hpp"
#include "folio/corpus/store.hpp"
#include "folio/embed/provider.hpp"
#include "folio/index/vector_index.hpp"
#include "folio/rag/generator.hpp"
#include "folio/rag/prompt.hpp"
#include "folio/rag/session.hpp"

namespace folio::rag {

struct RetrievalSettings {
  std::size_t k_text = 5;
  std::size_t k_image = 2;
  std::size_t history_turns = 6;
  std::size_t budget_units = 3000;
  std::string image_base_url;
};

struct EngineConfig {
  std::filesystem::path data_dir;  // empty keeps everything in memory
  embed::EmbedderConfig text_embedder;   // modality is forced to Text
  embed::EmbedderConfig image_embedder;  // modality is forced to Image
  GenerationBackendConfig generator;
  RetrievalSettings retrieval;
  index::HnswConfig hnsw;
  // Build the graph automatically once the index holds this many records; 0 never.
  std::size_t hnsw_auto_threshold = 2000;
  corpus::ChunkingOptions chunking;
  bool require_images = true;
  std::size_t projection_rank = 8;
  std::uint64_t seed = 0;
};

struct IngestResult {
  std::string doc_id;
  std::size_t pages = 0;
  std::size_t text_records = 0;
  std::size_t image_records = 0;
};

struct ImageLocation {
  std::string image_ref;  // local path or URL
  bool is_url = false;
};

// Retrieval-augmented chat over an ingested corpus. Image embeddings are
// projected into text space at index time, so one text query vector serves
// both text and image retrieval.
class Engine {
 public:
  explicit Engine(EngineConfig cfg);
  // Null components are built from cfg.
  Engine(EngineConfig cfg, std::unique_ptr<embed::Embedder> text, std::unique_ptr<embed::Embedder> image,
         std::unique_ptr<Generator> generator);

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  const EngineConfig& config() const noexcept { return cfg_; }

  // All pages or nothing: on any failure the corpus and index are unchanged.
  // Throws MalformedManifest, DuplicateDocId, MissingImage, ProviderUnreachable.
  IngestResult ingest(const corpus::DocumentBundle& bundle);
  bool remove_document(const std::string& doc_id);

  std::vector<corpus::DocumentSummary> documents() const;
  std::optional<corpus::StoredDocument> document(const std::string& doc_id) const;
  bool has_page(const std::string& doc_id, int page_no) const;
  std::optional<ImageLocation> page_image(const std::string& doc_id, int page_no,
                                          const std::optional<std::string>& label = std::nullopt) const;

  // Embeds the query once; text hits over TextChunk, image hits over page and
  // figure images.
  RetrievalResult retrieve(std::string_view query, std::size_t k_text, std::size_t k_image) const;
  RetrievalResult retrieve(std::string_view query) const;

  // Top-k over every record kind.
  std::vector<index::SearchHit> search(std::string_view query, std::size_t k) const;

  std::string create_session();
  std::vector<Turn> session_turns(const std::string& session_id) const;

  // Appends the user turn and the assistant reply. On failure the session is
  // left as it was. Throws SessionNotFound, ProviderUnreachable.
  Turn chat_answer(const std::string& session_id, std::string_view query);

  // Single question without a session; returns the prompt used and the answer.
  std::pair<Prompt, std::string> answer(std::string_view query) const;

  const align::ProjectionModel& projection() const;
  // Re-projects every stored image into the index. Throws DimMismatch.
  void set_projection(align::ProjectionModel model);

  // Rebuilds the index from the corpus (re-projecting images) and the HNSW graph.
  void reindex();

  std::shared_ptr<const index::VectorIndex> index() const;
  const corpus::CorpusStore& corpus() const noexcept { return corpus_; }

  // Writes corpus, index and projection under data_dir; no-op without one.
  void save() const;

  static constexpr const char* kCorpusFile = "corpus.jsonl";
  static constexpr const char* kIndexFile = "index.frix";
  static constexpr const char* kProjectionFile = "projection.frwp";

 private:
  void load();
  std::vector<index::NewRecord> image_records(const std::vector<corpus::ImageVectorEntry>& entries,
                                              const align::Matrix& w) const;
  void maybe_build_graph(index::VectorIndex& idx) const;
  Prompt build_prompt(std::string_view query, const std::vector<Turn>& history) const;

  EngineConfig cfg_;
  std::unique_ptr<embed::Embedder> text_embedder_;
  std::unique_ptr<embed::Embedder> image_embedder_;
  std::unique_ptr<Generator> generator_;

  corpus::CorpusStore corpus_;
  SessionRegistry sessions_;

  mutable std::shared_mutex state_mu_;  // guards index_ pointer and projection_
  std::shared_ptr<index::VectorIndex> index_;
  align::ProjectionModel projection_;
  align::Matrix projection_w_;

  std::mutex write_mu_;  // one ingest / reindex at a time
};

}  // namespace folio::rag
