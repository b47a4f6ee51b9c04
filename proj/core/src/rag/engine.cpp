#include "folio/rag/engine.hpp"

#include <chrono>
#include <filesystem>

#include "folio/align/model_io.hpp"
#include "folio/corpus/ingest.hpp"
#include "folio/corpus/manifest.hpp"
#include "folio/error.hpp"
#include "folio/util/text.hpp"

namespace folio::rag {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kSnippetUnits = 30;

std::int64_t now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

bool local_file(const std::string& ref) {
  std::error_code ec;
  return !corpus::is_url(ref) && fs::is_regular_file(ref, ec);
}

std::string snippet(std::string_view text) {
  auto units = text::split_whitespace(text);
  if (units.size() > kSnippetUnits) units.resize(kSnippetUnits);
  return text::join(units);
}

index::SearchFilter kind_filter(std::vector<index::RecordKind> kinds) {
  index::SearchFilter f;
  f.kinds = std::move(kinds);
  return f;
}

}  // namespace

Engine::Engine(EngineConfig cfg) : Engine(std::move(cfg), nullptr, nullptr, nullptr) {}

Engine::Engine(EngineConfig cfg, std::unique_ptr<embed::Embedder> text, std::unique_ptr<embed::Embedder> image,
               std::unique_ptr<Generator> generator)
    : cfg_(std::move(cfg)),
      text_embedder_(std::move(text)),
      image_embedder_(std::move(image)),
      generator_(std::move(generator)),
      index_(std::make_shared<index::VectorIndex>()) {
  cfg_.text_embedder.modality = embed::Modality::Text;
  cfg_.image_embedder.modality = embed::Modality::Image;
  if (!text_embedder_) text_embedder_ = embed::make_embedder(cfg_.text_embedder);
  if (!image_embedder_) image_embedder_ = embed::make_embedder(cfg_.image_embedder);
  if (!generator_) generator_ = make_generator(cfg_.generator);
  index::validate(cfg_.hnsw);

  const std::size_t d_img = image_embedder_->config().dim;
  const std::size_t d_txt = text_embedder_->config().dim;
  projection_ = align::make_lora_model(align::default_base_matrix(d_img, d_txt, cfg_.seed), cfg_.projection_rank, 0.0,
                                       cfg_.seed);
  projection_w_ = align::lora_merge(projection_);
  load();
}

void Engine::load() {
  if (cfg_.data_dir.empty()) return;
  const auto proj_path = cfg_.data_dir / kProjectionFile;
  if (fs::exists(proj_path)) {
    auto m = align::load_model(proj_path);
    if (m.d_img() != projection_.d_img() || m.d_txt() != projection_.d_txt()) {
      throw Error(Errc::DimMismatch, "stored projection does not match the configured embedder dims");
    }
    projection_w_ = align::lora_merge(m);
    projection_ = std::move(m);
  }
  corpus_.load(cfg_.data_dir / kCorpusFile);
  const auto index_path = cfg_.data_dir / kIndexFile;
  if (fs::exists(index_path)) {
    index_->load(index_path);
    maybe_build_graph(*index_);
  }
}

void Engine::save() const {
  if (cfg_.data_dir.empty()) return;
  fs::create_directories(cfg_.data_dir);
  corpus_.save(cfg_.data_dir / kCorpusFile);
  std::shared_lock lock(state_mu_);
  index_->persist(cfg_.data_dir / kIndexFile);
  align::save_model(projection_, cfg_.data_dir / kProjectionFile);
}

void Engine::maybe_build_graph(index::VectorIndex& idx) const {
  if (cfg_.hnsw_auto_threshold > 0 && !idx.has_hnsw() && idx.size() >= cfg_.hnsw_auto_threshold) {
    idx.build_hnsw(cfg_.hnsw);
  }
}

std::vector<index::NewRecord> Engine::image_records(const std::vector<corpus::ImageVectorEntry>& entries,
                                                    const align::Matrix& w) const {
  std::vector<index::NewRecord> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    const std::vector<double> raw(e.vector.begin(), e.vector.end());
    const auto y = align::project_with(raw, w);
    index::NewRecord r;
    r.vector.assign(y.begin(), y.end());
    r.space = index::Space::ImageSpaceProjected;
    r.kind = e.label ? index::RecordKind::FigureImage : index::RecordKind::PageImage;
    r.payload.doc_id = e.doc_id;
    r.payload.page_no = e.page_no;
    r.payload.label = e.label;
    if (!e.caption.empty()) r.payload.text = e.caption;
    r.payload.image_ref = e.image_ref;
    out.push_back(std::move(r));
  }
  return out;
}

IngestResult Engine::ingest(const corpus::DocumentBundle& bundle) {
  std::lock_guard write(write_mu_);
  if (corpus_.contains(bundle.doc_id)) {
    throw Error(Errc::DuplicateDocId, "document '" + bundle.doc_id + "' is already ingested");
  }
  auto pages = corpus::ingest_bundle(bundle, {cfg_.chunking, cfg_.require_images});

  std::vector<std::string> chunk_texts;
  std::vector<index::NewRecord> records;
  for (const auto& page : pages) {
    for (const auto& chunk : page.chunks) {
      chunk_texts.push_back(chunk.text);
      index::NewRecord r;
      r.kind = index::RecordKind::TextChunk;
      r.space = index::Space::TextSpace;
      r.payload.doc_id = page.doc_id;
      r.payload.page_no = page.page_no;
      r.payload.chunk_id = chunk.chunk_id;
      r.payload.text = chunk.text;
      records.push_back(std::move(r));
    }
  }
  const auto text_vectors = text_embedder_->embed_texts(chunk_texts);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto v = text_vectors[i].values();
    records[i].vector.assign(v.begin(), v.end());
  }
  const std::size_t text_count = records.size();

  corpus::StoredDocument doc{bundle.doc_id, bundle.title, pages, {}};
  std::vector<fs::path> image_paths;
  for (const auto& page : pages) {
    if (local_file(page.image_ref)) {
      doc.image_vectors.push_back({page.doc_id, page.page_no, std::nullopt, page.image_ref, "", {}});
      image_paths.emplace_back(page.image_ref);
    }
    for (const auto& fig : page.figures) {
      if (fig.image_ref && local_file(*fig.image_ref)) {
        doc.image_vectors.push_back({page.doc_id, page.page_no, fig.label, *fig.image_ref, fig.caption_clean, {}});
        image_paths.emplace_back(*fig.image_ref);
      }
    }
  }
  const auto image_vectors = image_embedder_->embed_images(image_paths);
  for (std::size_t i = 0; i < image_vectors.size(); ++i) {
    const auto v = image_vectors[i].values();
    doc.image_vectors[i].vector.assign(v.begin(), v.end());
  }

  std::shared_ptr<index::VectorIndex> idx;
  {
    std::shared_lock lock(state_mu_);
    auto projected = image_records(doc.image_vectors, projection_w_);
    for (auto& r : projected) records.push_back(std::move(r));
    idx = index_;
  }

  IngestResult result{bundle.doc_id, pages.size(), text_count, records.size() - text_count};
  corpus_.add(std::move(doc));
  try {
    idx->insert_batch(std::move(records));
  } catch (...) {
    corpus_.remove(bundle.doc_id);
    throw;
  }
  maybe_build_graph(*idx);
  save();
  return result;
}

bool Engine::remove_document(const std::string& doc_id) {
  std::lock_guard write(write_mu_);
  if (!corpus_.remove(doc_id)) return false;
  std::shared_ptr<index::VectorIndex> idx;
  {
    std::shared_lock lock(state_mu_);
    idx = index_;
  }
  idx->remove_if_doc(doc_id);
  save();
  return true;
}

std::vector<corpus::DocumentSummary> Engine::documents() const { return corpus_.list(); }

std::optional<corpus::StoredDocument> Engine::document(const std::string& doc_id) const { return corpus_.get(doc_id); }

bool Engine::has_page(const std::string& doc_id, int page_no) const {
  return corpus_.page(doc_id, page_no).has_value();
}

std::optional<ImageLocation> Engine::page_image(const std::string& doc_id, int page_no,
                                                const std::optional<std::string>& label) const {
  const auto page = corpus_.page(doc_id, page_no);
  if (!page) return std::nullopt;
  std::string ref;
  if (!label) {
    ref = page->image_ref;
  } else {
    for (const auto& fig : page->figures) {
      if (fig.label == *label && fig.image_ref) ref = *fig.image_ref;
    }
  }
  if (ref.empty()) return std::nullopt;
  return ImageLocation{ref, corpus::is_url(ref)};
}

std::shared_ptr<const index::VectorIndex> Engine::index() const {
  std::shared_lock lock(state_mu_);
  return index_;
}

RetrievalResult Engine::retrieve(std::string_view query, std::size_t k_text, std::size_t k_image) const {
  RetrievalResult out;
  const auto q = text_embedder_->embed_text(query);
  out.query_vector.assign(q.values().begin(), q.values().end());
  const auto idx = index();
  if (idx->size() == 0) return out;

  auto run = [&](std::size_t k, const index::SearchFilter& f) {
    if (k == 0) return std::vector<index::SearchHit>{};
    if (idx->has_hnsw()) {
      return idx->search_hnsw(q.values(), k, f, std::max(k, cfg_.hnsw.ef_search));
    }
    return idx->search_flat(q.values(), k, f);
  };
  out.text_hits = run(k_text, kind_filter({index::RecordKind::TextChunk}));
  out.image_hits = run(k_image, kind_filter({index::RecordKind::PageImage, index::RecordKind::FigureImage}));
  return out;
}

RetrievalResult Engine::retrieve(std::string_view query) const {
  return retrieve(query, cfg_.retrieval.k_text, cfg_.retrieval.k_image);
}

std::vector<index::SearchHit> Engine::search(std::string_view query, std::size_t k) const {
  const auto q = text_embedder_->embed_text(query);
  const auto idx = index();
  if (idx->size() == 0 || k == 0) return {};
  if (idx->has_hnsw()) return idx->search_hnsw(q.values(), k, {}, std::max(k, cfg_.hnsw.ef_search));
  return idx->search_flat(q.values(), k);
}

std::string Engine::create_session() { return sessions_.create()->id(); }

std::vector<Turn> Engine::session_turns(const std::string& session_id) const {
  return sessions_.get(session_id)->turns();
}

Prompt Engine::build_prompt(std::string_view query, const std::vector<Turn>& history) const {
  const auto result = retrieve(query);
  PromptOptions opts{cfg_.retrieval.budget_units, cfg_.retrieval.image_base_url};
  return assemble_prompt(query, result, history, opts);
}

Turn Engine::chat_answer(const std::string& session_id, std::string_view query) {
  auto session = sessions_.get(session_id);
  std::lock_guard exchange(session->exchange_mutex());

  const auto history = session->last(cfg_.retrieval.history_turns);
  session->append({Role::User, std::string(query), {}, now_ms()});
  Turn reply{Role::Assistant, {}, {}, 0};
  try {
    const auto prompt = build_prompt(query, history);
    reply.text = generator_->generate(prompt);
    for (const auto& b : prompt.evidence) {
      reply.citations.push_back({b.doc_id, b.page_no, b.kind, b.label, b.score, snippet(b.text)});
    }
  } catch (...) {
    session->pop_back();
    throw;
  }
  reply.timestamp_ms = now_ms();
  session->append(reply);
  return reply;
}

std::pair<Prompt, std::string> Engine::answer(std::string_view query) const {
  auto prompt = build_prompt(query, {});
  auto text = generator_->generate(prompt);
  return {std::move(prompt), std::move(text)};
}

const align::ProjectionModel& Engine::projection() const {
  std::shared_lock lock(state_mu_);
  return projection_;
}

void Engine::set_projection(align::ProjectionModel model) {
  align::validate(model);
  if (model.d_img() != image_embedder_->config().dim || model.d_txt() != text_embedder_->config().dim) {
    throw Error(Errc::DimMismatch, "projection is " + std::to_string(model.d_img()) + "x" +
                                       std::to_string(model.d_txt()) + ", embedders need " +
                                       std::to_string(image_embedder_->config().dim) + "x" +
                                       std::to_string(text_embedder_->config().dim));
  }
  {
    std::unique_lock lock(state_mu_);
    projection_w_ = align::lora_merge(model);
    projection_ = std::move(model);
  }
  reindex();
}

void Engine::reindex() {
  std::lock_guard write(write_mu_);
  auto fresh = std::make_shared<index::VectorIndex>();
  std::vector<index::NewRecord> records;
  for (const auto& r : index()->records()) {
    if (r.kind == index::RecordKind::TextChunk) records.push_back({r.vector, r.space, r.kind, r.payload});
  }
  {
    std::shared_lock lock(state_mu_);
    for (const auto& doc : corpus_.snapshot()) {
      for (auto& r : image_records(doc.image_vectors, projection_w_)) records.push_back(std::move(r));
    }
  }
  fresh->insert_batch(std::move(records));
  if (fresh->size() > 0) fresh->build_hnsw(cfg_.hnsw);
  {
    std::unique_lock lock(state_mu_);
    index_ = std::move(fresh);
  }
  save();
}

}  // namespace folio::rag
