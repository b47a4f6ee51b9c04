#include "folio/corpus/store.hpp"

#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>

#include "folio/error.hpp"
#include "folio/util/binary_io.hpp"

namespace folio::corpus {

using nlohmann::json;

namespace {

json opt_string(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

std::optional<std::string> read_opt(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

json page_to_json(const PageRecord& p) {
  json figs = json::array();
  for (const auto& f : p.figures) {
    figs.push_back({{"label", f.label},
                    {"caption_raw", f.caption_raw},
                    {"caption_clean", f.caption_clean},
                    {"image_ref", opt_string(f.image_ref)}});
  }
  json chunks = json::array();
  for (const auto& c : p.chunks) {
    chunks.push_back({{"chunk_id", c.chunk_id}, {"text", c.text}, {"span", {c.span.start, c.span.end}}});
  }
  return {{"doc_id", p.doc_id}, {"page_no", p.page_no}, {"image_ref", p.image_ref},
          {"text", p.text},     {"figures", figs},      {"chunks", chunks}};
}

PageRecord page_from_json(const json& j) {
  PageRecord p;
  p.doc_id = j.at("doc_id").get<std::string>();
  p.page_no = j.at("page_no").get<int>();
  p.image_ref = j.at("image_ref").get<std::string>();
  p.text = j.at("text").get<std::string>();
  for (const auto& f : j.at("figures")) {
    p.figures.push_back({f.at("label").get<std::string>(), f.at("caption_raw").get<std::string>(),
                         f.at("caption_clean").get<std::string>(), read_opt(f, "image_ref")});
  }
  for (const auto& c : j.at("chunks")) {
    p.chunks.push_back({c.at("chunk_id").get<std::string>(), c.at("text").get<std::string>(),
                        {c.at("span").at(0).get<std::size_t>(), c.at("span").at(1).get<std::size_t>()}});
  }
  return p;
}

}  // namespace

bool CorpusStore::contains(const std::string& doc_id) const {
  std::shared_lock lock(mu_);
  return docs_.contains(doc_id);
}

void CorpusStore::add(StoredDocument doc) {
  std::unique_lock lock(mu_);
  if (docs_.contains(doc.doc_id)) {
    throw Error(Errc::DuplicateDocId, "document \"" + doc.doc_id + "\" already exists");
  }
  auto id = doc.doc_id;
  docs_.emplace(std::move(id), std::move(doc));
}

bool CorpusStore::remove(const std::string& doc_id) {
  std::unique_lock lock(mu_);
  return docs_.erase(doc_id) > 0;
}

std::vector<DocumentSummary> CorpusStore::list() const {
  std::shared_lock lock(mu_);
  std::vector<DocumentSummary> out;
  for (const auto& [id, doc] : docs_) out.push_back({id, doc.title, doc.pages.size()});
  return out;
}

std::optional<StoredDocument> CorpusStore::get(const std::string& doc_id) const {
  std::shared_lock lock(mu_);
  auto it = docs_.find(doc_id);
  if (it == docs_.end()) return std::nullopt;
  return it->second;
}

std::optional<PageRecord> CorpusStore::page(const std::string& doc_id, int page_no) const {
  std::shared_lock lock(mu_);
  auto it = docs_.find(doc_id);
  if (it == docs_.end()) return std::nullopt;
  for (const auto& p : it->second.pages) {
    if (p.page_no == page_no) return p;
  }
  return std::nullopt;
}

std::vector<StoredDocument> CorpusStore::snapshot() const {
  std::shared_lock lock(mu_);
  std::vector<StoredDocument> out;
  for (const auto& [_, doc] : docs_) out.push_back(doc);
  return out;
}

std::size_t CorpusStore::size() const {
  std::shared_lock lock(mu_);
  return docs_.size();
}

void CorpusStore::save(const std::filesystem::path& path) const {
  std::string out;
  {
    std::shared_lock lock(mu_);
    for (const auto& [id, doc] : docs_) {
      json pages = json::array();
      for (const auto& p : doc.pages) pages.push_back(page_to_json(p));
      json images = json::array();
      for (const auto& iv : doc.image_vectors) {
        images.push_back({{"doc_id", iv.doc_id},
                          {"page_no", iv.page_no},
                          {"label", opt_string(iv.label)},
                          {"image_ref", iv.image_ref},
                          {"caption", iv.caption},
                          {"vector", iv.vector}});
      }
      out += json{{"doc_id", id}, {"title", doc.title}, {"pages", pages}, {"image_vectors", images}}.dump();
      out += '\n';
    }
  }
  io::write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(out.data()), out.size()));
}

void CorpusStore::load(const std::filesystem::path& path) {
  std::map<std::string, StoredDocument> docs;
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) {
    std::unique_lock lock(mu_);
    docs_.clear();
    return;
  }
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      StoredDocument doc;
      doc.doc_id = j.at("doc_id").get<std::string>();
      doc.title = j.at("title").get<std::string>();
      for (const auto& p : j.at("pages")) doc.pages.push_back(page_from_json(p));
      for (const auto& iv : j.at("image_vectors")) {
        doc.image_vectors.push_back({iv.at("doc_id").get<std::string>(), iv.at("page_no").get<int>(),
                                     read_opt(iv, "label"), iv.at("image_ref").get<std::string>(),
                                     iv.at("caption").get<std::string>(),
                                     iv.at("vector").get<std::vector<float>>()});
      }
      auto id = doc.doc_id;
      docs.emplace(std::move(id), std::move(doc));
    } catch (const json::exception& e) {
      throw CorruptFile(line_no, std::string("corpus store: ") + e.what());
    }
  }
  std::unique_lock lock(mu_);
  docs_ = std::move(docs);
}

}  // namespace folio::corpus
