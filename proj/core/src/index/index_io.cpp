#include <mutex>
#include <nlohmann/json.hpp>

#include "folio/error.hpp"
#include "folio/index/vector_index.hpp"
#include "folio/util/binary_io.hpp"

namespace folio::index {

namespace {

constexpr char kMagic[4] = {'F', 'R', 'I', 'X'};
constexpr std::uint16_t kVersion = 1;

nlohmann::json payload_json(const Payload& p) {
  nlohmann::json j{{"doc_id", p.doc_id}, {"page_no", p.page_no}};
  if (p.chunk_id) j["chunk_id"] = *p.chunk_id;
  if (p.label) j["label"] = *p.label;
  if (p.text) j["text"] = *p.text;
  if (p.image_ref) j["image_ref"] = *p.image_ref;
  return j;
}

std::optional<std::string> opt_string(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

Payload parse_payload(std::string_view text, std::size_t offset) {
  try {
    const auto j = nlohmann::json::parse(text);
    Payload p;
    p.doc_id = j.at("doc_id").get<std::string>();
    p.page_no = j.at("page_no").get<int>();
    p.chunk_id = opt_string(j, "chunk_id");
    p.label = opt_string(j, "label");
    p.text = opt_string(j, "text");
    p.image_ref = opt_string(j, "image_ref");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFile(offset, std::string("bad payload: ") + e.what());
  }
}

}  // namespace

std::vector<std::uint8_t> VectorIndex::serialize() const {
  std::shared_lock lock(mu_);
  io::ByteWriter w;
  w.str(std::string_view(kMagic, 4));
  w.u16(kVersion);
  w.u32(static_cast<std::uint32_t>(dim_));
  w.u64(live_);
  w.u32(0);
  for (std::size_t s = 0; s < meta_.size(); ++s) {
    if (deleted_[s]) continue;
    w.u64(meta_[s].id);
    w.u8(static_cast<std::uint8_t>(meta_[s].space));
    w.u8(static_cast<std::uint8_t>(meta_[s].kind));
    for (std::size_t i = 0; i < dim_; ++i) w.f32(vectors_[s * dim_ + i]);
  }
  for (std::size_t s = 0; s < meta_.size(); ++s) {
    if (deleted_[s]) continue;
    const auto text = payload_json(meta_[s].payload).dump();
    w.u32(static_cast<std::uint32_t>(text.size()));
    w.str(text);
  }
  w.u32(io::crc32(w.data()));
  return std::move(w.data());
}

void VectorIndex::deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 + 2 + 4 + 8 + 4 + 4) throw CorruptFile(bytes.size(), "file too short for an index header");
  io::ByteReader r(bytes);
  if (r.str(4) != std::string_view(kMagic, 4)) throw CorruptFile(0, "bad magic, expected FRIX");

  const std::size_t body = bytes.size() - 4;
  io::ByteReader tail(bytes.subspan(body));
  if (tail.u32() != io::crc32(bytes.first(body))) throw CorruptFile(body, "checksum mismatch");

  const auto version_at = r.offset();
  if (r.u16() != kVersion) throw CorruptFile(version_at, "unsupported index version");
  const std::size_t dim = r.u32();
  const std::uint64_t count = r.u64();
  r.u32();  // flags
  const std::size_t record_bytes = 8 + 1 + 1 + 4 * dim;
  if (count > 0 && (dim == 0 || count > r.remaining() / record_bytes)) {
    throw CorruptFile(r.offset(), "record count exceeds file size");
  }

  std::vector<float> vectors;
  vectors.reserve(count * dim);
  std::vector<IndexedRecord> meta(count);
  std::uint64_t prev_id = 0;
  for (auto& m : meta) {
    const auto at = r.offset();
    m.id = r.u64();
    if (m.id <= prev_id) throw CorruptFile(at, "record ids are not strictly increasing");
    prev_id = m.id;
    const auto space = r.u8();
    const auto kind = r.u8();
    if (space > 1 || kind > 2) throw CorruptFile(at, "unknown record space or kind");
    m.space = static_cast<Space>(space);
    m.kind = static_cast<RecordKind>(kind);
    for (std::size_t i = 0; i < dim; ++i) vectors.push_back(r.f32());
  }
  for (auto& m : meta) {
    const auto at = r.offset();
    const auto len = r.u32();
    m.payload = parse_payload(r.str(len), at);
  }
  if (r.offset() != body) throw CorruptFile(r.offset(), "trailing bytes before checksum");

  std::unique_lock lock(mu_);
  dim_ = dim;
  next_id_ = prev_id + 1;
  vectors_ = std::move(vectors);
  meta_ = std::move(meta);
  deleted_.assign(meta_.size(), 0);
  live_ = meta_.size();
  graph_.reset();
}

void VectorIndex::persist(const std::filesystem::path& path) const { io::write_file_atomic(path, serialize()); }

void VectorIndex::load(const std::filesystem::path& path) { deserialize(io::read_file(path)); }

}  // namespace folio::index
