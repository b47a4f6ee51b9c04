#include "folio/align/model_io.hpp"

#include "folio/error.hpp"
#include "folio/util/binary_io.hpp"

namespace folio::align {

namespace {
constexpr char kMagic[4] = {'F', 'R', 'W', 'P'};

void write_matrix(io::ByteWriter& w, const Matrix& m) {
  for (double v : m.data()) w.f32(static_cast<float>(v));
}

Matrix read_matrix(io::ByteReader& r, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = r.f32();
  return m;
}
}  // namespace

std::vector<std::uint8_t> serialize_model(const ProjectionModel& m) {
  validate(m);
  io::ByteWriter w;
  w.str(std::string_view(kMagic, 4));
  w.u16(kModelFormatVersion);
  w.u32(static_cast<std::uint32_t>(m.d_img()));
  w.u32(static_cast<std::uint32_t>(m.d_txt()));
  w.u32(static_cast<std::uint32_t>(m.rank()));
  w.f64(m.alpha);
  write_matrix(w, m.w0);
  write_matrix(w, m.b);
  write_matrix(w, m.a);
  return std::move(w.data());
}

ProjectionModel deserialize_model(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  if (r.str(4) != std::string_view(kMagic, 4)) throw CorruptFile(0, "bad magic, expected FRWP");
  const auto version_at = r.offset();
  if (r.u16() != kModelFormatVersion) throw CorruptFile(version_at, "unsupported model version");
  const std::size_t d_img = r.u32();
  const std::size_t d_txt = r.u32();
  const std::size_t rank = r.u32();
  ProjectionModel m;
  m.alpha = r.f64();
  const std::size_t need = 4 * (d_img * d_txt + d_img * rank + rank * d_txt);
  if (r.remaining() != need) {
    throw CorruptFile(r.offset(), "payload holds " + std::to_string(r.remaining()) + " bytes, expected " +
                                      std::to_string(need));
  }
  m.w0 = read_matrix(r, d_img, d_txt);
  m.b = read_matrix(r, d_img, rank);
  m.a = read_matrix(r, rank, d_txt);
  try {
    validate(m);
  } catch (const Error& e) {
    throw CorruptFile(0, e.what());
  }
  return m;
}

void save_model(const ProjectionModel& m, const std::filesystem::path& path) {
  io::write_file_atomic(path, serialize_model(m));
}

ProjectionModel load_model(const std::filesystem::path& path) { return deserialize_model(io::read_file(path)); }

}  // namespace folio::align
