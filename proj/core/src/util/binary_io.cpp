#include "folio/util/binary_io.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "folio/error.hpp"

namespace folio::io {

namespace {
template <typename T>
void put_le(std::vector<std::uint8_t>& buf, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

template <typename T>
T get_le(std::span<const std::uint8_t> s) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(s[i]) << (8 * i);
  return v;
}
}  // namespace

void ByteWriter::u16(std::uint16_t v) { put_le(buf_, v); }
void ByteWriter::u32(std::uint32_t v) { put_le(buf_, v); }
void ByteWriter::u64(std::uint64_t v) { put_le(buf_, v); }
void ByteWriter::f32(float v) { put_le(buf_, std::bit_cast<std::uint32_t>(v)); }
void ByteWriter::f64(double v) { put_le(buf_, std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::bytes(std::span<const std::uint8_t> data) {
  buf_.insert(buf_.end(), data.begin(), data.end());
}

void ByteWriter::str(std::string_view s) {
  buf_.insert(buf_.end(), s.begin(), s.end());
}

void ByteReader::require(std::size_t n, const char* what) const {
  if (remaining() < n) {
    throw CorruptFile(pos_, std::string("truncated while reading ") + what);
  }
}

std::uint8_t ByteReader::u8() {
  require(1, "u8");
  return data_[pos_++];
}

std::uint16_t ByteReader::u16() {
  require(2, "u16");
  auto v = get_le<std::uint16_t>(data_.subspan(pos_, 2));
  pos_ += 2;
  return v;
}

std::uint32_t ByteReader::u32() {
  require(4, "u32");
  auto v = get_le<std::uint32_t>(data_.subspan(pos_, 4));
  pos_ += 4;
  return v;
}

std::uint64_t ByteReader::u64() {
  require(8, "u64");
  auto v = get_le<std::uint64_t>(data_.subspan(pos_, 8));
  pos_ += 8;
  return v;
}

float ByteReader::f32() { return std::bit_cast<float>(u32()); }
double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::span<const std::uint8_t> ByteReader::take(std::size_t n) {
  require(n, "byte run");
  auto s = data_.subspan(pos_, n);
  pos_ += n;
  return s;
}

std::string ByteReader::str(std::size_t n) {
  auto s = take(n);
  return std::string(reinterpret_cast<const char*>(s.data()), s.size());
}

std::uint32_t crc32(std::span<const std::uint8_t> data) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in blocks for very large buffers.
  std::size_t pos = 0;
  while (pos < data.size()) {
    const std::size_t n = std::min<std::size_t>(data.size() - pos, 1u << 30);
    crc = ::crc32(crc, data.data() + pos, static_cast<uInt>(n));
    pos += n;
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(Errc::Io, "read failed: " + path.string());
  return data;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) throw Error(Errc::Io, "write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::Io, "rename failed: " + path.string() + ": " + ec.message());
}

}  // namespace folio::io
