#include "folio/embed/stub.hpp"

#include <cctype>
#include <string>
#include <vector>

#include "folio/error.hpp"
#include "folio/util/text.hpp"

namespace folio::embed {

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t splitmix64_next(std::uint64_t& state) noexcept {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

void accumulate_stub(std::span<const std::uint8_t> bytes, std::uint64_t seed, std::vector<double>& acc) {
  std::uint64_t state = fnv1a64(bytes) ^ seed;
  for (double& a : acc) {
    const std::uint64_t u = splitmix64_next(state);
    a += static_cast<double>(u >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  }
}

std::span<const std::uint8_t> as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

std::string normalize_token(std::string_view tok) {
  std::size_t b = 0;
  std::size_t e = tok.size();
  auto punct = [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return u < 0x80 && std::ispunct(u);
  };
  while (b < e && punct(tok[b])) ++b;
  while (e > b && punct(tok[e - 1])) --e;
  return text::to_lower_ascii(tok.substr(b, e - b));
}

}  // namespace

EmbeddingVector stub_embed(std::span<const std::uint8_t> bytes, std::size_t dim, std::uint64_t seed,
                           Modality modality) {
  if (dim == 0) throw Error(Errc::InvalidArgument, "stub_embed requires dim >= 1");
  std::vector<double> raw(dim, 0.0);
  accumulate_stub(bytes, seed, raw);
  return EmbeddingVector::normalize(std::span<const double>(raw), modality);
}

EmbeddingVector stub_embed(std::string_view bytes, std::size_t dim, std::uint64_t seed, Modality modality) {
  return stub_embed(as_bytes(bytes), dim, seed, modality);
}

EmbeddingVector stub_embed_text(std::string_view text_in, std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw Error(Errc::InvalidArgument, "stub_embed requires dim >= 1");
  std::vector<double> acc(dim, 0.0);
  bool any = false;
  for (auto tok : text::split_whitespace(text_in)) {
    const std::string norm = normalize_token(tok);
    if (norm.empty()) continue;
    accumulate_stub(as_bytes(norm), seed, acc);
    any = true;
  }
  if (!any) return stub_embed(as_bytes(text_in), dim, seed, Modality::Text);
  try {
    return EmbeddingVector::normalize(std::span<const double>(acc), Modality::Text);
  } catch (const Error&) {
    // Token vectors cancelled exactly; astronomically unlikely, but stay total.
    return stub_embed(as_bytes(text_in), dim, seed, Modality::Text);
  }
}

}  // namespace folio::embed
