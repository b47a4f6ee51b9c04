#include "folio/embed/provider.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>
#include <semaphore>

#include "folio/embed/stub.hpp"
#include "folio/error.hpp"
#include "folio/util/base64.hpp"
#include "folio/util/binary_io.hpp"
#include "folio/util/text.hpp"
#include "folio/util/url.hpp"

namespace folio::embed {

using nlohmann::json;

namespace {

class StubEmbedder final : public Embedder {
 public:
  using Embedder::Embedder;

 protected:
  std::vector<std::vector<double>> raw_texts(std::span<const std::string> texts) override {
    std::vector<std::vector<double>> out;
    for (const auto& t : texts) {
      auto v = stub_embed_text(t, config().dim, config().stub_seed);
      out.emplace_back(v.values().begin(), v.values().end());
    }
    return out;
  }

  std::vector<std::vector<double>> raw_images(std::span<const std::vector<std::uint8_t>> images) override {
    std::vector<std::vector<double>> out;
    for (const auto& bytes : images) {
      auto v = stub_embed(std::span<const std::uint8_t>(bytes), config().dim, config().stub_seed,
                          Modality::Image);
      out.emplace_back(v.values().begin(), v.values().end());
    }
    return out;
  }
};

class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(EmbedderConfig cfg)
      : Embedder(std::move(cfg)),
        url_(net::parse_url(*config().endpoint)),
        slots_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, config().max_in_flight))) {}

 protected:
  std::vector<std::vector<double>> raw_texts(std::span<const std::string> texts) override {
    json inputs = json::array();
    for (const auto& t : texts) inputs.push_back(t);
    return post(std::move(inputs));
  }

  std::vector<std::vector<double>> raw_images(std::span<const std::vector<std::uint8_t>> images) override {
    json inputs = json::array();
    for (const auto& bytes : images) inputs.push_back(base64_encode(bytes));
    return post(std::move(inputs));
  }

 private:
  std::vector<std::vector<double>> post(json inputs) {
    const std::size_t n = inputs.size();
    const json body{{"modality", std::string(to_string(config().modality))}, {"inputs", std::move(inputs)}};

    slots_.acquire();
    struct Release {
      std::counting_semaphore<>& s;
      ~Release() { s.release(); }
    } release{slots_};

    httplib::Client client(url_.origin);
    const auto timeout = std::chrono::milliseconds(config().timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    auto res = client.Post(url_.path, body.dump(), "application/json");
    if (!res) {
      throw Error(Errc::ProviderUnreachable,
                  "embedding provider " + *config().endpoint + " unreachable: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw Error(Errc::ProviderBadResponse, "embedding provider returned HTTP " + std::to_string(res->status));
    }
    std::vector<std::vector<double>> rows;
    try {
      const json reply = json::parse(res->body);
      rows = reply.at("vectors").get<std::vector<std::vector<double>>>();
    } catch (const json::exception& e) {
      throw Error(Errc::ProviderBadResponse, std::string("embedding provider sent malformed JSON: ") + e.what());
    }
    if (rows.size() != n) {
      throw Error(Errc::ProviderBadResponse, "embedding provider returned " + std::to_string(rows.size()) +
                                                 " vectors for " + std::to_string(n) + " inputs");
    }
    return rows;
  }

  net::ParsedUrl url_;
  std::counting_semaphore<> slots_;
};

}  // namespace

void validate(const EmbedderConfig& cfg) {
  if (cfg.dim == 0) throw Error(Errc::InvalidArgument, "embedder dim must be positive");
  if (cfg.provider_kind == ProviderKind::RemoteHttp && (!cfg.endpoint || cfg.endpoint->empty())) {
    throw Error(Errc::InvalidArgument, "remote embedder requires an endpoint");
  }
  if (cfg.timeout_ms <= 0) throw Error(Errc::InvalidArgument, "embedder timeout_ms must be positive");
}

Embedder::Embedder(EmbedderConfig cfg) : cfg_(std::move(cfg)) { validate(cfg_); }

std::vector<EmbeddingVector> Embedder::finish(std::vector<std::vector<double>> rows, std::size_t expected) {
  if (rows.size() != expected) {
    throw Error(Errc::ProviderBadResponse, "provider returned wrong number of vectors");
  }
  std::vector<EmbeddingVector> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    if (row.size() != cfg_.dim) {
      throw Error(Errc::ProviderBadResponse, "provider returned " + std::to_string(row.size()) +
                                                 " values, expected dim " + std::to_string(cfg_.dim));
    }
    out.push_back(EmbeddingVector::normalize(std::span<const double>(row), cfg_.modality));
  }
  return out;
}

std::vector<EmbeddingVector> Embedder::embed_texts(std::span<const std::string> texts) {
  for (const auto& t : texts) {
    if (text::trim(t).empty()) throw Error(Errc::EmptyInput, "cannot embed empty text");
  }
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  const std::size_t batch = std::max<std::size_t>(1, cfg_.batch_size);
  for (std::size_t i = 0; i < texts.size(); i += batch) {
    auto part = texts.subspan(i, std::min(batch, texts.size() - i));
    auto vecs = finish(raw_texts(part), part.size());
    std::move(vecs.begin(), vecs.end(), std::back_inserter(out));
  }
  return out;
}

std::vector<EmbeddingVector> Embedder::embed_images(std::span<const std::filesystem::path> images) {
  std::vector<std::vector<std::uint8_t>> blobs;
  blobs.reserve(images.size());
  for (const auto& p : images) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(p, ec)) throw Error(Errc::MissingImage, "missing image: " + p.string());
    try {
      blobs.push_back(io::read_file(p));
    } catch (const Error&) {
      throw Error(Errc::MissingImage, "unreadable image: " + p.string());
    }
  }
  std::vector<EmbeddingVector> out;
  out.reserve(images.size());
  const std::size_t batch = std::max<std::size_t>(1, cfg_.batch_size);
  for (std::size_t i = 0; i < blobs.size(); i += batch) {
    auto part = std::span<const std::vector<std::uint8_t>>(blobs).subspan(i, std::min(batch, blobs.size() - i));
    auto vecs = finish(raw_images(part), part.size());
    std::move(vecs.begin(), vecs.end(), std::back_inserter(out));
  }
  return out;
}

EmbeddingVector Embedder::embed_text(std::string_view text) {
  const std::string owned(text);
  return embed_texts(std::span<const std::string>(&owned, 1)).front();
}

EmbeddingVector Embedder::embed_image(const std::filesystem::path& image) {
  return embed_images(std::span<const std::filesystem::path>(&image, 1)).front();
}

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& cfg) {
  validate(cfg);
  if (cfg.provider_kind == ProviderKind::RemoteHttp) return std::make_unique<RemoteEmbedder>(cfg);
  return std::make_unique<StubEmbedder>(cfg);
}

EmbeddingVector embed_text(std::string_view text, const EmbedderConfig& cfg) {
  if (cfg.modality != Modality::Text) throw Error(Errc::InvalidArgument, "embed_text needs a text-modality config");
  return make_embedder(cfg)->embed_text(text);
}

EmbeddingVector embed_image(const std::filesystem::path& image, const EmbedderConfig& cfg) {
  if (cfg.modality != Modality::Image) {
    throw Error(Errc::InvalidArgument, "embed_image needs an image-modality config");
  }
  return make_embedder(cfg)->embed_image(image);
}

}  // namespace folio::embed
