#include "folio/rag/generator.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>

#include "folio/error.hpp"
#include "folio/util/text.hpp"
#include "folio/util/url.hpp"

namespace folio::rag {

using nlohmann::json;

namespace {

constexpr std::size_t kStubUnits = 10;

class StubGenerator final : public Generator {
 public:
  std::string generate(const Prompt& prompt) override { return stub_answer(prompt); }
};

class RemoteGenerator final : public Generator {
 public:
  explicit RemoteGenerator(GenerationBackendConfig cfg) : cfg_(std::move(cfg)), url_(net::parse_url(*cfg_.endpoint)) {}

  std::string generate(const Prompt& prompt) override {
    json images = json::array();
    for (const auto& ref : prompt.images) images.push_back({{"ref", ref}});
    const json body{{"prompt", prompt.text}, {"images", images}, {"max_output_units", cfg_.max_output_units}};

    httplib::Client client(url_.origin);
    const auto timeout = std::chrono::milliseconds(cfg_.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    auto res = client.Post(url_.path, body.dump(), "application/json");
    if (!res) {
      throw Error(Errc::ProviderUnreachable,
                  "generation backend " + *cfg_.endpoint + " unreachable: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw Error(Errc::ProviderBadResponse, "generation backend returned HTTP " + std::to_string(res->status));
    }
    try {
      return json::parse(res->body).at("text").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(Errc::ProviderBadResponse, std::string("generation backend sent malformed JSON: ") + e.what());
    }
  }

 private:
  GenerationBackendConfig cfg_;
  net::ParsedUrl url_;
};

}  // namespace

void validate(const GenerationBackendConfig& cfg) {
  if (cfg.kind == GeneratorKind::RemoteHttp && (!cfg.endpoint || cfg.endpoint->empty())) {
    throw Error(Errc::InvalidArgument, "remote generation backend requires an endpoint");
  }
  if (cfg.timeout_ms <= 0) throw Error(Errc::InvalidArgument, "generator timeout_ms must be positive");
}

std::string stub_answer(const Prompt& prompt) {
  if (prompt.evidence.empty()) return "ANSWER_FROM:NONE";
  const auto& first = prompt.evidence.front();
  auto units = text::split_whitespace(first.text);
  if (units.size() > kStubUnits) units.resize(kStubUnits);
  std::string out = "ANSWER_FROM:" + first.tag;
  if (!units.empty()) out += " " + text::join(units);
  return out;
}

std::unique_ptr<Generator> make_generator(const GenerationBackendConfig& cfg) {
  validate(cfg);
  if (cfg.kind == GeneratorKind::DeterministicStub) return std::make_unique<StubGenerator>();
  return std::make_unique<RemoteGenerator>(cfg);
}

}  // namespace folio::rag
