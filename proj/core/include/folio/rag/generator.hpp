#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>

#include "folio/rag/prompt.hpp"

namespace folio::rag {

enum class GeneratorKind { RemoteHttp, DeterministicStub };

struct GenerationBackendConfig {
  GeneratorKind kind = GeneratorKind::DeterministicStub;
  std::optional<std::string> endpoint;
  int timeout_ms = 60000;
  std::size_t max_output_units = 512;
};

// Throws InvalidArgument (RemoteHttp without an endpoint, non-positive timeout).
void validate(const GenerationBackendConfig& cfg);

class Generator {
 public:
  virtual ~Generator() = default;
  // Throws ProviderUnreachable / ProviderBadResponse.
  virtual std::string generate(const Prompt& prompt) = 0;
};

// "ANSWER_FROM:" + first evidence tag + " " + first 10 units of its text, or
// "ANSWER_FROM:NONE" when the prompt carries no evidence.
std::string stub_answer(const Prompt& prompt);

std::unique_ptr<Generator> make_generator(const GenerationBackendConfig& cfg);

}  // namespace folio::rag
