#include "folio/error.hpp"

namespace folio {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::MissingImage: return "MissingImage";
    case Errc::DuplicateDocId: return "DuplicateDocId";
    case Errc::MalformedManifest: return "MalformedManifest";
    case Errc::InvalidChunking: return "InvalidChunking";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::ProviderUnreachable: return "ProviderUnreachable";
    case Errc::ProviderBadResponse: return "ProviderBadResponse";
    case Errc::DimMismatch: return "DimMismatch";
    case Errc::ZeroProjection: return "ZeroProjection";
    case Errc::NonFiniteLoss: return "NonFiniteLoss";
    case Errc::NotDivisible: return "NotDivisible";
    case Errc::EmptyIndex: return "EmptyIndex";
    case Errc::EfTooSmall: return "EfTooSmall";
    case Errc::Io: return "Io";
    case Errc::CorruptFile: return "CorruptFile";
    case Errc::BudgetTooSmall: return "BudgetTooSmall";
    case Errc::SessionNotFound: return "SessionNotFound";
    case Errc::AlternationViolation: return "AlternationViolation";
    case Errc::EmptyBenchmark: return "EmptyBenchmark";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::NotFound: return "NotFound";
  }
  return "Unknown";
}

}  // namespace folio
