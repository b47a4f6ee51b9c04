#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "folio/align/projection.hpp"

namespace folio::align {

// Binary layout: "FRWP", u16 version, u32 d_img, u32 d_txt, u32 r, f64 alpha,
// then W0, B, A as row-major little-endian f32.
inline constexpr std::uint16_t kModelFormatVersion = 1;

std::vector<std::uint8_t> serialize_model(const ProjectionModel& m);
ProjectionModel deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const ProjectionModel& m, const std::filesystem::path& path);
ProjectionModel load_model(const std::filesystem::path& path);

}  // namespace folio::align
