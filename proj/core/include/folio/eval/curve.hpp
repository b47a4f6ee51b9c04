#pragma once

#include <filesystem>

#include "folio/align/train.hpp"

namespace folio::eval {

inline constexpr int kDefaultCurveEpochs = 25;

// Writes the accuracy-over-epochs CSV (`epoch,split,loss,accuracy`). Throws
// InvalidArgument for a log with gaps, Io when the file cannot be written.
void emit_curve(const align::TrainLog& log, const std::filesystem::path& path);

}  // namespace folio::eval
