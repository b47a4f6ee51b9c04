#include "folio/eval/curve.hpp"

namespace folio::eval {

void emit_curve(const align::TrainLog& log, const std::filesystem::path& path) {
  align::validate(log);
  align::write_train_log_csv(log, path);
}

}  // namespace folio::eval
