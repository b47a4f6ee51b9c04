#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "folio/align/matrix.hpp"
#include "folio/align/projection.hpp"

namespace folio::align {

enum class TrainMode { LeastSquares, InfoNCE };

struct TrainConfig {
  TrainMode mode = TrainMode::InfoNCE;
  double lr = 0.05;
  int epochs = 25;
  std::size_t batch_size = 32;  // 0 means full batch
  double tau = 0.07;
  std::uint64_t seed = 0;
  // Retrieval accuracy is computed over at most this many leading items per split.
  std::size_t max_eval_items = 256;
};

void validate(const TrainConfig& cfg);

// Row i of images pairs with row i of texts.
struct AlignmentPairs {
  Matrix images;  // k x d_img
  Matrix texts;   // k x d_txt

  std::size_t size() const noexcept { return images.rows(); }

  static AlignmentPairs from_vectors(const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs);
};

enum class Split { Train, Val };

std::string_view to_string(Split s) noexcept;

struct TrainLogRow {
  int epoch = 0;
  Split split = Split::Train;
  double loss = 0.0;
  double retrieval_accuracy = 0.0;

  bool operator==(const TrainLogRow&) const = default;
};

struct TrainLog {
  std::vector<TrainLogRow> rows;
  double initial_train_loss = 0.0;  // objective of the starting model
  std::size_t trainable_parameters = 0;

  std::size_t count(Split s) const;
};

// Throws InvalidArgument if epochs are not contiguous from 1 within each split.
void validate(const TrainLog& log);

struct TrainResult {
  ProjectionModel model;
  TrainLog log;
};

// LeastSquares trains the full dense W = lora_merge(m0) by minibatch gradient
// descent on mean squared error and returns it as the new base (B zeroed).
// InfoNCE updates only B and A; W0 is carried over untouched. The log holds
// cfg.epochs rows for train and, when val is non-empty, for val.
// Deterministic for a fixed seed. Throws DimMismatch or NonFiniteLoss.
TrainResult train_projection(const AlignmentPairs& train, const TrainConfig& cfg, const ProjectionModel& m0,
                             const AlignmentPairs& val = {});

// CSV `epoch,split,loss,accuracy`, one row per (epoch, split).
std::string train_log_csv(const TrainLog& log);
void write_train_log_csv(const TrainLog& log, const std::filesystem::path& path);

}  // namespace folio::align
