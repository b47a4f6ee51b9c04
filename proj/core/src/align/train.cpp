#include "folio/align/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>

#include "folio/align/objectives.hpp"
#include "folio/error.hpp"
#include "folio/util/binary_io.hpp"

namespace folio::align {

namespace {

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> idx) {
  Matrix out(idx.size(), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    auto src = m.row(idx[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

Matrix leading_rows(const Matrix& m, std::size_t n) {
  n = std::min(n, m.rows());
  Matrix out(n, m.cols());
  std::copy_n(m.data().begin(), n * m.cols(), out.data().begin());
  return out;
}

void normalize_rows_in_place(Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto row = m.row(i);
    double sq = 0.0;
    for (double v : row) sq += v * v;
    const double norm = std::sqrt(sq);
    if (norm >= kZeroProjectionThreshold)
      for (double& v : row) v /= norm;
  }
}

double eval_accuracy(const Matrix& w, const AlignmentPairs& pairs, std::size_t max_items) {
  if (pairs.size() == 0) return 0.0;
  const Matrix x = leading_rows(pairs.images, max_items);
  Matrix t = leading_rows(pairs.texts, max_items);
  Matrix p = matmul(x, w);
  normalize_rows_in_place(p);
  normalize_rows_in_place(t);
  return retrieval_accuracy(p, t);
}

// Fixed, unshuffled partition so logged losses are comparable across epochs.
double eval_infonce(const ProjectionModel& m, const AlignmentPairs& pairs, const Matrix& texts_unit,
                    std::size_t batch, double tau) {
  const std::size_t k = pairs.size();
  double total = 0.0;
  for (std::size_t start = 0; start < k; start += batch) {
    const std::size_t n = std::min(batch, k - start);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), start);
    const auto res = infonce_loss(m, gather_rows(pairs.images, idx), gather_rows(texts_unit, idx), tau);
    total += res.loss * static_cast<double>(n);
  }
  return total / static_cast<double>(k);
}

void check_pairs(const AlignmentPairs& p, const ProjectionModel& m, const char* name) {
  if (p.images.rows() != p.texts.rows()) {
    throw Error(Errc::DimMismatch, std::string(name) + ": image and text counts differ");
  }
  if (p.size() == 0) return;
  if (p.images.cols() != m.d_img() || p.texts.cols() != m.d_txt()) {
    throw Error(Errc::DimMismatch, std::string(name) + ": pair dims do not match the projection model");
  }
}

}  // namespace

void validate(const TrainConfig& cfg) {
  if (!(cfg.lr > 0.0) || !std::isfinite(cfg.lr)) throw Error(Errc::InvalidArgument, "lr must be > 0");
  if (cfg.epochs < 1) throw Error(Errc::InvalidArgument, "epochs must be >= 1");
  if (!(cfg.tau > 0.0)) throw Error(Errc::InvalidArgument, "tau must be > 0");
}

AlignmentPairs AlignmentPairs::from_vectors(
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs) {
  AlignmentPairs out;
  if (pairs.empty()) return out;
  out.images = Matrix(pairs.size(), pairs.front().first.size());
  out.texts = Matrix(pairs.size(), pairs.front().second.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].first.size() != out.images.cols() || pairs[i].second.size() != out.texts.cols()) {
      throw Error(Errc::DimMismatch, "pair " + std::to_string(i) + " has inconsistent dims");
    }
    std::copy(pairs[i].first.begin(), pairs[i].first.end(), out.images.row(i).begin());
    std::copy(pairs[i].second.begin(), pairs[i].second.end(), out.texts.row(i).begin());
  }
  return out;
}

std::string_view to_string(Split s) noexcept { return s == Split::Train ? "train" : "val"; }

std::size_t TrainLog::count(Split s) const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [s](const auto& r) { return r.split == s; }));
}

void validate(const TrainLog& log) {
  std::map<Split, int> last;
  for (const auto& row : log.rows) {
    const int expected = last[row.split] + 1;
    if (row.epoch != expected) {
      throw Error(Errc::InvalidArgument, "train log epochs for split " + std::string(to_string(row.split)) +
                                             " are not contiguous: expected " + std::to_string(expected) + ", got " +
                                             std::to_string(row.epoch));
    }
    last[row.split] = row.epoch;
  }
}

TrainResult train_projection(const AlignmentPairs& train, const TrainConfig& cfg, const ProjectionModel& m0,
                             const AlignmentPairs& val) {
  validate(cfg);
  validate(m0);
  if (train.size() == 0) throw Error(Errc::InvalidArgument, "training needs at least one pair");
  check_pairs(train, m0, "train");
  check_pairs(val, m0, "val");

  const std::size_t k = train.size();
  const std::size_t batch = cfg.batch_size == 0 ? k : std::min(cfg.batch_size, k);
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  TrainLog& log = result.log;

  if (cfg.mode == TrainMode::LeastSquares) {
    Matrix w = lora_merge(m0);
    log.trainable_parameters = w.size();
    log.initial_train_loss = least_squares_loss(w, train.images, train.texts).loss;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t start = 0; start < k; start += batch) {
        std::span<const std::size_t> idx(order.data() + start, std::min(batch, k - start));
        const auto res = least_squares_loss(w, gather_rows(train.images, idx), gather_rows(train.texts, idx));
        w -= cfg.lr * res.grad_w;
      }
      const double loss = least_squares_loss(w, train.images, train.texts).loss;
      if (!std::isfinite(loss) || !all_finite(w)) throw NonFiniteLoss(epoch);
      log.rows.push_back({epoch, Split::Train, loss, eval_accuracy(w, train, cfg.max_eval_items)});
      if (val.size() > 0) {
        const double vloss = least_squares_loss(w, val.images, val.texts).loss;
        log.rows.push_back({epoch, Split::Val, vloss, eval_accuracy(w, val, cfg.max_eval_items)});
      }
    }
    result.model.w0 = std::move(w);
    result.model.b = Matrix(m0.b.rows(), m0.b.cols());
    result.model.a = Matrix(m0.a.rows(), m0.a.cols());
    result.model.alpha = m0.alpha;
    return result;
  }

  ProjectionModel m = m0;
  log.trainable_parameters = m.trainable_parameter_count();

  Matrix texts_unit = train.texts;
  normalize_rows_in_place(texts_unit);
  Matrix val_texts_unit = val.texts;
  normalize_rows_in_place(val_texts_unit);

  log.initial_train_loss = eval_infonce(m, train, texts_unit, batch, cfg.tau);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < k; start += batch) {
      std::span<const std::size_t> idx(order.data() + start, std::min(batch, k - start));
      const auto res = infonce_loss(m, gather_rows(train.images, idx), gather_rows(texts_unit, idx), cfg.tau);
      if (!std::isfinite(res.loss)) throw NonFiniteLoss(epoch);
      m.b -= cfg.lr * res.grad_b;
      m.a -= cfg.lr * res.grad_a;
    }
    if (!all_finite(m.b) || !all_finite(m.a)) throw NonFiniteLoss(epoch);
    const Matrix w = lora_merge(m);
    const double loss = eval_infonce(m, train, texts_unit, batch, cfg.tau);
    if (!std::isfinite(loss)) throw NonFiniteLoss(epoch);
    log.rows.push_back({epoch, Split::Train, loss, eval_accuracy(w, train, cfg.max_eval_items)});
    if (val.size() > 0) {
      const double vloss = eval_infonce(m, val, val_texts_unit, std::min(batch, val.size()), cfg.tau);
      log.rows.push_back({epoch, Split::Val, vloss, eval_accuracy(w, val, cfg.max_eval_items)});
    }
  }
  result.model = std::move(m);
  return result;
}

std::string train_log_csv(const TrainLog& log) {
  validate(log);
  std::string out = "epoch,split,loss,accuracy\n";
  char buf[128];
  for (const auto& r : log.rows) {
    std::snprintf(buf, sizeof buf, "%d,%s,%.9g,%.6f\n", r.epoch, std::string(to_string(r.split)).c_str(), r.loss,
                  r.retrieval_accuracy);
    out += buf;
  }
  return out;
}

void write_train_log_csv(const TrainLog& log, const std::filesystem::path& path) {
  const std::string csv = train_log_csv(log);
  io::write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size()));
}

}  // namespace folio::align
