#include <benchmark/benchmark.h>

#include <random>

#include "folio/align/objectives.hpp"
#include "folio/align/train.hpp"
#include "folio/embed/stub.hpp"
#include "folio/index/vector_index.hpp"

using namespace folio;

namespace {

std::vector<float> random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<float> n;
  std::vector<float> v(dim);
  double sq = 0;
  for (auto& x : v) {
    x = n(rng);
    sq += double(x) * x;
  }
  const auto inv = static_cast<float>(1.0 / std::sqrt(sq));
  for (auto& x : v) x *= inv;
  return v;
}

void fill_index(index::VectorIndex& idx, std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<index::NewRecord> batch;
  for (std::size_t i = 0; i < n; ++i) {
    index::NewRecord r;
    r.vector = random_unit(rng, dim);
    r.payload.doc_id = "d";
    r.payload.page_no = 1;
    batch.push_back(std::move(r));
  }
  idx.insert_batch(std::move(batch));
}

align::Matrix gaussian(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  align::Matrix m(r, c);
  for (auto& v : m.data()) v = n(rng);
  return m;
}

align::Matrix unit_rows(align::Matrix m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double sq = 0;
    for (double v : m.row(i)) sq += v * v;
    for (double& v : m.row(i)) v /= std::sqrt(sq);
  }
  return m;
}

}  // namespace

static void BM_FlatSearch(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  index::VectorIndex idx;
  fill_index(idx, n, 128, 1);
  std::mt19937_64 rng(2);
  const auto q = random_unit(rng, 128);
  for (auto _ : state) benchmark::DoNotOptimize(idx.search_flat(q, 10));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_FlatSearch)->Arg(1000)->Arg(10000);

static void BM_HnswBuild(benchmark::State& state) {
  index::VectorIndex idx;
  fill_index(idx, static_cast<std::size_t>(state.range(0)), 128, 1);
  for (auto _ : state) idx.build_hnsw();
}
BENCHMARK(BM_HnswBuild)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_HnswSearch(benchmark::State& state) {
  index::VectorIndex idx;
  fill_index(idx, 10000, 128, 1);
  idx.build_hnsw();
  std::mt19937_64 rng(3);
  std::vector<std::vector<float>> queries;
  for (int i = 0; i < 64; ++i) queries.push_back(random_unit(rng, 128));
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(idx.search_hnsw(queries[i++ % queries.size()], 10));
}
BENCHMARK(BM_HnswSearch)->Unit(benchmark::kMicrosecond);

static void BM_StubEmbedText(benchmark::State& state) {
  const std::string text = "retrieval augmented generation over text heavy scientific figures and captions";
  for (auto _ : state) benchmark::DoNotOptimize(embed::stub_embed_text(text, 384, 0));
}
BENCHMARK(BM_StubEmbedText);

static void BM_InfoNceGradient(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(4);
  auto m = align::make_lora_model(gaussian(64, 32, rng), 8, 0, 5);
  const auto x = gaussian(k, 64, rng);
  const auto t = unit_rows(gaussian(k, 32, rng));
  for (auto _ : state) benchmark::DoNotOptimize(align::infonce_loss(m, x, t, 0.07));
}
BENCHMARK(BM_InfoNceGradient)->Arg(8)->Arg(32);

static void BM_LeastSquaresTraining(benchmark::State& state) {
  std::mt19937_64 rng(6);
  const auto x = gaussian(2048, 64, rng);
  const auto w = gaussian(64, 32, rng);
  align::AlignmentPairs pairs{x, align::matmul(x, w)};
  align::TrainConfig cfg;
  cfg.mode = align::TrainMode::LeastSquares;
  cfg.epochs = 5;
  cfg.batch_size = 0;
  cfg.lr = 0.5;
  const auto m0 = align::make_lora_model(gaussian(64, 32, rng), 8, 0, 7);
  for (auto _ : state) benchmark::DoNotOptimize(align::train_projection(pairs, cfg, m0));
}
BENCHMARK(BM_LeastSquaresTraining)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
