// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any fail.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "folio/align/attention.hpp"
#include "folio/align/objectives.hpp"
#include "folio/align/projection.hpp"
#include "folio/align/train.hpp"
#include "folio/corpus/captions.hpp"
#include "folio/error.hpp"
#include "folio/eval/benchmark.hpp"
#include "folio/eval/curve.hpp"
#include "folio/index/vector_index.hpp"
#include "folio/rag/engine.hpp"
#include "support.hpp"

using namespace folio;
using namespace folio::testing;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct PlantedTask {
  align::Matrix x;
  align::Matrix t;
};

PlantedTask planted_task(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PlantedTask task;
  task.x = gaussian_matrix(2048, 64, rng);
  const auto m = gaussian_matrix(64, 32, rng);
  task.t = normalized_rows(align::matmul(task.x, m));
  return task;
}

Verdict headline_declared() {
  std::ifstream in(std::string(FOLIO_SOURCE_DIR) + "/README.md");
  std::stringstream ss;
  ss << in.rdbuf();
  const bool declared = ss.str().find("## Reproducibility of the headline accuracy") != std::string::npos;
  return {declared, declared ? "README declares the headline accuracy not reproducible at desk scale; "
                               "oracle-based criteria below substitute for it"
                             : "README lacks the reproducibility declaration"};
}

Verdict projection_recovery() {
  const auto task = planted_task(2024);
  align::TrainConfig cfg;
  cfg.mode = align::TrainMode::LeastSquares;
  cfg.lr = 0.9;
  cfg.epochs = 60;
  cfg.batch_size = 0;
  const auto m0 = align::make_lora_model(align::default_base_matrix(64, 32, 7), 8, 0, 7);
  const auto t0 = Clock::now();
  const auto res = align::train_projection({task.x, task.t}, cfg, m0);
  const double secs = seconds_since(t0);
  const auto oracle = normal_equations_solution(task.x, task.t);
  const auto w = align::lora_merge(res.model);
  double diff = 0;
  double ref = 0;
  for (std::size_t i = 0; i < 64; ++i)
    for (std::size_t j = 0; j < 32; ++j) {
      diff += (w(i, j) - oracle[i][j]) * (w(i, j) - oracle[i][j]);
      ref += oracle[i][j] * oracle[i][j];
    }
  const double rel = std::sqrt(diff / ref);
  return {rel < 1e-3 && secs < 30.0, fmt("relative Frobenius error %.3e (< 1e-3), %.2f s (< 30 s)", rel, secs)};
}

Verdict gradient_fidelity() {
  double worst = 0;
  int checks = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    for (std::size_t k : {2u, 8u, 32u}) {
      align::ProjectionModel m;
      m.w0 = gaussian_matrix(16, 12, rng);
      m.b = gaussian_matrix(16, 4, rng);
      m.a = gaussian_matrix(4, 12, rng);
      m.alpha = 8.0;
      const auto x = gaussian_matrix(k, 16, rng);
      const auto t = normalized_rows(gaussian_matrix(k, 12, rng));
      const double tau = align::kDefaultTemperature;
      const auto res = align::infonce_loss(m, x, t, tau);
      const auto fd_b = finite_difference_gradient(
          m.b, [&](const align::Matrix& b) { return oracle_infonce(naive_lora_w(m.w0, b, m.a, m.alpha), x, t, tau); });
      const auto fd_a = finite_difference_gradient(
          m.a, [&](const align::Matrix& a) { return oracle_infonce(naive_lora_w(m.w0, m.b, a, m.alpha), x, t, tau); });
      worst = std::max({worst, max_relative_error(res.grad_b, fd_b), max_relative_error(res.grad_a, fd_a)});
      ++checks;
    }
  }
  return {worst < 1e-3, fmt("max relative error %.3e (< 1e-3) over %d seed/batch combinations", worst, checks)};
}

Verdict lora_contract() {
  const auto task = planted_task(77);
  align::AlignmentPairs pairs{task.x, task.t};
  const auto m0 = align::make_lora_model(align::default_base_matrix(64, 32, 3), 8, 0, 3);
  std::vector<float> before(m0.w0.data().begin(), m0.w0.data().end());
  align::TrainConfig cfg;
  cfg.mode = align::TrainMode::InfoNCE;
  cfg.epochs = 3;
  const auto res = align::train_projection(pairs, cfg, m0);
  const bool identical = res.model.w0.size() == m0.w0.size() &&
                         std::memcmp(res.model.w0.data().data(), m0.w0.data().data(),
                                     m0.w0.size() * sizeof(double)) == 0;
  const bool moved = res.model.a != m0.a;
  const std::size_t dense = m0.d_img() * m0.d_txt();
  const std::size_t count = res.log.trainable_parameters;
  return {count == 768 && dense == 2048 && identical && moved,
          fmt("trainable parameters %zu (dense %zu), W0 bit-identical: %s, update trained: %s", count, dense,
              identical ? "yes" : "no", moved ? "yes" : "no")};
}

Verdict patch_arithmetic() {
  const int a = align::patch_count(224, 14);
  const int b = align::patch_count(336, 14);
  return {a == 256 && b == 576, fmt("patch_count(224,14)=%d, patch_count(336,14)=%d", a, b)};
}

Verdict attention_properties() {
  std::mt19937_64 rng(31);
  double worst_sum = 0;
  double worst_perm = 0;
  bool collapse_exact = true;
  for (int i = 0; i < 100; ++i) {
    const std::size_t d_p = 4 + rng() % 12;
    const std::size_t d_k = 2 + rng() % 10;
    const std::size_t n = 1 + rng() % 64;
    const std::size_t m = 1 + rng() % 8;
    const align::CrossAttentionParams params{gaussian_matrix(d_p, d_k, rng, 0.5), gaussian_matrix(d_p, d_k, rng, 0.5)};
    const auto q = gaussian_matrix(m, d_k, rng);
    const auto p = gaussian_matrix(n, d_p, rng);
    const auto out = align::cross_attention(q, p, params);
    for (std::size_t r = 0; r < m; ++r) {
      double s = 0;
      for (double w : out.weights.row(r)) s += w;
      worst_sum = std::max(worst_sum, std::abs(s - 1.0));
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    align::Matrix shuffled(n, d_p);
    for (std::size_t r = 0; r < n; ++r)
      std::copy(p.row(perm[r]).begin(), p.row(perm[r]).end(), shuffled.row(r).begin());
    const auto permuted = align::cross_attention_pool(q, shuffled, params);
    for (std::size_t j = 0; j < permuted.size(); ++j)
      worst_perm = std::max(worst_perm, std::abs(permuted.data()[j] - out.pooled.data()[j]));

    const auto single = gaussian_matrix(1, d_p, rng);
    const auto value = align::matmul(single, params.wv);
    const auto collapsed = align::cross_attention_pool(q, single, params);
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < d_k; ++c) collapse_exact &= collapsed(r, c) == value(0, c);
  }
  return {worst_sum <= 1e-6 && worst_perm <= 1e-9 && collapse_exact,
          fmt("max |row sum - 1| %.2e (<= 1e-6), max permutation drift %.2e (<= 1e-9), n=1 collapse exact: %s",
              worst_sum, worst_perm, collapse_exact ? "yes" : "no")};
}

Verdict ann_quality() {
  std::mt19937_64 rng(128);
  index::VectorIndex idx;
  std::vector<index::NewRecord> batch;
  for (int i = 0; i < 10000; ++i) {
    index::NewRecord r;
    r.vector = random_unit(rng, 128);
    r.payload.doc_id = "d";
    r.payload.page_no = 1;
    batch.push_back(std::move(r));
  }
  idx.insert_batch(std::move(batch));
  const index::HnswConfig cfg;  // M=16, ef_construction=200, ef_search=64
  const auto t0 = Clock::now();
  idx.build_hnsw(cfg);
  const double build = seconds_since(t0);
  const auto records = idx.records();
  std::size_t found = 0;
  for (int qi = 0; qi < 100; ++qi) {
    const auto q = random_unit(rng, 128);
    std::set<std::uint64_t> truth;
    for (const auto& h : brute_force_topk(records, q, 10)) truth.insert(h.id);
    for (const auto& h : idx.search_hnsw(std::span<const float>(q), 10)) found += truth.count(h.id);
  }
  const double recall = static_cast<double>(found) / 1000.0;
  // Same graph and queries at wider beams, reported for diagnosis only.
  std::string wider;
  for (std::size_t ef : {128u, 256u}) {
    std::mt19937_64 qrng(128 + ef);
    std::size_t hits = 0;
    for (int qi = 0; qi < 100; ++qi) {
      const auto q = random_unit(qrng, 128);
      std::set<std::uint64_t> truth;
      for (const auto& h : brute_force_topk(records, q, 10)) truth.insert(h.id);
      for (const auto& h : idx.search_hnsw(std::span<const float>(q), 10, {}, ef)) hits += truth.count(h.id);
    }
    wider += fmt("; efs=%zu gives %.4f", ef, static_cast<double>(hits) / 1000.0);
  }
  return {recall >= 0.95 && build < 60.0,
          fmt("recall@10 %.4f (>= 0.95) with M=%zu efc=%zu efs=%zu, build %.2f s (< 60 s)", recall, cfg.M,
              cfg.ef_construction, cfg.ef_search, build) +
              wider};
}

Verdict flat_exactness() {
  std::mt19937_64 rng(404);
  std::size_t queries = 0;
  std::size_t mismatches = 0;
  std::size_t tied_queries = 0;
  for (std::size_t n : {1u, 10u, 100u, 500u, 1000u}) {
    index::VectorIndex idx;
    std::vector<std::vector<float>> pool;
    for (int i = 0; i < 50; ++i) pool.push_back(random_unit(rng, 32));
    for (std::size_t i = 0; i < n; ++i) {
      index::NewRecord r;
      r.vector = pool[rng() % pool.size()];
      r.kind = static_cast<index::RecordKind>(rng() % 3);
      r.space = r.kind == index::RecordKind::TextChunk ? index::Space::TextSpace : index::Space::ImageSpaceProjected;
      r.payload.doc_id = "doc" + std::to_string(rng() % 4);
      r.payload.page_no = 1;
      idx.insert(std::move(r));
    }
    const auto records = idx.records();
    for (int qi = 0; qi < 50; ++qi) {
      // Half the queries reuse a stored vector so several records tie at the top.
      const auto q = qi % 2 == 0 ? pool[rng() % pool.size()] : random_unit(rng, 32);
      const std::size_t k = 1 + rng() % 25;
      index::SearchFilter filter;
      if (qi % 3 == 1) filter.kinds = std::vector<index::RecordKind>{index::RecordKind::TextChunk};
      if (qi % 5 == 2) filter.doc_id = "doc1";
      const auto hits = idx.search_flat(std::span<const float>(q), k, filter);
      const auto oracle = brute_force_topk(records, q, k, filter);
      bool same = hits.size() == oracle.size();
      for (std::size_t i = 0; same && i < hits.size(); ++i)
        same = hits[i].id == oracle[i].id && hits[i].score == oracle[i].score;
      for (std::size_t i = 1; i < oracle.size(); ++i)
        if (oracle[i].score == oracle[i - 1].score) {
          ++tied_queries;
          break;
        }
      mismatches += same ? 0 : 1;
      ++queries;
    }
  }
  return {mismatches == 0 && tied_queries > 0,
          fmt("%zu/%zu queries identical to brute-force scan (%zu with exact ties), up to 1000 records",
              queries - mismatches, queries, tied_queries)};
}

Verdict persistence() {
  std::mt19937_64 rng(55);
  index::VectorIndex idx;
  for (int i = 0; i < 2000; ++i) {
    index::NewRecord r;
    r.vector = random_unit(rng, 64);
    r.payload.doc_id = "doc" + std::to_string(i % 7);
    r.payload.page_no = 1 + i % 5;
    r.payload.text = "chunk " + std::to_string(i);
    idx.insert(std::move(r));
  }
  TempDir dir;
  idx.persist(dir / "index.frix");
  index::VectorIndex loaded;
  loaded.load(dir / "index.frix");
  int identical = 0;
  for (int qi = 0; qi < 100; ++qi) {
    const auto q = random_unit(rng, 64);
    identical += idx.search_flat(std::span<const float>(q), 10) == loaded.search_flat(std::span<const float>(q), 10);
  }
  auto bytes = idx.serialize();
  bytes.resize(bytes.size() - 9);
  bool rejected = false;
  try {
    index::VectorIndex t;
    t.deserialize(bytes);
  } catch (const CorruptFile&) {
    rejected = true;
  } catch (const Error&) {
  }
  return {identical == 100 && rejected, fmt("%d/100 queries with identical top-10, truncated file rejected with "
                                            "CorruptFile: %s",
                                            identical, rejected ? "yes" : "no")};
}

Verdict end_to_end() {
  const auto t0 = Clock::now();
  TempDir dir;
  rag::EngineConfig cfg;
  rag::Engine engine(cfg);
  std::vector<eval::BenchmarkItem> items;
  std::vector<std::pair<std::string, int>> all_pages;
  for (std::size_t d = 0; d < 20; ++d) {
    const auto doc = make_synthetic_doc(dir.path(), d, 3);
    engine.ingest(doc.bundle);
    for (std::size_t p = 0; p < doc.markers.size(); ++p) all_pages.emplace_back(doc.markers[p] + "|" + doc.bundle.doc_id, p + 1);
  }
  std::mt19937_64 rng(20);
  std::shuffle(all_pages.begin(), all_pages.end(), rng);
  for (std::size_t i = 0; i < 50; ++i) {
    const auto& [key, page] = all_pages[i];
    const auto bar = key.find('|');
    items.push_back({"Which page mentions " + key.substr(0, bar) + "?", "unused", key.substr(bar + 1), page});
  }
  const auto report = eval::run_retrieval_eval(engine, items, {1});
  int cited = 0;
  for (const auto& item : items) {
    const auto sid = engine.create_session();
    const auto turn = engine.chat_answer(sid, item.question);
    if (!turn.citations.empty() && turn.citations[0].doc_id == item.gold_doc_id &&
        turn.citations[0].page_no == item.gold_page_no)
      ++cited;
  }
  const double secs = seconds_since(t0);
  const double hit1 = report.hit_at.at(1);
  return {hit1 == 1.0 && report.n_invalid == 0 && cited == 50 && secs < 60.0,
          fmt("hit@1 %.3f over %zu items (== 1.0), first citation correct %d/50, %.2f s (< 60 s)", hit1,
              report.n_items, cited, secs)};
}

Verdict caption_extraction() {
  struct Expected {
    std::string label;
    std::string caption;
  };
  const std::vector<Expected> expected = {
      {"Fig 1", "Model Interface"},
      {"Fig 2", "Example of prompt on a Brain Tumor image taken from a research paper"},
      {"Fig 4", "Graph of Accuracy over Epochs"},
  };
  const std::string fixture =
      "Fig 1. Model Interface\n"
      "The interface lets a user upload a page and ask about it.\n"
      "as shown in Fig 4. the curve flattens late\n"
      "Fig 2. Example of prompt on a Brain Tumor image taken from a research paper\n"
      "Figures 1 and 2 compare the two settings.\n"
      "Table 1. Summary of the datasets\n"
      "Fig 3 shows the flow of data through the system\n"
      "See Fig. 2 for the prompt layout.\n"
      "Fig.\n"
      "Figure\n"
      "Configuration 3: default settings\n"
      "Fig 4. Graph of Accuracy over Epochs\n"
      "Section 4. Results\n";
  std::vector<Expected> got;
  for (const auto& raw : corpus::extract_figure_pairs(fixture)) {
    if (auto clean = corpus::clean_caption(raw)) got.push_back({clean->label, clean->caption_clean});
  }
  std::size_t tp = 0;
  for (const auto& g : got)
    for (const auto& e : expected) tp += g.label == e.label && g.caption == e.caption;
  const double precision = got.empty() ? 0.0 : static_cast<double>(tp) / got.size();
  const double recall = static_cast<double>(tp) / expected.size();
  return {precision == 1.0 && recall == 1.0,
          fmt("precision %.3f, recall %.3f over 3 caption lines and 10 distractors", precision, recall)};
}

Verdict curve_emission() {
  const auto task = planted_task(25);
  align::TrainConfig cfg;
  cfg.mode = align::TrainMode::LeastSquares;
  cfg.epochs = eval::kDefaultCurveEpochs;
  const auto m0 = align::make_lora_model(align::default_base_matrix(64, 32, 11), 8, 0, 11);
  const auto res = align::train_projection({task.x, task.t}, cfg, m0);
  TempDir dir;
  eval::emit_curve(res.log, dir / "curve.csv");
  std::ifstream in(dir / "curve.csv");
  std::string line;
  std::getline(in, line);
  int train_rows = 0;
  int expected_epoch = 1;
  bool contiguous = line == "epoch,split,loss,accuracy";
  double last_loss = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string epoch;
    std::string split;
    std::string loss;
    std::getline(ss, epoch, ',');
    std::getline(ss, split, ',');
    std::getline(ss, loss, ',');
    if (split != "train") continue;
    contiguous &= std::stoi(epoch) == expected_epoch++;
    last_loss = std::stod(loss);
    ++train_rows;
  }
  const double initial = res.log.initial_train_loss;
  return {train_rows == 25 && contiguous && last_loss < 0.1 * initial,
          fmt("%d train rows (== 25), final loss %.4g vs initial %.4g (ratio %.4f < 0.1)", train_rows, last_loss,
              initial, last_loss / initial)};
}

}  // namespace

int main(int argc, char** argv) {
  // --known-failure NAME marks a criterion that is expected to fail; the exit
  // code is then 0 only when exactly the listed criteria fail.
  std::set<std::string> known;
  for (int i = 1; i + 1 < argc; i += 2) {
    if (std::string(argv[i]) != "--known-failure") {
      std::cerr << "usage: acceptance [--known-failure NAME]...\n";
      return 2;
    }
    known.insert(argv[i + 1]);
  }
  if (argc % 2 == 0) {
    std::cerr << "usage: acceptance [--known-failure NAME]...\n";
    return 2;
  }

  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"headline-irreproducibility-declared", headline_declared},
      {"projection-recovery", projection_recovery},
      {"gradient-fidelity", gradient_fidelity},
      {"lora-contract", lora_contract},
      {"patch-arithmetic", patch_arithmetic},
      {"cross-attention-properties", attention_properties},
      {"ann-quality", ann_quality},
      {"flat-search-exactness", flat_exactness},
      {"persistence", persistence},
      {"end-to-end-synthetic-corpus", end_to_end},
      {"caption-extraction", caption_extraction},
      {"curve-emission", curve_emission},
  };
  std::size_t failed = 0;
  std::size_t unexpected = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const bool expected_fail = known.contains(name);
    failed += v.pass ? 0 : 1;
    unexpected += v.pass == expected_fail ? 1 : 0;
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail
              << (expected_fail ? (v.pass ? " [listed as known failure but passed]" : " [known failure]") : "")
              << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed";
  if (!known.empty()) std::cout << ", " << unexpected << " unexpected outcome(s)";
  std::cout << std::endl;
  return (known.empty() ? failed : unexpected) == 0 ? 0 : 1;
}
