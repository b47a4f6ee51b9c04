#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "folio/error.hpp"
#include "folio/eval/benchmark.hpp"
#include "folio/eval/curve.hpp"
#include "folio/eval/metrics.hpp"
#include "folio/rag/engine.hpp"
#include "expect_error.hpp"
#include "support.hpp"

using namespace folio;
using namespace folio::eval;
using namespace folio::testing;

namespace {

rag::EngineConfig small_config() {
  rag::EngineConfig cfg;
  cfg.text_embedder.dim = 256;
  cfg.image_embedder.dim = 64;
  return cfg;
}

struct MarkedCorpus {
  TempDir dir;
  rag::Engine engine{small_config()};
  std::vector<BenchmarkItem> items;
};

// Four documents of three pages; one item per page asking for its marker.
void build(MarkedCorpus& c) {
  for (std::size_t d = 0; d < 4; ++d) {
    const auto doc = make_synthetic_doc(c.dir.path(), d, 3);
    c.engine.ingest(doc.bundle);
    for (std::size_t p = 0; p < doc.markers.size(); ++p) {
      c.items.push_back({doc.markers[p], "unused", doc.bundle.doc_id, static_cast<int>(p + 1)});
    }
  }
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

align::TrainLog two_split_log(int epochs) {
  align::TrainLog log;
  for (int e = 1; e <= epochs; ++e) {
    log.rows.push_back({e, align::Split::Train, 1.0 / e, 0.5});
    log.rows.push_back({e, align::Split::Val, 1.5 / e, 0.25});
  }
  return log;
}

}  // namespace

TEST(Metrics, ExactMatchNormalizes) {
  EXPECT_TRUE(exact_match("The Answer.", "the answer"));
  EXPECT_TRUE(exact_match("  a   b\t", "A B"));
  EXPECT_FALSE(exact_match("", "gold"));
  EXPECT_FALSE(exact_match("answer one", "answer two"));
}

TEST(Metrics, TokenF1) {
  EXPECT_DOUBLE_EQ(token_f1("alpha beta", "beta gamma"), 0.5);
  EXPECT_DOUBLE_EQ(token_f1("", "gold"), 0.0);
  EXPECT_DOUBLE_EQ(token_f1("x", ""), 0.0);
  EXPECT_DOUBLE_EQ(token_f1("", ""), 1.0);
  // Multiset overlap: one shared "a" out of two predicted, one gold.
  EXPECT_DOUBLE_EQ(token_f1("a a", "a"), 2.0 * 0.5 * 1.0 / 1.5);
}

TEST(Metrics, ExactMatchImpliesFullF1) {
  std::mt19937_64 rng(1);
  const char* words[] = {"the", "The", "answer", "Answer.", "is", "IS", "x", "y,"};
  for (int i = 0; i < 500; ++i) {
    std::string a;
    std::string b;
    for (int w = 0; w < 3; ++w) {
      a += std::string(words[rng() % 8]) + " ";
      b += std::string(words[rng() % 8]) + " ";
    }
    if (exact_match(a, b)) {
      EXPECT_DOUBLE_EQ(token_f1(a, b), 1.0) << a << " | " << b;
    }
  }
}

TEST(Benchmark, ParseAndErrors) {
  const auto items = parse_benchmark(
      "{\"question\":\"q1\",\"gold_answer\":\"a1\",\"gold_doc_id\":\"d\",\"gold_page_no\":2}\n\n"
      "{\"question\":\"q2\",\"gold_answer\":\"a2\",\"gold_doc_id\":\"e\",\"gold_page_no\":1}\n");
  ASSERT_EQ(items.size(), 2u);
  EXPECT_EQ(items[0], (BenchmarkItem{"q1", "a1", "d", 2}));
  try {
    parse_benchmark("{\"question\":\"q1\",\"gold_answer\":\"a\",\"gold_doc_id\":\"d\",\"gold_page_no\":1}\n{oops");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(RetrievalEval, EmptyBenchmark) {
  rag::Engine engine(small_config());
  EXPECT_EQ(error_code_of([&] { run_retrieval_eval(engine, {}); }), Errc::EmptyBenchmark);
  EXPECT_EQ(error_code_of([&] { run_qa_eval(engine, {}); }), Errc::EmptyBenchmark);
}

TEST(RetrievalEval, UniqueTokensGiveHitAtOne) {
  MarkedCorpus c;
  build(c);
  const auto report = run_retrieval_eval(c.engine, c.items, {1, 3, 5});
  EXPECT_EQ(report.n_items, c.items.size());
  EXPECT_EQ(report.n_invalid, 0u);
  EXPECT_DOUBLE_EQ(report.hit_at.at(1), 1.0);
  for (const auto& r : report.per_item) EXPECT_EQ(r.gold_rank, 1u);
}

TEST(RetrievalEval, InvalidItemsExcluded) {
  MarkedCorpus c;
  build(c);
  auto items = c.items;
  items.push_back({"whatever", "x", "ghost", 1});
  items.push_back({"whatever", "x", c.items[0].gold_doc_id, 99});
  const auto report = run_retrieval_eval(c.engine, items, {1});
  EXPECT_EQ(report.n_items, items.size());
  EXPECT_EQ(report.n_invalid, 2u);
  EXPECT_DOUBLE_EQ(report.hit_at.at(1), 1.0);
  EXPECT_FALSE(report.per_item[items.size() - 1].valid);
  EXPECT_FALSE(report.per_item[items.size() - 1].gold_rank.has_value());
}

TEST(RetrievalEval, HitAtKMonotone) {
  MarkedCorpus c;
  build(c);
  // Questions made of filler words leave the gold page well below rank 1.
  std::vector<BenchmarkItem> items;
  for (const auto& it : c.items) items.push_back({"results across several pages", "", it.gold_doc_id, it.gold_page_no});
  const auto report = run_retrieval_eval(c.engine, items, {1, 2, 3, 5, 8, 13});
  double prev = 0;
  for (const auto& [k, v] : report.hit_at) {
    EXPECT_GE(v, prev) << "k=" << k;
    prev = v;
  }
  EXPECT_LT(report.hit_at.at(1), 1.0);
}

TEST(QaEval, StubAnswersScoredAndDeterministic) {
  MarkedCorpus c;
  build(c);
  auto items = c.items;
  items.resize(3);
  // Gold answers chosen as the stub's own output for item 0, so EM is 1 there.
  items[0].gold_answer = c.engine.answer(items[0].question).second;
  const auto report = run_eval(c.engine, items, {1, 3}, true);
  ASSERT_TRUE(report.exact_match.has_value());
  ASSERT_TRUE(report.token_f1.has_value());
  EXPECT_EQ(report.per_item[0].exact_match, true);
  EXPECT_DOUBLE_EQ(*report.per_item[0].token_f1, 1.0);
  EXPECT_EQ(report.per_item[1].exact_match, false);
  EXPECT_NEAR(*report.exact_match, 1.0 / 3.0, 1e-12);
  EXPECT_EQ(to_json(report), to_json(run_eval(c.engine, items, {1, 3}, true)));
  const auto j = to_json(report);
  EXPECT_TRUE(j.contains("hit_at"));
  EXPECT_EQ(j["n_items"], 3);
}

TEST(Curve, TwentyFiveEpochsTwoSplits) {
  TempDir dir;
  emit_curve(two_split_log(kDefaultCurveEpochs), dir / "curve.csv");
  const auto lines = read_lines(dir / "curve.csv");
  ASSERT_EQ(lines.size(), 51u);
  EXPECT_EQ(lines[0], "epoch,split,loss,accuracy");
  EXPECT_EQ(lines[1].rfind("1,train,", 0), 0u);
  EXPECT_EQ(lines[50].rfind("25,val,", 0), 0u);
}

TEST(Curve, SingleEpochAndGaps) {
  TempDir dir;
  align::TrainLog one;
  one.rows.push_back({1, align::Split::Train, 0.5, 1.0});
  emit_curve(one, dir / "one.csv");
  EXPECT_EQ(read_lines(dir / "one.csv").size(), 2u);
  emit_curve(two_split_log(1), dir / "two.csv");
  EXPECT_EQ(read_lines(dir / "two.csv").size(), 3u);

  auto gap = two_split_log(3);
  gap.rows.erase(gap.rows.begin() + 2, gap.rows.begin() + 4);
  EXPECT_EQ(error_code_of([&] { emit_curve(gap, dir / "gap.csv"); }), Errc::InvalidArgument);
  EXPECT_FALSE(std::filesystem::exists(dir / "gap.csv"));
  EXPECT_EQ(error_code_of([&] { emit_curve(one, "/nonexistent/dir/curve.csv"); }), Errc::Io);
}
