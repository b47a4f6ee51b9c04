#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "folio/rag/engine.hpp"

namespace folio::eval {

struct BenchmarkItem {
  std::string question;
  std::string gold_answer;
  std::string gold_doc_id;
  int gold_page_no = 0;

  bool operator==(const BenchmarkItem&) const = default;
};

// One item per line: {"question","gold_answer","gold_doc_id","gold_page_no"}.
// Blank lines are skipped. Throws InvalidArgument naming the line.
std::vector<BenchmarkItem> parse_benchmark(std::string_view jsonl);
std::vector<BenchmarkItem> load_benchmark(const std::filesystem::path& path);
BenchmarkItem benchmark_item_from_json(const nlohmann::json& j);

struct ItemResult {
  std::size_t item = 0;  // position in the input
  bool valid = true;     // false when the gold page is not in the corpus
  std::optional<std::size_t> gold_rank;  // 1-based rank among merged hits
  std::optional<std::string> prediction;
  std::optional<bool> exact_match;
  std::optional<double> token_f1;
};

struct EvalReport {
  std::size_t n_items = 0;
  std::size_t n_invalid = 0;
  std::map<std::size_t, double> hit_at;  // k -> fraction of valid items
  std::optional<double> exact_match;
  std::optional<double> token_f1;
  std::vector<ItemResult> per_item;
};

nlohmann::json to_json(const EvalReport& report);

// hit@k: the gold (doc, page) is among the top-k text hits or the top-k image
// hits. Invalid items are excluded from the fractions and counted in n_invalid.
// Throws EmptyBenchmark.
EvalReport run_retrieval_eval(const rag::Engine& engine, const std::vector<BenchmarkItem>& items,
                              const std::vector<std::size_t>& ks = {1, 3, 5});

// Answers each valid item with the engine's generator and scores EM / token F1.
EvalReport run_qa_eval(const rag::Engine& engine, const std::vector<BenchmarkItem>& items);

// Retrieval and QA parts merged into one report.
EvalReport run_eval(const rag::Engine& engine, const std::vector<BenchmarkItem>& items,
                    const std::vector<std::size_t>& ks = {1, 3, 5}, bool with_qa = true);

}  // namespace folio::eval
