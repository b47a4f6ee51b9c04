#include "folio/eval/benchmark.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "folio/error.hpp"
#include "folio/eval/metrics.hpp"

namespace folio::eval {

using nlohmann::json;

namespace {

std::optional<std::size_t> rank_of(const std::vector<index::SearchHit>& hits, const BenchmarkItem& item) {
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i].payload.doc_id == item.gold_doc_id && hits[i].payload.page_no == item.gold_page_no) return i + 1;
  }
  return std::nullopt;
}

void require_items(const std::vector<BenchmarkItem>& items) {
  if (items.empty()) throw Error(Errc::EmptyBenchmark, "benchmark has no items");
}

}  // namespace

BenchmarkItem benchmark_item_from_json(const json& j) {
  BenchmarkItem item;
  item.question = j.at("question").get<std::string>();
  item.gold_answer = j.at("gold_answer").get<std::string>();
  item.gold_doc_id = j.at("gold_doc_id").get<std::string>();
  item.gold_page_no = j.at("gold_page_no").get<int>();
  if (item.question.empty() || item.gold_answer.empty() || item.gold_doc_id.empty() || item.gold_page_no < 1) {
    throw Error(Errc::InvalidArgument, "benchmark item fields must be nonempty");
  }
  return item;
}

std::vector<BenchmarkItem> parse_benchmark(std::string_view jsonl) {
  std::vector<BenchmarkItem> items;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      items.push_back(benchmark_item_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw Error(Errc::InvalidArgument, "benchmark line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return items;
}

std::vector<BenchmarkItem> load_benchmark(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_benchmark(ss.str());
}

json to_json(const EvalReport& report) {
  json hit_at = json::object();
  for (const auto& [k, v] : report.hit_at) hit_at[std::to_string(k)] = v;
  json rows = json::array();
  for (const auto& r : report.per_item) {
    json row{{"item", r.item}, {"valid", r.valid}};
    row["gold_rank"] = r.gold_rank ? json(*r.gold_rank) : json(nullptr);
    if (r.prediction) row["prediction"] = *r.prediction;
    if (r.exact_match) row["exact_match"] = *r.exact_match;
    if (r.token_f1) row["token_f1"] = *r.token_f1;
    rows.push_back(std::move(row));
  }
  json j{{"n_items", report.n_items}, {"n_invalid", report.n_invalid}, {"hit_at", hit_at}, {"per_item", rows}};
  j["exact_match"] = report.exact_match ? json(*report.exact_match) : json(nullptr);
  j["token_f1"] = report.token_f1 ? json(*report.token_f1) : json(nullptr);
  return j;
}

EvalReport run_retrieval_eval(const rag::Engine& engine, const std::vector<BenchmarkItem>& items,
                              const std::vector<std::size_t>& ks) {
  require_items(items);
  const std::size_t k_max = ks.empty() ? 0 : *std::max_element(ks.begin(), ks.end());

  EvalReport report;
  report.n_items = items.size();
  std::map<std::size_t, std::size_t> hits;
  for (auto k : ks) hits[k] = 0;

  for (std::size_t i = 0; i < items.size(); ++i) {
    ItemResult row;
    row.item = i;
    row.valid = engine.has_page(items[i].gold_doc_id, items[i].gold_page_no);
    if (!row.valid) {
      ++report.n_invalid;
      report.per_item.push_back(row);
      continue;
    }
    const auto result = engine.retrieve(items[i].question, k_max, k_max);
    const auto t = rank_of(result.text_hits, items[i]);
    const auto im = rank_of(result.image_hits, items[i]);
    if (t && im) row.gold_rank = std::min(*t, *im);
    else if (t) row.gold_rank = t;
    else row.gold_rank = im;
    for (auto& [k, n] : hits) {
      if (row.gold_rank && *row.gold_rank <= k) ++n;
    }
    report.per_item.push_back(row);
  }
  const std::size_t valid = report.n_items - report.n_invalid;
  for (const auto& [k, n] : hits) {
    report.hit_at[k] = valid == 0 ? 0.0 : static_cast<double>(n) / static_cast<double>(valid);
  }
  return report;
}

EvalReport run_qa_eval(const rag::Engine& engine, const std::vector<BenchmarkItem>& items) {
  require_items(items);
  EvalReport report;
  report.n_items = items.size();
  double em_sum = 0.0;
  double f1_sum = 0.0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    ItemResult row;
    row.item = i;
    row.valid = engine.has_page(items[i].gold_doc_id, items[i].gold_page_no);
    if (!row.valid) {
      ++report.n_invalid;
      report.per_item.push_back(row);
      continue;
    }
    auto [prompt, text] = engine.answer(items[i].question);
    row.exact_match = exact_match(text, items[i].gold_answer);
    row.token_f1 = token_f1(text, items[i].gold_answer);
    row.prediction = std::move(text);
    em_sum += *row.exact_match ? 1.0 : 0.0;
    f1_sum += *row.token_f1;
    report.per_item.push_back(std::move(row));
  }
  const std::size_t valid = report.n_items - report.n_invalid;
  report.exact_match = valid == 0 ? 0.0 : em_sum / static_cast<double>(valid);
  report.token_f1 = valid == 0 ? 0.0 : f1_sum / static_cast<double>(valid);
  return report;
}

EvalReport run_eval(const rag::Engine& engine, const std::vector<BenchmarkItem>& items,
                    const std::vector<std::size_t>& ks, bool with_qa) {
  auto report = run_retrieval_eval(engine, items, ks);
  if (!with_qa) return report;
  const auto qa = run_qa_eval(engine, items);
  report.exact_match = qa.exact_match;
  report.token_f1 = qa.token_f1;
  for (std::size_t i = 0; i < report.per_item.size(); ++i) {
    report.per_item[i].prediction = qa.per_item[i].prediction;
    report.per_item[i].exact_match = qa.per_item[i].exact_match;
    report.per_item[i].token_f1 = qa.per_item[i].token_f1;
  }
  return report;
}

}  // namespace folio::eval
