#include "folio/eval/metrics.hpp"

#include <map>
#include <string>

#include "folio/util/text.hpp"

namespace folio::eval {

bool exact_match(std::string_view predicted, std::string_view gold) {
  return text::normalize_answer(predicted) == text::normalize_answer(gold);
}

double token_f1(std::string_view predicted, std::string_view gold) {
  const auto p_norm = text::normalize_answer(predicted);
  const auto g_norm = text::normalize_answer(gold);
  const auto p = text::split_whitespace(p_norm);
  const auto g = text::split_whitespace(g_norm);
  if (p.empty() || g.empty()) return p.empty() && g.empty() ? 1.0 : 0.0;

  std::map<std::string_view, int> counts;
  for (auto t : g) ++counts[t];
  std::size_t overlap = 0;
  for (auto t : p) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  const double precision = static_cast<double>(overlap) / static_cast<double>(p.size());
  const double recall = static_cast<double>(overlap) / static_cast<double>(g.size());
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace folio::eval
