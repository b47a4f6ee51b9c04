#include "folio/corpus/captions.hpp"

#include <cctype>
#include <regex>
#include <string>

#include "folio/util/text.hpp"

namespace folio::corpus {

namespace {

// Label grammar, anchored at line start (leading OCR indentation tolerated).
const std::regex& caption_line_regex() {
  static const std::regex re(R"(^[ \t]*(Figure|Fig\.?)[ \t]*([0-9]+)[ \t]*[.:][ \t]*(\S.*)$)");
  return re;
}

const std::regex& leading_label_regex() {
  static const std::regex re(R"(^(Figure|Fig\.?)[ \t]*[0-9]+[ \t]*[.:]?[ \t]*)");
  return re;
}

bool is_trailing_punct(char c) {
  return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?';
}

bool has_alpha(std::string_view token) {
  for (char c : token) {
    const auto u = static_cast<unsigned char>(c);
    // Non-ASCII bytes belong to UTF-8 letters in practice; count them.
    if (u >= 0x80 || std::isalpha(u)) return true;
  }
  return false;
}

std::string apply_rules_once(std::string_view in) {
  std::string s = text::join(text::split_whitespace(in));

  std::smatch m;
  if (std::regex_search(s, m, leading_label_regex()) && m.length(0) < static_cast<long>(s.size())) {
    s = s.substr(static_cast<std::size_t>(m.length(0)));
  }

  if (!s.empty() && is_trailing_punct(s.back())) {
    std::size_t run = s.size();
    while (run > 0 && is_trailing_punct(s[run - 1])) --run;
    if (s.size() - run > 1) s = s.substr(0, run + 1);
  }
  return std::string(text::trim(s));
}

}  // namespace

std::vector<FigureCaptionPair> extract_figure_pairs(std::string_view page_text) {
  std::vector<FigureCaptionPair> out;
  std::size_t pos = 0;
  while (pos <= page_text.size()) {
    std::size_t nl = page_text.find('\n', pos);
    if (nl == std::string_view::npos) nl = page_text.size();
    std::string line(page_text.substr(pos, nl - pos));
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::smatch m;
    if (std::regex_match(line, m, caption_line_regex())) {
      std::string word = m[1].str();
      if (word.back() == '.') word.pop_back();
      FigureCaptionPair pair;
      pair.label = word + " " + std::to_string(std::stoi(m[2].str()));
      pair.caption_raw = std::string(text::trim(m[3].str()));
      out.push_back(std::move(pair));
    }
    if (nl == page_text.size()) break;
    pos = nl + 1;
  }
  return out;
}

std::string clean_caption_text(std::string_view raw) {
  std::string current = apply_rules_once(raw);
  for (;;) {
    std::string next = apply_rules_once(current);
    if (next == current) return current;
    current = std::move(next);
  }
}

std::optional<FigureCaptionPair> clean_caption(FigureCaptionPair pair) {
  // Re-cleaning an already-clean pair starts from the clean text.
  std::string cleaned = clean_caption_text(pair.caption_clean.empty() ? pair.caption_raw
                                                                      : pair.caption_clean);
  int alpha_tokens = 0;
  for (auto tok : text::split_whitespace(cleaned)) {
    if (has_alpha(tok)) ++alpha_tokens;
  }
  if (alpha_tokens < 2) return std::nullopt;
  pair.caption_clean = std::move(cleaned);
  return pair;
}

std::optional<int> figure_number(std::string_view label) {
  std::size_t i = 0;
  while (i < label.size() && !std::isdigit(static_cast<unsigned char>(label[i]))) ++i;
  if (i == label.size()) return std::nullopt;
  int n = 0;
  while (i < label.size() && std::isdigit(static_cast<unsigned char>(label[i]))) {
    n = n * 10 + (label[i] - '0');
    if (n > 1'000'000) return std::nullopt;
    ++i;
  }
  return n;
}

}  // namespace folio::corpus
