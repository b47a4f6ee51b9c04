#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "folio/corpus/types.hpp"

namespace folio::corpus {

// One pair per line that starts with `Fig`, `Fig.` or `Figure`, an integer,
// then `.` or `:` and non-empty caption text. Only label and caption_raw are
// filled in; results are in document order.
std::vector<FigureCaptionPair> extract_figure_pairs(std::string_view page_text);

// Returns the pair with caption_clean set, or nullopt when the cleaned caption
// keeps fewer than two alphabetic tokens. Idempotent.
std::optional<FigureCaptionPair> clean_caption(FigureCaptionPair pair);

// The caption rules on their own, for callers holding a bare string.
std::string clean_caption_text(std::string_view raw);

// Figure number of a label or label hint ("Fig 4", "Figure 4", "fig. 4"),
// or nullopt if none can be read.
std::optional<int> figure_number(std::string_view label);

}  // namespace folio::corpus
