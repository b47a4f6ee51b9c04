#pragma once

#include <string_view>

namespace folio::eval {

// Both compare answers after lowercasing, stripping ASCII punctuation and
// collapsing whitespace.
bool exact_match(std::string_view predicted, std::string_view gold);

// Harmonic mean of token precision and recall with multiset overlap; 0 when
// either side is empty, unless both are.
double token_f1(std::string_view predicted, std::string_view gold);

}  // namespace folio::eval
