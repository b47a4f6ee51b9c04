#pragma once

#include <string>

namespace folio::net {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

// Throws InvalidArgument unless url is absolute.
ParsedUrl parse_url(const std::string& url);

}  // namespace folio::net
