#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "folio/corpus/types.hpp"

namespace folio::corpus {

// Parses the JSON-lines bundle manifest. Line 1 is the header
// {"doc_id","title","pages":N}; lines 2..N+1 are pages. Unknown keys are
// rejected, and relative image refs are resolved against base_dir (refs that
// carry a URL scheme are kept verbatim). Throws MalformedManifest.
DocumentBundle parse_manifest(std::string_view jsonl, const std::filesystem::path& base_dir);

DocumentBundle load_manifest(const std::filesystem::path& path);

std::string write_manifest(const DocumentBundle& bundle);

// Checks the bundle invariants that do not depend on the filesystem.
void validate_bundle(const DocumentBundle& bundle);

bool is_valid_doc_id(std::string_view doc_id);

bool is_url(std::string_view ref);

// Bundle that re-ingests to the given records (figure images become label-hinted refs).
DocumentBundle bundle_from_records(std::string_view doc_id, std::string_view title,
                                   const std::vector<PageRecord>& records);

}  // namespace folio::corpus
