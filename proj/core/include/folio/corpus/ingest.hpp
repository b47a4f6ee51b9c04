#pragma once

#include <vector>

#include "folio/corpus/chunking.hpp"
#include "folio/corpus/types.hpp"

namespace folio::corpus {

struct IngestOptions {
  ChunkingOptions chunking;
  // Local image refs must exist on disk; URL refs are never checked.
  bool require_images = true;
};

// One PageRecord per page in page order, with cleaned figure pairs and chunks.
// Throws MalformedManifest on invariant violations and MissingImage when a
// referenced local image file is absent.
std::vector<PageRecord> ingest_bundle(const DocumentBundle& bundle, const IngestOptions& opts = {});

// Attaches figure images to captions: label-hint number match first, then
// remaining images in order of appearance to captions still lacking one.
void associate_figure_images(std::vector<FigureCaptionPair>& figures,
                             const std::vector<FigureImageRef>& refs);

}  // namespace folio::corpus
