#include "folio/corpus/ingest.hpp"

#include <filesystem>

#include "folio/corpus/captions.hpp"
#include "folio/corpus/manifest.hpp"
#include "folio/error.hpp"

namespace folio::corpus {

namespace {

void require_image(const std::string& ref) {
  if (is_url(ref)) return;
  std::error_code ec;
  if (!std::filesystem::is_regular_file(ref, ec)) {
    throw Error(Errc::MissingImage, "missing image: " + ref);
  }
}

}  // namespace

void associate_figure_images(std::vector<FigureCaptionPair>& figures,
                             const std::vector<FigureImageRef>& refs) {
  std::vector<bool> used(refs.size(), false);

  for (std::size_t r = 0; r < refs.size(); ++r) {
    if (!refs[r].label_hint) continue;
    const auto hint = figure_number(*refs[r].label_hint);
    if (!hint) continue;
    for (auto& fig : figures) {
      if (!fig.image_ref && figure_number(fig.label) == hint) {
        fig.image_ref = refs[r].image_ref;
        used[r] = true;
        break;
      }
    }
  }

  std::size_t next = 0;
  for (auto& fig : figures) {
    if (fig.image_ref) continue;
    while (next < refs.size() && used[next]) ++next;
    if (next == refs.size()) break;
    fig.image_ref = refs[next].image_ref;
    used[next] = true;
  }
}

std::vector<PageRecord> ingest_bundle(const DocumentBundle& bundle, const IngestOptions& opts) {
  validate_bundle(bundle);
  // Validate chunking up front so a bad config fails before any work.
  (void)tile_units(0, opts.chunking);

  if (opts.require_images) {
    for (const auto& page : bundle.pages) {
      require_image(page.image_ref);
      for (const auto& fig : page.figure_image_refs) require_image(fig.image_ref);
    }
  }

  std::vector<PageRecord> records;
  records.reserve(bundle.pages.size());
  for (const auto& page : bundle.pages) {
    PageRecord rec;
    rec.doc_id = bundle.doc_id;
    rec.page_no = page.page_no;
    rec.image_ref = page.image_ref;
    rec.text = page.text;

    for (auto& raw : extract_figure_pairs(page.text)) {
      if (auto cleaned = clean_caption(std::move(raw))) rec.figures.push_back(std::move(*cleaned));
    }
    associate_figure_images(rec.figures, page.figure_image_refs);

    const std::string prefix = bundle.doc_id + ":" + std::to_string(page.page_no);
    rec.chunks = chunk_text(page.text, opts.chunking, prefix);
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace folio::corpus
