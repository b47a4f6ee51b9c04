#include <gtest/gtest.h>

#include <random>
#include <set>

#include "folio/corpus/captions.hpp"
#include "folio/corpus/chunking.hpp"
#include "folio/corpus/ingest.hpp"
#include "folio/corpus/manifest.hpp"
#include "folio/corpus/store.hpp"
#include "folio/error.hpp"
#include "expect_error.hpp"
#include "support.hpp"

using namespace folio;
using namespace folio::corpus;
using folio::testing::TempDir;
using folio::testing::write_text;
using folio::testing::error_code_of;

namespace {

DocumentBundle two_page_bundle(const TempDir& dir, const std::string& page2_text = "second page") {
  write_text(dir / "p1.png", "one");
  write_text(dir / "p2.png", "two");
  DocumentBundle b;
  b.doc_id = "docA";
  b.title = "A";
  b.pages.push_back({1, (dir / "p1.png").string(), "first page text", {}});
  b.pages.push_back({2, (dir / "p2.png").string(), page2_text, {}});
  return b;
}

}  // namespace

TEST(Captions, ExtractsFourthFigureCaption) {
  auto pairs = extract_figure_pairs("Fig 4. Graph of Accuracy over Epochs");
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].label, "Fig 4");
  EXPECT_EQ(pairs[0].caption_raw, "Graph of Accuracy over Epochs");
}

TEST(Captions, ExtractsLongCaption) {
  auto pairs = extract_figure_pairs("Fig 2. Example of prompt on a Brain Tumor image taken from a research paper");
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].label, "Fig 2");
  EXPECT_EQ(pairs[0].caption_raw, "Example of prompt on a Brain Tumor image taken from a research paper");
}

TEST(Captions, IgnoresProseMentioningFigures) {
  EXPECT_TRUE(extract_figure_pairs("This paragraph mentions figure quality but has no caption line.").empty());
  EXPECT_TRUE(extract_figure_pairs("As shown in Fig 3. the curve rises.").empty());
  EXPECT_TRUE(extract_figure_pairs("Figure without number: nothing").empty());
}

TEST(Captions, LabelVariants) {
  auto pairs = extract_figure_pairs("Figure 12: Results table\n  Fig. 3 : Indented caption here\nFig7.Tight spacing works");
  ASSERT_EQ(pairs.size(), 3u);
  EXPECT_EQ(pairs[0].label, "Figure 12");
  EXPECT_EQ(pairs[1].label, "Fig 3");
  EXPECT_EQ(pairs[1].caption_raw, "Indented caption here");
  EXPECT_EQ(pairs[2].label, "Fig 7");
  EXPECT_EQ(pairs[2].caption_raw, "Tight spacing works");
}

TEST(Captions, InsensitiveToSurroundingLines) {
  const std::string body = "Fig 1. Model Interface\nFig 4. Graph of Accuracy over Epochs";
  const auto base = extract_figure_pairs(body);
  EXPECT_EQ(extract_figure_pairs("intro line\n" + body + "\ntrailing words here"), base);
  EXPECT_EQ(base.size(), 2u);
}

TEST(Captions, CleanCollapsesWhitespace) {
  FigureCaptionPair p{"Fig 1", "  Model    Interface ", "", std::nullopt};
  auto c = clean_caption(p);
  ASSERT_TRUE(c);
  EXPECT_EQ(c->caption_clean, "Model Interface");
}

TEST(Captions, CleanLeavesTidyCaptionAlone) {
  auto c = clean_caption({"Fig 4", "Graph of Accuracy over Epochs", "", std::nullopt});
  ASSERT_TRUE(c);
  EXPECT_EQ(c->caption_clean, "Graph of Accuracy over Epochs");
}

TEST(Captions, CleanRejectsNumericCaption) {
  EXPECT_FALSE(clean_caption({"Fig 9", "7 %", "", std::nullopt}));
  EXPECT_FALSE(clean_caption({"Fig 9", "Results", "", std::nullopt}));
}

TEST(Captions, CleanStripsLabelAndTrailingPunctuation) {
  EXPECT_EQ(clean_caption_text("Fig 3. Loss curves for training!!!"), "Loss curves for training!");
  EXPECT_EQ(clean_caption_text("Figure 2: Figure 2: nested label text..."), "nested label text.");
}

TEST(Captions, CleanIsIdempotent) {
  const std::vector<std::string> raws = {"  a   b  ", "Fig 1. Fig 2. two labels here;;", "x y z ...",
                                         "Model Interface", "Figure 3:   spaced   out   text?!?"};
  for (const auto& raw : raws) {
    auto once = clean_caption({"Fig 1", raw, "", std::nullopt});
    if (!once) continue;
    auto twice = clean_caption(*once);
    ASSERT_TRUE(twice) << raw;
    EXPECT_EQ(twice->caption_clean, once->caption_clean) << raw;
  }
}

TEST(Chunking, GreedyTilingWithOverlap) {
  auto spans = tile_units(10, {4, 1});
  ASSERT_EQ(spans.size(), 3u);
  EXPECT_EQ(spans[0], (UnitSpan{0, 4}));
  EXPECT_EQ(spans[1], (UnitSpan{3, 7}));
  EXPECT_EQ(spans[2], (UnitSpan{6, 10}));
}

TEST(Chunking, EmptyTextHasNoChunks) { EXPECT_TRUE(chunk_text("", {4, 1}).empty()); }

TEST(Chunking, OverlapMustBeBelowMax) {
  EXPECT_EQ(error_code_of([] { tile_units(10, {4, 4}); }), Errc::InvalidChunking);
  EXPECT_EQ(error_code_of([] { tile_units(10, {0, 0}); }), Errc::InvalidChunking);
}

TEST(Chunking, IdsAndText) {
  auto chunks = chunk_text("a b c d e f", {4, 1}, "doc:2");
  ASSERT_EQ(chunks.size(), 2u);
  EXPECT_EQ(chunks[0].chunk_id, "doc:2:0");
  EXPECT_EQ(chunks[0].text, "a b c d");
  EXPECT_EQ(chunks[1].chunk_id, "doc:2:1");
  EXPECT_EQ(chunks[1].text, "d e f");
  EXPECT_EQ(chunk_id("docA", 3, 7), "docA:3:7");
}

TEST(Chunking, CoverageProperty) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = rng() % 200;
    const std::size_t max_units = 1 + rng() % 20;
    const std::size_t overlap = rng() % max_units;
    const auto spans = tile_units(n, {max_units, overlap});
    std::vector<int> cover(n, 0);
    for (const auto& s : spans) {
      ASSERT_GE(s.size(), 1u);
      ASSERT_LE(s.size(), max_units);
      for (auto i = s.start; i < s.end; ++i) ++cover[i];
    }
    for (std::size_t i = 0; i < n; ++i) ASSERT_GE(cover[i], 1) << "token " << i << " uncovered";
    std::size_t shared_actual = 0;
    for (std::size_t i = 1; i < spans.size(); ++i) {
      ASSERT_EQ(spans[i].start, spans[i - 1].end - overlap);
      shared_actual += spans[i - 1].end - spans[i].start;
    }
    std::size_t doubled = 0;
    for (int c : cover) doubled += static_cast<std::size_t>(c >= 2);
    if (spans.size() >= 2 && n >= max_units && 2 * overlap <= max_units) {
      EXPECT_EQ(doubled, overlap * (spans.size() - 1));
      EXPECT_EQ(shared_actual, doubled);
    }
  }
}

TEST(Manifest, ParsesAndResolvesRelativeRefs) {
  const std::string m =
      R"({"doc_id":"docA","title":"T","pages":2})"
      "\n"
      R"({"page_no":1,"image_ref":"img/p1.png","text":"hello","figure_image_refs":[{"label_hint":"Fig 1","image_ref":"f1.png"}]})"
      "\n"
      R"({"page_no":2,"image_ref":"https://example.org/p2.png","text":""})"
      "\n";
  auto b = parse_manifest(m, "/data/bundles");
  EXPECT_EQ(b.doc_id, "docA");
  ASSERT_EQ(b.pages.size(), 2u);
  EXPECT_EQ(b.pages[0].image_ref, "/data/bundles/img/p1.png");
  ASSERT_EQ(b.pages[0].figure_image_refs.size(), 1u);
  EXPECT_EQ(b.pages[0].figure_image_refs[0].label_hint, "Fig 1");
  EXPECT_EQ(b.pages[1].image_ref, "https://example.org/p2.png");
}

TEST(Manifest, PageGapNamesOffendingLine) {
  const std::string m = R"({"doc_id":"docA","title":"T","pages":2})"
                        "\n"
                        R"({"page_no":1,"image_ref":"a.png","text":""})"
                        "\n"
                        R"({"page_no":3,"image_ref":"b.png","text":""})"
                        "\n";
  try {
    parse_manifest(m, ".");
    FAIL() << "gap accepted";
  } catch (const MalformedManifest& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Manifest, RejectsUnknownKeysAndBadIds) {
  EXPECT_THROW(parse_manifest(R"({"doc_id":"a","title":"t","pages":0,"extra":1})", "."), MalformedManifest);
  EXPECT_THROW(parse_manifest(R"({"doc_id":"bad id","title":"t","pages":0})", "."), MalformedManifest);
  EXPECT_THROW(parse_manifest(R"({"doc_id":"a","title":"t","pages":1})", "."), MalformedManifest);
  EXPECT_THROW(parse_manifest("not json", "."), MalformedManifest);
}

TEST(Ingest, TwoPagesInOrder) {
  TempDir dir;
  auto records = ingest_bundle(two_page_bundle(dir));
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].page_no, 1);
  EXPECT_EQ(records[1].page_no, 2);
  EXPECT_EQ(records[0].chunks.at(0).chunk_id, "docA:1:0");
}

TEST(Ingest, PageGapIsMalformed) {
  TempDir dir;
  auto b = two_page_bundle(dir);
  b.pages[1].page_no = 3;
  EXPECT_THROW(ingest_bundle(b), MalformedManifest);
}

TEST(Ingest, CaptionOnSecondPage) {
  TempDir dir;
  auto records = ingest_bundle(two_page_bundle(dir, "Some body text.\nFig 1. Model Interface\nMore text."));
  EXPECT_TRUE(records[0].figures.empty());
  ASSERT_EQ(records[1].figures.size(), 1u);
  EXPECT_EQ(records[1].figures[0].label, "Fig 1");
  EXPECT_EQ(records[1].figures[0].caption_clean, "Model Interface");
}

TEST(Ingest, MissingImage) {
  TempDir dir;
  auto b = two_page_bundle(dir);
  b.pages[0].image_ref = (dir / "absent.png").string();
  EXPECT_EQ(error_code_of([&] { ingest_bundle(b); }), Errc::MissingImage);
  EXPECT_NO_THROW(ingest_bundle(b, {{}, false}));
}

TEST(Ingest, FigureImagesMatchHintsThenOrder) {
  std::vector<FigureCaptionPair> figs = {{"Fig 1", "a b", "a b", std::nullopt},
                                         {"Fig 2", "c d", "c d", std::nullopt},
                                         {"Fig 3", "e f", "e f", std::nullopt}};
  associate_figure_images(figs, {{std::nullopt, "x.png"}, {"Figure 3", "three.png"}, {std::nullopt, "y.png"}});
  EXPECT_EQ(figs[0].image_ref, "x.png");
  EXPECT_EQ(figs[1].image_ref, "y.png");
  EXPECT_EQ(figs[2].image_ref, "three.png");
}

TEST(Ingest, ManifestRoundTripYieldsEqualRecords) {
  TempDir dir;
  write_text(dir / "f1.png", "fig");
  auto b = two_page_bundle(dir, "Body.\nFig 1. Model Interface\nFig 2: Example of prompt on a Brain Tumor image");
  b.pages[1].figure_image_refs.push_back({"Fig 1", (dir / "f1.png").string()});
  const auto records = ingest_bundle(b);
  const auto text = write_manifest(bundle_from_records(b.doc_id, b.title, records));
  const auto again = ingest_bundle(parse_manifest(text, dir.path()));
  EXPECT_EQ(again, records);
}

TEST(Store, AddListGetAndPersist) {
  TempDir dir;
  CorpusStore store;
  StoredDocument doc{"docA", "Title", ingest_bundle(two_page_bundle(dir)), {}};
  doc.image_vectors.push_back({"docA", 1, std::nullopt, "p1.png", "", {0.6f, 0.8f}});
  store.add(doc);
  EXPECT_EQ(error_code_of([&] { store.add(doc); }), Errc::DuplicateDocId);
  ASSERT_EQ(store.list().size(), 1u);
  EXPECT_EQ(store.list()[0].pages, 2u);
  EXPECT_TRUE(store.page("docA", 2));
  EXPECT_FALSE(store.page("docA", 3));

  store.save(dir / "corpus.jsonl");
  CorpusStore loaded;
  loaded.load(dir / "corpus.jsonl");
  ASSERT_TRUE(loaded.get("docA"));
  EXPECT_EQ(loaded.get("docA")->pages, doc.pages);
  EXPECT_EQ(loaded.get("docA")->image_vectors, doc.image_vectors);
}
