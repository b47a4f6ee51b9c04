#include "folio/corpus/manifest.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "folio/error.hpp"

namespace folio::corpus {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed, std::size_t line) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) throw MalformedManifest(line, "unknown key \"" + key + "\"");
  }
}

std::string get_string(const json& obj, const char* key, std::size_t line, bool required) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (required) throw MalformedManifest(line, std::string("missing \"") + key + "\"");
    return {};
  }
  if (!it->is_string()) throw MalformedManifest(line, std::string("\"") + key + "\" must be a string");
  return it->get<std::string>();
}

long long get_int(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw MalformedManifest(line, std::string("missing \"") + key + "\"");
  if (!it->is_number_integer()) {
    throw MalformedManifest(line, std::string("\"") + key + "\" must be an integer");
  }
  return it->get<long long>();
}

std::string resolve_ref(const std::string& ref, const std::filesystem::path& base_dir) {
  if (ref.empty() || is_url(ref)) return ref;
  std::filesystem::path p(ref);
  if (p.is_relative()) p = base_dir / p;
  return p.lexically_normal().string();
}

json parse_line(std::string_view line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw MalformedManifest(line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw MalformedManifest(line_no, "expected a JSON object");
  return j;
}

}  // namespace

bool is_valid_doc_id(std::string_view doc_id) {
  if (doc_id.empty()) return false;
  for (char c : doc_id) {
    const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
                    c == '.' || c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

bool is_url(std::string_view ref) { return ref.find("://") != std::string_view::npos; }

void validate_bundle(const DocumentBundle& bundle) {
  if (!is_valid_doc_id(bundle.doc_id)) {
    throw MalformedManifest(1, "doc_id \"" + bundle.doc_id + "\" must match [A-Za-z0-9._-]+");
  }
  for (std::size_t i = 0; i < bundle.pages.size(); ++i) {
    const auto& page = bundle.pages[i];
    const std::size_t line = i + 2;
    if (page.page_no != static_cast<int>(i) + 1) {
      throw MalformedManifest(line, "page_no " + std::to_string(page.page_no) + " out of sequence (expected " +
                                        std::to_string(i + 1) + ")");
    }
    if (page.image_ref.empty()) throw MalformedManifest(line, "image_ref must be nonempty");
    for (const auto& fig : page.figure_image_refs) {
      if (fig.image_ref.empty()) throw MalformedManifest(line, "figure image_ref must be nonempty");
    }
  }
}

DocumentBundle parse_manifest(std::string_view jsonl, const std::filesystem::path& base_dir) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    std::size_t nl = jsonl.find('\n', pos);
    if (nl == std::string_view::npos) nl = jsonl.size();
    std::string_view line = jsonl.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  while (!lines.empty() && lines.back().find_first_not_of(" \t") == std::string_view::npos) {
    lines.pop_back();
  }
  if (lines.empty()) throw MalformedManifest(1, "empty manifest");

  DocumentBundle bundle;
  const json header = parse_line(lines[0], 1);
  reject_unknown_keys(header, {"doc_id", "title", "pages"}, 1);
  bundle.doc_id = get_string(header, "doc_id", 1, true);
  bundle.title = get_string(header, "title", 1, false);
  const long long n_pages = get_int(header, "pages", 1);
  if (n_pages < 0) throw MalformedManifest(1, "\"pages\" must be nonnegative");
  if (!is_valid_doc_id(bundle.doc_id)) {
    throw MalformedManifest(1, "doc_id \"" + bundle.doc_id + "\" must match [A-Za-z0-9._-]+");
  }

  const auto declared = static_cast<std::size_t>(n_pages);
  if (lines.size() - 1 < declared) {
    throw MalformedManifest(lines.size() + 1, "header declares " + std::to_string(declared) +
                                                  " pages but only " + std::to_string(lines.size() - 1) +
                                                  " page lines follow");
  }
  if (lines.size() - 1 > declared) {
    throw MalformedManifest(declared + 2, "more page lines than the " + std::to_string(declared) +
                                              " declared in the header");
  }

  for (std::size_t i = 0; i < declared; ++i) {
    const std::size_t line_no = i + 2;
    const json j = parse_line(lines[i + 1], line_no);
    reject_unknown_keys(j, {"page_no", "image_ref", "text", "figure_image_refs"}, line_no);

    PageSource page;
    const long long page_no = get_int(j, "page_no", line_no);
    if (page_no < 1) throw MalformedManifest(line_no, "page_no must be positive");
    if (page_no != static_cast<long long>(i) + 1) {
      throw MalformedManifest(line_no, "page_no " + std::to_string(page_no) +
                                           " breaks the 1-based sequence (expected " +
                                           std::to_string(i + 1) + ")");
    }
    page.page_no = static_cast<int>(page_no);
    page.image_ref = resolve_ref(get_string(j, "image_ref", line_no, true), base_dir);
    if (page.image_ref.empty()) throw MalformedManifest(line_no, "image_ref must be nonempty");
    page.text = get_string(j, "text", line_no, false);

    if (auto it = j.find("figure_image_refs"); it != j.end() && !it->is_null()) {
      if (!it->is_array()) throw MalformedManifest(line_no, "\"figure_image_refs\" must be an array");
      for (const auto& fig : *it) {
        if (!fig.is_object()) throw MalformedManifest(line_no, "figure image entry must be an object");
        reject_unknown_keys(fig, {"label_hint", "image_ref"}, line_no);
        FigureImageRef ref;
        if (auto h = fig.find("label_hint"); h != fig.end() && !h->is_null()) {
          if (!h->is_string()) throw MalformedManifest(line_no, "\"label_hint\" must be a string");
          ref.label_hint = h->get<std::string>();
        }
        ref.image_ref = resolve_ref(get_string(fig, "image_ref", line_no, true), base_dir);
        if (ref.image_ref.empty()) throw MalformedManifest(line_no, "figure image_ref must be nonempty");
        page.figure_image_refs.push_back(std::move(ref));
      }
    }
    bundle.pages.push_back(std::move(page));
  }
  return bundle;
}

DocumentBundle load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open manifest " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), std::filesystem::absolute(path).parent_path());
}

std::string write_manifest(const DocumentBundle& bundle) {
  std::string out;
  out += json{{"doc_id", bundle.doc_id}, {"title", bundle.title}, {"pages", bundle.pages.size()}}.dump();
  out += '\n';
  for (const auto& page : bundle.pages) {
    json figs = json::array();
    for (const auto& f : page.figure_image_refs) {
      json fj{{"image_ref", f.image_ref}};
      fj["label_hint"] = f.label_hint ? json(*f.label_hint) : json(nullptr);
      figs.push_back(std::move(fj));
    }
    out += json{{"page_no", page.page_no},
                {"image_ref", page.image_ref},
                {"text", page.text},
                {"figure_image_refs", std::move(figs)}}
               .dump();
    out += '\n';
  }
  return out;
}

DocumentBundle bundle_from_records(std::string_view doc_id, std::string_view title,
                                   const std::vector<PageRecord>& records) {
  DocumentBundle bundle;
  bundle.doc_id = std::string(doc_id);
  bundle.title = std::string(title);
  for (const auto& rec : records) {
    PageSource page;
    page.page_no = rec.page_no;
    page.image_ref = rec.image_ref;
    page.text = rec.text;
    for (const auto& fig : rec.figures) {
      if (fig.image_ref) page.figure_image_refs.push_back({fig.label, *fig.image_ref});
    }
    bundle.pages.push_back(std::move(page));
  }
  return bundle;
}

}  // namespace folio::corpus
