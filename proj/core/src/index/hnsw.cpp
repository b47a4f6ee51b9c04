#include "folio/index/hnsw.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "folio/error.hpp"

namespace folio::index {

void validate(const HnswConfig& cfg) {
  if (cfg.M < 2) throw Error(Errc::InvalidArgument, "HNSW M must be >= 2");
  if (cfg.ef_construction < 1) throw Error(Errc::InvalidArgument, "HNSW ef_construction must be >= 1");
  if (cfg.ef_search < 1) throw Error(Errc::InvalidArgument, "HNSW ef_search must be >= 1");
}

float dot_similarity(const float* a, const float* b, std::size_t dim) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < dim; ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return static_cast<float>(s);
}

namespace {

// Orders candidates best-first: higher similarity, then lower slot.
struct BetterFirst {
  bool operator()(const std::pair<float, std::uint32_t>& a, const std::pair<float, std::uint32_t>& b) const {
    return a.first != b.first ? a.first < b.first : a.second > b.second;
  }
};

// Orders so the top is the worst kept result.
struct WorstFirst {
  bool operator()(const std::pair<float, std::uint32_t>& a, const std::pair<float, std::uint32_t>& b) const {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  }
};

}  // namespace

HnswGraph::HnswGraph(const HnswConfig& cfg)
    : cfg_(cfg), level_mult_(1.0 / std::log(static_cast<double>(std::max<std::size_t>(cfg.M, 2)))), rng_(cfg.seed) {
  validate(cfg_);
}

int HnswGraph::draw_level() {
  // Uniform in (0, 1]; never zero so the log is finite.
  const double u = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
  return static_cast<int>(std::floor(-std::log(u) * level_mult_));
}

std::uint32_t HnswGraph::greedy_descend(const float* query, VectorView vectors, std::uint32_t entry, int from_level,
                                        int to_level) const {
  std::uint32_t cur = entry;
  float cur_sim = dot_similarity(query, vectors.at(cur), vectors.dim);
  for (int level = from_level; level > to_level; --level) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::uint32_t n : links_[cur][static_cast<std::size_t>(level)]) {
        const float s = dot_similarity(query, vectors.at(n), vectors.dim);
        if (s > cur_sim || (s == cur_sim && n < cur)) {
          cur = n;
          cur_sim = s;
          changed = true;
        }
      }
    }
  }
  return cur;
}

std::vector<HnswGraph::Candidate> HnswGraph::search_layer(const float* query, VectorView vectors,
                                                          std::uint32_t entry, std::size_t ef, int level,
                                                          const std::function<bool(std::uint32_t)>* accept) const {
  std::vector<char> visited(levels_.size(), 0);
  std::priority_queue<Candidate, std::vector<Candidate>, BetterFirst> candidates;
  std::priority_queue<Candidate, std::vector<Candidate>, WorstFirst> results;

  const float entry_sim = dot_similarity(query, vectors.at(entry), vectors.dim);
  visited[entry] = 1;
  candidates.emplace(entry_sim, entry);
  if (!accept || (*accept)(entry)) results.emplace(entry_sim, entry);

  while (!candidates.empty()) {
    const Candidate c = candidates.top();
    if (results.size() >= ef && c.first < results.top().first) break;
    candidates.pop();
    for (std::uint32_t n : links_[c.second][static_cast<std::size_t>(level)]) {
      if (visited[n]) continue;
      visited[n] = 1;
      const float s = dot_similarity(query, vectors.at(n), vectors.dim);
      if (results.size() < ef || s > results.top().first) {
        candidates.emplace(s, n);
        if (!accept || (*accept)(n)) {
          results.emplace(s, n);
          if (results.size() > ef) results.pop();
        }
      }
    }
  }

  std::vector<Candidate> out;
  out.reserve(results.size());
  while (!results.empty()) {
    out.push_back(results.top());
    results.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<std::uint32_t> HnswGraph::select_neighbors(std::vector<Candidate> candidates, std::size_t m,
                                                       VectorView vectors) const {
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<std::uint32_t> chosen;
  chosen.reserve(m);
  for (const auto& [sim, node] : candidates) {
    if (chosen.size() >= m) break;
    // Keep a candidate only if it is closer to the base point than to every
    // neighbor already chosen; this spreads links across directions.
    bool diverse = true;
    for (std::uint32_t c : chosen) {
      if (dot_similarity(vectors.at(node), vectors.at(c), vectors.dim) > sim) {
        diverse = false;
        break;
      }
    }
    if (diverse) chosen.push_back(node);
  }
  return chosen;
}

void HnswGraph::shrink(std::uint32_t node, int level, VectorView vectors) {
  auto& links = links_[node][static_cast<std::size_t>(level)];
  const std::size_t cap = max_links(level);
  if (links.size() <= cap) return;
  std::vector<Candidate> cands;
  cands.reserve(links.size());
  for (std::uint32_t n : links) cands.emplace_back(dot_similarity(vectors.at(node), vectors.at(n), vectors.dim), n);
  links = select_neighbors(std::move(cands), cap, vectors);
}

void HnswGraph::insert(std::uint32_t slot, VectorView vectors) {
  if (slot != levels_.size()) throw Error(Errc::InvalidArgument, "HNSW slots must be inserted in order");
  const int level = draw_level();
  levels_.push_back(level);
  links_.emplace_back(static_cast<std::size_t>(level) + 1);

  if (max_level_ < 0) {
    entry_ = slot;
    max_level_ = level;
    return;
  }

  const float* q = vectors.at(slot);
  std::uint32_t ep = greedy_descend(q, vectors, entry_, max_level_, level);
  for (int lc = std::min(level, max_level_); lc >= 0; --lc) {
    auto found = search_layer(q, vectors, ep, cfg_.ef_construction, lc, nullptr);
    auto chosen = select_neighbors(found, cfg_.M, vectors);
    links_[slot][static_cast<std::size_t>(lc)] = chosen;
    for (std::uint32_t n : chosen) {
      links_[n][static_cast<std::size_t>(lc)].push_back(slot);
      shrink(n, lc, vectors);
    }
    if (!found.empty()) ep = found.front().second;
  }
  if (level > max_level_) {
    max_level_ = level;
    entry_ = slot;
  }
}

std::vector<std::pair<float, std::uint32_t>> HnswGraph::search(
    const float* query, VectorView vectors, std::size_t ef, const std::function<bool(std::uint32_t)>& accept) const {
  if (levels_.empty()) return {};
  const std::uint32_t ep = greedy_descend(query, vectors, entry_, max_level_, 0);
  return search_layer(query, vectors, ep, ef, 0, &accept);
}

}  // namespace folio::index
