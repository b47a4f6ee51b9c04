#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

namespace folio::index {

struct HnswConfig {
  std::size_t M = 16;
  std::size_t ef_construction = 200;
  std::size_t ef_search = 64;
  std::uint64_t seed = 42;
};

void validate(const HnswConfig& cfg);

// Read-only view of slot-major vectors: slot i lives at data + i * dim.
struct VectorView {
  const float* data = nullptr;
  std::size_t dim = 0;

  const float* at(std::uint32_t slot) const noexcept { return data + static_cast<std::size_t>(slot) * dim; }
};

// Similarity used by the graph and by flat search: f32 inputs, f64 accumulation.
float dot_similarity(const float* a, const float* b, std::size_t dim) noexcept;

// Hierarchical navigable small-world graph over slots 0..n-1 (inserted in
// order). Nodes are never removed; callers hide tombstoned slots through the
// accept predicate at query time.
class HnswGraph {
 public:
  explicit HnswGraph(const HnswConfig& cfg);

  // slot must equal size().
  void insert(std::uint32_t slot, VectorView vectors);

  // Up to `ef` accepted slots nearest to query, sorted by descending
  // similarity then ascending slot. Rejected slots are still traversed.
  std::vector<std::pair<float, std::uint32_t>> search(const float* query, VectorView vectors, std::size_t ef,
                                                      const std::function<bool(std::uint32_t)>& accept) const;

  std::size_t size() const noexcept { return levels_.size(); }
  const HnswConfig& config() const noexcept { return cfg_; }
  int max_level() const noexcept { return max_level_; }

  const std::vector<std::uint32_t>& neighbors(std::uint32_t slot, int level) const {
    return links_[slot][static_cast<std::size_t>(level)];
  }

 private:
  using Candidate = std::pair<float, std::uint32_t>;

  int draw_level();
  std::size_t max_links(int level) const noexcept { return level == 0 ? 2 * cfg_.M : cfg_.M; }

  std::uint32_t greedy_descend(const float* query, VectorView vectors, std::uint32_t entry, int from_level,
                               int to_level) const;
  std::vector<Candidate> search_layer(const float* query, VectorView vectors, std::uint32_t entry, std::size_t ef,
                                      int level, const std::function<bool(std::uint32_t)>* accept) const;
  std::vector<std::uint32_t> select_neighbors(std::vector<Candidate> candidates, std::size_t m,
                                              VectorView vectors) const;
  void shrink(std::uint32_t node, int level, VectorView vectors);

  HnswConfig cfg_;
  double level_mult_;
  std::mt19937_64 rng_;
  std::vector<int> levels_;
  std::vector<std::vector<std::vector<std::uint32_t>>> links_;  // [slot][level] -> neighbors
  std::uint32_t entry_ = 0;
  int max_level_ = -1;
};

}  // namespace folio::index
