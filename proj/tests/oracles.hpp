#pragma once

// Reference implementations used to cross-check the library. They are
// deliberately naive and share no code with src/.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dlpcf/index.hpp"

namespace oracle {

// Children table: node id -> number of children (0 past the end).
using Table = std::vector<std::uint64_t>;

inline std::uint64_t children(const Table& t, std::uint64_t id) {
  return id < t.size() ? t[id] : 0;
}

struct TreeNode {
  std::uint64_t id = 0;
  std::vector<std::unique_ptr<TreeNode>> kids;
};

// Builds the forest explicitly, numbering nodes in pre-order from `start`.
// Returns nullptr when more than `budget` nodes would be created.
class ForestBuilder {
 public:
  ForestBuilder(const Table& t, std::uint64_t budget) : table_(t), budget_(budget) {}

  std::optional<std::vector<std::unique_ptr<TreeNode>>> build(std::uint64_t start,
                                                              std::uint64_t count) {
    next_ = start;
    std::vector<std::unique_ptr<TreeNode>> roots;
    for (std::uint64_t k = 0; k < count; ++k) {
      auto t = tree();
      if (!t) return std::nullopt;
      roots.push_back(std::move(t));
    }
    return roots;
  }

 private:
  std::unique_ptr<TreeNode> tree() {
    if (made_ >= budget_) return nullptr;
    ++made_;
    auto n = std::make_unique<TreeNode>();
    n->id = next_++;
    std::uint64_t k = children(table_, n->id);
    for (std::uint64_t c = 0; c < k; ++c) {
      auto child = tree();
      if (!child) return nullptr;
      n->kids.push_back(std::move(child));
    }
    return n;
  }

  const Table& table_;
  std::uint64_t budget_;
  std::uint64_t made_ = 0;
  std::uint64_t next_ = 0;
};

inline std::uint64_t count_nodes(const TreeNode& n) {
  std::uint64_t total = 1;
  for (const auto& k : n.kids) total += count_nodes(*k);
  return total;
}

inline std::optional<std::uint64_t> forest_size(const Table& t, std::uint64_t start,
                                                std::uint64_t count,
                                                std::uint64_t budget = 100000) {
  ForestBuilder b(t, budget);
  auto roots = b.build(start, count);
  if (!roots) return std::nullopt;
  std::uint64_t total = 0;
  for (const auto& r : *roots) total += count_nodes(*r);
  return total;
}

// The table as an index term over `a`: a chain of ifle tests.
inline dlpcf::Index table_term(const Table& t, const std::string& a) {
  dlpcf::Index out = dlpcf::Index::lit(0);
  for (std::size_t k = t.size(); k-- > 0;) {
    out = dlpcf::Index::ifle(dlpcf::Index::var(a), dlpcf::Index::lit(k), dlpcf::Index::lit(t[k]),
                             out);
  }
  return out;
}

// The children table used as the running forest example.
inline Table sample_table() {
  Table t(12, 0);
  t[1] = 3;
  t[2] = 2;
  t[8] = 2;
  for (int n : {0, 6, 9, 11}) t[n] = 1;
  return t;
}

// Rejection-samples a table whose forest from node 0 with two roots is finite
// and has at most max_reachable nodes.
inline Table random_table(std::mt19937& rng, std::size_t max_reachable) {
  while (true) {
    std::size_t len = std::uniform_int_distribution<std::size_t>(1, 30)(rng);
    Table t(len);
    for (auto& c : t) c = std::uniform_int_distribution<int>(0, 3)(rng);
    if (forest_size(t, 0, 2, max_reachable)) return t;
  }
}

}  // namespace oracle
