#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace graphret {

using NodeKey = std::string;

struct ScoredNode {
  NodeKey key;
  double score = 0.0;

  bool operator==(const ScoredNode&) const = default;
};

// Canonical ordering used everywhere results are sorted: score descending, key ascending.
inline bool ranks_before(const ScoredNode& a, const ScoredNode& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.key < b.key;
}

// Ordered retrieval state with O(1) key -> rank lookup. Ranks are 1-based.
// Keys are unique; appending an existing key throws.
class RankedList {
 public:
  RankedList() = default;
  explicit RankedList(std::vector<ScoredNode> entries);

  // Sorts by (score desc, key asc).
  static RankedList sorted(std::vector<ScoredNode> entries);

  void push_back(ScoredNode entry);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const ScoredNode& operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<ScoredNode>& entries() const noexcept { return entries_; }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

  bool contains(const NodeKey& key) const { return rank_.count(key) != 0; }
  std::optional<std::size_t> rank_of(const NodeKey& key) const;

  std::vector<NodeKey> keys() const;
  RankedList head(std::size_t k) const;

  bool operator==(const RankedList& other) const { return entries_ == other.entries_; }

 private:
  std::vector<ScoredNode> entries_;
  std::unordered_map<NodeKey, std::size_t> rank_;
};

}  // namespace graphret
