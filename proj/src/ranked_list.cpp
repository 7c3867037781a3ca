#include "graphret/ranked_list.hpp"

#include <algorithm>

#include "graphret/error.hpp"

namespace graphret {

RankedList::RankedList(std::vector<ScoredNode> entries) {
  entries_.reserve(entries.size());
  rank_.reserve(entries.size());
  for (auto& e : entries) push_back(std::move(e));
}

RankedList RankedList::sorted(std::vector<ScoredNode> entries) {
  std::sort(entries.begin(), entries.end(), ranks_before);
  return RankedList(std::move(entries));
}

void RankedList::push_back(ScoredNode entry) {
  auto [it, inserted] = rank_.emplace(entry.key, entries_.size() + 1);
  if (!inserted) throw ValidationError("duplicate key in ranked list: " + entry.key);
  entries_.push_back(std::move(entry));
}

std::optional<std::size_t> RankedList::rank_of(const NodeKey& key) const {
  auto it = rank_.find(key);
  if (it == rank_.end()) return std::nullopt;
  return it->second;
}

std::vector<NodeKey> RankedList::keys() const {
  std::vector<NodeKey> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.key);
  return out;
}

RankedList RankedList::head(std::size_t k) const {
  k = std::min(k, entries_.size());
  return RankedList(std::vector<ScoredNode>(entries_.begin(), entries_.begin() + static_cast<std::ptrdiff_t>(k)));
}

}  // namespace graphret
