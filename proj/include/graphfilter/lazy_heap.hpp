#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <utility>
#include <vector>

namespace graphfilter {

// Max-heap keyed by dense integer ids with lazy invalidation. Each id carries a
// version counter; pushing a fresh key bumps it, and any older entry still in
// the heap is dropped when it surfaces. `Key` must be totally ordered by <.
template <typename Key>
class LazyMaxHeap {
 public:
  explicit LazyMaxHeap(std::size_t ids) : versions_(ids, 0), retired_(ids, 0) {}

  void push(std::uint32_t id, Key key) {
    heap_.push(Entry{std::move(key), id, ++versions_[id]});
  }

  // Permanently removes id; remaining entries for it are discarded on pop.
  void retire(std::uint32_t id) { retired_[id] = 1; }

  std::optional<std::pair<std::uint32_t, Key>> pop() {
    while (!heap_.empty()) {
      Entry top = heap_.top();
      heap_.pop();
      if (retired_[top.id] || top.version != versions_[top.id]) {
        ++discarded_;
        continue;
      }
      retired_[top.id] = 1;
      return std::pair{top.id, std::move(top.key)};
    }
    return std::nullopt;
  }

  std::size_t pending() const { return heap_.size(); }
  std::size_t discarded() const { return discarded_; }

 private:
  struct Entry {
    Key key;
    std::uint32_t id;
    std::uint64_t version;
    bool operator<(const Entry& other) const { return key < other.key; }
  };

  std::priority_queue<Entry> heap_;
  std::vector<std::uint64_t> versions_;
  std::vector<char> retired_;
  std::size_t discarded_ = 0;
};

}  // namespace graphfilter
