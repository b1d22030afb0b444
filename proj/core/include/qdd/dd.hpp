#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <type_traits>
#include <vector>

#include "qdd/complex.hpp"

namespace qdd {

using Var = std::int32_t;
inline constexpr Var kTerminalVar = -1;

template <class NodeT>
struct Edge {
  NodeT* node = nullptr;
  ComplexValue w;

  bool is_terminal() const noexcept { return node->v == kTerminalVar; }

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Decision-diagram node. Matrix nodes have 4 successors (row-major 2x2
/// blocks), vector nodes have 2.
template <std::size_t Arity>
struct Node {
  static constexpr std::size_t kArity = Arity;
  static constexpr std::uint32_t kImmortal = 0xFFFFFFFFU;

  std::array<Edge<Node>, Arity> e{};
  Node* next = nullptr;
  std::uint32_t ref = 0;
  Var v = kTerminalVar;
};

using MatrixNode = Node<4>;
using VectorNode = Node<2>;
using MatrixEdge = Edge<MatrixNode>;
using VectorEdge = Edge<VectorNode>;

inline std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

struct UniqueTableStats {
  std::size_t live = 0;
  std::size_t peak = 0;
  std::size_t lookups = 0;
  std::size_t hits = 0;
  std::size_t inserts = 0;
  std::size_t collected = 0;
};

/// Per-variable hash buckets of nodes. Nodes come from blocks and are
/// recycled through a free list. Bucket arrays are created on first use of
/// a variable.
template <class NodeT>
class UniqueTable {
 public:
  static constexpr std::size_t kBlockSize = 2048;
  using EdgeArray = std::array<Edge<NodeT>, NodeT::kArity>;

  UniqueTable(std::size_t max_vars, std::size_t buckets_per_var)
      : tables_(max_vars), mask_(buckets_per_var - 1) {
    terminal_.ref = NodeT::kImmortal;
    terminal_.v = kTerminalVar;
  }

  UniqueTable(const UniqueTable&) = delete;
  UniqueTable& operator=(const UniqueTable&) = delete;

  NodeT* terminal() noexcept { return &terminal_; }
  std::size_t max_vars() const noexcept { return tables_.size(); }
  std::size_t buckets_per_var() const noexcept { return mask_ + 1; }

  static std::uint64_t hash(const EdgeArray& edges) noexcept {
    std::uint64_t h = 0;
    for (const auto& e : edges) {
      h = mix64(h ^ reinterpret_cast<std::uintptr_t>(e.node));
      h = mix64(h ^ e.w.re.bits());
      h = mix64(h ^ e.w.im.bits());
    }
    return h;
  }

  /// Returns the canonical node for (v, edges), inserting it if absent.
  /// Edge weights must be table-resident.
  NodeT* lookup(Var v, const EdgeArray& edges) {
    auto& buckets = buckets_for(v);
    ++stats_.lookups;
    const std::size_t slot = hash(edges) & mask_;
    for (NodeT* n = buckets[slot]; n != nullptr; n = n->next) {
      if (n->e == edges) {
        ++stats_.hits;
        return n;
      }
    }
    NodeT* n = allocate();
    n->v = v;
    n->e = edges;
    n->ref = 0;
    n->next = buckets[slot];
    buckets[slot] = n;
    ++stats_.inserts;
    ++inserts_since_gc_;
    ++stats_.live;
    stats_.peak = std::max(stats_.peak, stats_.live);
    return n;
  }

  /// Unlinks every node with refcount 0 onto the free list.
  std::size_t collect() {
    std::size_t count = 0;
    for (auto& buckets : tables_) {
      for (auto& head : buckets) {
        NodeT* kept = nullptr;
        NodeT** tail = &kept;
        for (NodeT* n = head; n != nullptr;) {
          NodeT* next = n->next;
          if (n->ref == 0) {
            n->next = free_;
            free_ = n;
            ++count;
          } else {
            *tail = n;
            tail = &n->next;
          }
          n = next;
        }
        *tail = nullptr;
        head = kept;
      }
    }
    stats_.live -= count;
    stats_.collected += count;
    inserts_since_gc_ = 0;
    return count;
  }

  template <class Fn>
  void for_each_node(Fn&& fn) const {
    for (const auto& buckets : tables_) {
      for (const NodeT* head : buckets) {
        for (const NodeT* n = head; n != nullptr; n = n->next) {
          fn(*n);
        }
      }
    }
  }

  std::size_t inserts_since_gc() const noexcept { return inserts_since_gc_; }
  const UniqueTableStats& stats() const noexcept { return stats_; }

 private:
  std::vector<NodeT*>& buckets_for(Var v) {
    auto& buckets = tables_.at(static_cast<std::size_t>(v));
    if (buckets.empty()) {
      buckets.assign(mask_ + 1, nullptr);
    }
    return buckets;
  }

  NodeT* allocate() {
    if (free_ != nullptr) {
      NodeT* n = free_;
      free_ = n->next;
      return n;
    }
    if (block_used_ == kBlockSize) {
      blocks_.push_back(std::make_unique<NodeT[]>(kBlockSize));
      block_used_ = 0;
    }
    return &blocks_.back()[block_used_++];
  }

  NodeT terminal_{};
  std::vector<std::vector<NodeT*>> tables_;
  std::size_t mask_;
  NodeT* free_ = nullptr;
  std::vector<std::unique_ptr<NodeT[]>> blocks_;
  std::size_t block_used_ = kBlockSize;
  std::size_t inserts_since_gc_ = 0;
  UniqueTableStats stats_;
};

/// Result as stored in a compute table: the node plus the weight as plain
/// machine values (the weight may have been cache-resident).
template <class NodeT>
struct StoredEdge {
  NodeT* node;
  double re;
  double im;
};

struct ComputeTableStats {
  std::size_t lookups = 0;
  std::size_t hits = 0;
  std::size_t inserts = 0;
};

/// Direct-mapped memo table; a new entry overwrites whatever shares its
/// slot. clear() bumps a generation counter, so it is O(1). The slot array
/// is zero-allocated on first insert.
template <class Key, class Value>
class ComputeTable {
  struct Slot {
    Key key;
    Value value;
    std::uint32_t generation;
  };
  static_assert(std::is_trivially_copyable_v<Slot>);

  struct FreeDeleter {
    void operator()(Slot* p) const noexcept { std::free(p); }
  };

 public:
  explicit ComputeTable(std::size_t slots) : mask_(slots - 1) {}

  const Value* find(const Key& key) {
    ++stats_.lookups;
    if (!enabled_ || !slots_) {
      return nullptr;
    }
    const Slot& s = slots_[Key::hash(key) & mask_];
    if (s.generation == generation_ && s.key == key) {
      ++stats_.hits;
      return &s.value;
    }
    return nullptr;
  }

  void insert(const Key& key, const Value& value) {
    if (!enabled_) {
      return;
    }
    if (!slots_) {
      slots_.reset(static_cast<Slot*>(std::calloc(mask_ + 1, sizeof(Slot))));
      if (!slots_) {
        throw std::bad_alloc();
      }
    }
    Slot& s = slots_[Key::hash(key) & mask_];
    s.key = key;
    s.value = value;
    s.generation = generation_;
    ++stats_.inserts;
  }

  void clear() noexcept {
    if (++generation_ == 0) {
      if (slots_) {
        std::memset(static_cast<void*>(slots_.get()), 0, (mask_ + 1) * sizeof(Slot));
      }
      generation_ = 1;
    }
  }

  void set_enabled(bool on) noexcept { enabled_ = on; }
  bool enabled() const noexcept { return enabled_; }
  const ComputeTableStats& stats() const noexcept { return stats_; }

 private:
  std::unique_ptr<Slot[], FreeDeleter> slots_;
  std::size_t mask_;
  std::uint32_t generation_ = 1;
  bool enabled_ = true;
  ComputeTableStats stats_;
};

}  // namespace qdd
