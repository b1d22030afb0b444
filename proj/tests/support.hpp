#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "qdd/circuit.hpp"
#include "qdd/package.hpp"

namespace qdd::testing {

/// Small tables so that many packages can coexist in one test binary.
inline PackageConfig small_config() {
  PackageConfig c;
  c.unique_buckets = 1024;
  c.compute_slots = std::size_t{1} << 14;
  c.max_qubits = 16;
  return c;
}

/// Random circuit over the full gate set; controlled gates need n >= 2.
inline Circuit random_circuit(std::mt19937_64& rng, std::size_t n, std::size_t gates) {
  static constexpr GateKind kSingle[] = {GateKind::H, GateKind::X,   GateKind::Y,  GateKind::Z,
                                         GateKind::S, GateKind::Sdg, GateKind::T,  GateKind::Tdg,
                                         GateKind::SX, GateKind::SY};
  static constexpr GateKind kTwo[] = {GateKind::CX, GateKind::CZ, GateKind::CP};
  Circuit c;
  c.qubits = n;
  for (std::size_t i = 0; i < gates; ++i) {
    Gate g;
    g.target = rng() % n;
    if (n >= 2 && rng() % 3 == 0) {
      g.kind = kTwo[rng() % 3];
      Qubit ctl = 0;
      do {
        ctl = rng() % n;
      } while (ctl == g.target);
      g.control = ctl;
      if (g.kind == GateKind::CP) {
        g.k = 1 + static_cast<unsigned>(rng() % 5);
      }
    } else {
      g.kind = kSingle[rng() % 10];
    }
    c.gates.push_back(g);
  }
  return c;
}

/// The corpus shared by several suites: `count` circuits, n in 1..max_n,
/// up to max_gates gates, from a fixed seed.
inline std::vector<Circuit> corpus(std::size_t count, std::size_t max_n, std::size_t max_gates,
                                   std::uint64_t seed = 2024) {
  std::mt19937_64 rng(seed);
  std::vector<Circuit> out;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t n = 1 + rng() % max_n;
    const std::size_t g = rng() % (max_gates + 1);
    out.push_back(random_circuit(rng, n, g));
  }
  return out;
}

template <class NodeT>
std::vector<const NodeT*> reachable(const Edge<NodeT>& root) {
  std::unordered_set<const NodeT*> seen;
  std::vector<const NodeT*> order;
  std::vector<const NodeT*> stack{root.node};
  while (!stack.empty()) {
    const NodeT* n = stack.back();
    stack.pop_back();
    if (n->v == kTerminalVar || !seen.insert(n).second) {
      continue;
    }
    order.push_back(n);
    for (const auto& e : n->e) {
      stack.push_back(e.node);
    }
  }
  return order;
}

/// Empty string when every reachable node satisfies the normalization
/// invariant; otherwise a description of the first violation. Magnitudes are
/// compared with a slack of 2*eps since interned weights may round slightly
/// above one (e.g. (1-i)/sqrt2). Edges left of the canonical one must be
/// clearly smaller, since magnitudes within eps of the maximum are ties.
template <class NodeT>
std::string normalization_violation(const Package& pkg, const Edge<NodeT>& root) {
  const double slack = 1.0 + 2.0 * pkg.config().epsilon;
  const ComplexValue one = pkg.complex().one();
  for (const NodeT* n : reachable(root)) {
    bool any = false;
    bool has_one = false;
    for (const auto& e : n->e) {
      if (!has_one && e.w != one && e.w.mag2() >= 1.0 - 0.5 * pkg.config().epsilon) {
        return "maximal weight left of the canonical one at var " + std::to_string(n->v);
      }
      if (pkg.complex().is_cached(e.w)) {
        return "cache-resident weight inside a node";
      }
      if (e.w.mag2() > slack) {
        return "weight magnitude above 1 at var " + std::to_string(n->v);
      }
      if (pkg.is_zero_stub(e)) {
        if (!e.is_terminal()) {
          return "zero weight on an edge to a non-terminal";
        }
        continue;
      }
      any = true;
      has_one |= e.w == one;
    }
    if (!any) {
      return "all-zero node at var " + std::to_string(n->v);
    }
    if (!has_one) {
      return "no canonical one weight at var " + std::to_string(n->v);
    }
  }
  return {};
}

/// Duplicate (var, successors, weight handles) anywhere in the unique table.
template <class NodeT>
bool unique_table_has_duplicates(const UniqueTable<NodeT>& table) {
  struct Key {
    Var v;
    std::array<Edge<NodeT>, NodeT::kArity> e;
    bool operator==(const Key&) const = default;
  };
  struct Hash {
    std::size_t operator()(const Key& k) const {
      return UniqueTable<NodeT>::hash(k.e) ^ static_cast<std::size_t>(k.v);
    }
  };
  std::unordered_set<Key, Hash> seen;
  bool dup = false;
  table.for_each_node([&](const NodeT& n) { dup |= !seen.insert(Key{n.v, n.e}).second; });
  return dup;
}

/// Recomputes node refcounts from explicit root protections plus edges out
/// of protected nodes; returns true when they match the stored counts.
template <class NodeT>
bool refcounts_consistent(const UniqueTable<NodeT>& table,
                          const std::vector<Edge<NodeT>>& protected_roots) {
  std::unordered_map<const NodeT*, std::uint64_t> expected;
  for (const auto& r : protected_roots) {
    if (r.node->v != kTerminalVar) {
      ++expected[r.node];
    }
  }
  table.for_each_node([&](const NodeT& n) {
    if (n.ref == 0) {
      return;
    }
    for (const auto& e : n.e) {
      if (e.node->v != kTerminalVar) {
        ++expected[e.node];
      }
    }
  });
  bool ok = true;
  table.for_each_node([&](const NodeT& n) {
    const auto it = expected.find(&n);
    const std::uint64_t want = it == expected.end() ? 0 : it->second;
    ok &= n.ref == want;
  });
  return ok;
}

}  // namespace qdd::testing
