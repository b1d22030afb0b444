#include "qdd/package.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>
#include <unordered_set>

#include "qdd/errors.hpp"

namespace qdd {

namespace {

bool is_pow2(std::size_t x) { return x != 0 && std::has_single_bit(x); }

PackageConfig validated(PackageConfig c) {
  if (c.max_qubits == 0 || c.max_qubits > 4096) {
    throw ContractViolation("max_qubits must be in [1, 4096]");
  }
  if (c.cache_k == 0) {
    throw ContractViolation("cache_k must be positive");
  }
  if (!is_pow2(c.unique_buckets) || !is_pow2(c.compute_slots)) {
    throw ContractViolation("unique_buckets and compute_slots must be powers of two");
  }
  return c;
}

}  // namespace

Package::Package(PackageConfig config)
    : config_(validated(config)),
      cn_(config_.epsilon, config_.real_buckets, config_.cache_k * (config_.max_qubits + 1),
          config_.table_mode),
      matrix_unique_(config_.max_qubits, config_.unique_buckets),
      vector_unique_(config_.max_qubits, config_.unique_buckets),
      mul_mm_(config_.compute_slots),
      mul_mv_(config_.compute_slots),
      add_m_(config_.compute_slots),
      add_v_(config_.compute_slots),
      kron_(config_.compute_slots),
      ct_(config_.compute_slots) {
  set_compute_tables_enabled(config_.compute_tables);
}

template <>
MatrixNode* Package::terminal<MatrixNode>() noexcept {
  return matrix_unique_.terminal();
}
template <>
VectorNode* Package::terminal<VectorNode>() noexcept {
  return vector_unique_.terminal();
}
template <>
UniqueTable<MatrixNode>& Package::unique<MatrixNode>() noexcept {
  return matrix_unique_;
}
template <>
UniqueTable<VectorNode>& Package::unique<VectorNode>() noexcept {
  return vector_unique_;
}

template <class NodeT>
NormalizedEdges<NodeT> Package::normalize(Var v, std::array<Edge<NodeT>, NodeT::kArity> edges) {
  NormalizedEdges<NodeT> out;
  std::array<double, NodeT::kArity> mags{};
  double max_mag = -1.0;
  for (std::size_t i = 0; i < NodeT::kArity; ++i) {
    auto& e = edges[i];
    const auto value = e.w.value();
    if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
      throw ContractViolation("non-finite edge weight at variable " + std::to_string(v));
    }
    if (cn_.approx_zero(e.w)) {
      cn_.release_if_cached(e.w);
      e = zero_stub<NodeT>();
      mags[i] = -1.0;
      continue;
    }
    mags[i] = e.w.mag2();
    max_mag = std::max(max_mag, mags[i]);
  }
  // Magnitudes within a relative epsilon of the maximum count as ties, so
  // rounding (|e^{i pi/4}|^2 = 1 + 2^-52) cannot move the choice between
  // equivalent inputs; the leftmost tie wins.
  std::size_t best = NodeT::kArity;
  if (max_mag >= 0.0) {
    const double floor_mag = max_mag * (1.0 - cn_.epsilon());
    for (std::size_t i = 0; i < NodeT::kArity; ++i) {
      if (mags[i] >= floor_mag) {
        best = i;
        break;
      }
    }
  }
  if (best == NodeT::kArity) {
    out.factor = cn_.zero();
    out.edges = edges;
    out.zero = true;
    return out;
  }

  ComplexValue factor = edges[best].w;
  if (!cn_.is_cached(factor)) {
    factor = cn_.cache_copy(factor);
  }
  for (std::size_t i = 0; i < NodeT::kArity; ++i) {
    auto& e = edges[i];
    if (i == best || is_zero_stub(e)) {
      continue;
    }
    const ComplexValue q = cn_.div(e.w, factor);
    cn_.release_if_cached(e.w);
    e.w = cn_.intern(q);
    if (cn_.is_zero(e.w)) {
      e.node = terminal<NodeT>();
    }
  }
  edges[best].w = cn_.one();
  out.factor = factor;
  out.edges = edges;
  return out;
}

template <class NodeT>
NodeT* Package::unique_lookup(Var v, const std::array<Edge<NodeT>, NodeT::kArity>& edges) {
  if (v < 0 || static_cast<std::size_t>(v) >= config_.max_qubits) {
    throw ContractViolation("variable " + std::to_string(v) + " outside [0, max_qubits)");
  }
  for (const auto& e : edges) {
    if (cn_.is_cached(e.w)) {
      throw ContractViolation("unique-table edges must carry table-resident weights");
    }
    if (!e.is_terminal() && e.node->v <= v) {
      throw ContractViolation("successor variable must lie below variable " + std::to_string(v));
    }
  }
  return unique<NodeT>().lookup(v, edges);
}

template <class NodeT>
Edge<NodeT> Package::normalize_node(Var v, std::array<Edge<NodeT>, NodeT::kArity> edges) {
  auto n = normalize<NodeT>(v, edges);
  if (n.zero) {
    return zero_stub<NodeT>();
  }
  return {unique_lookup<NodeT>(v, n.edges), n.factor};
}

template <class NodeT>
Edge<NodeT> Package::finish(Edge<NodeT> e) {
  if (!cn_.is_cached(e.w)) {
    return e;
  }
  e.w = cn_.intern_unbounded(e.w);
  if (cn_.is_zero(e.w)) {
    return zero_stub<NodeT>();
  }
  return e;
}

template <class NodeT>
Edge<NodeT> Package::make_node(Var v, std::array<Edge<NodeT>, NodeT::kArity> edges) {
  return finish(normalize_node<NodeT>(v, edges));
}

template <class NodeT>
Edge<NodeT> Package::from_stored(const StoredEdge<NodeT>& s) {
  if (s.node == terminal<NodeT>() && s.re == 0.0 && s.im == 0.0) {
    return zero_stub<NodeT>();
  }
  return {s.node, cn_.cache_value({s.re, s.im})};
}

template <class NodeT>
StoredEdge<NodeT> Package::to_stored(const Edge<NodeT>& e) const noexcept {
  const auto w = e.w.value();
  return {e.node, w.real(), w.imag()};
}

template <class NodeT>
void Package::inc_ref(const Edge<NodeT>& e) {
  cn_.inc_ref(e.w);
  NodeT* n = e.node;
  if (n->v == kTerminalVar || n->ref == NodeT::kImmortal) {
    return;
  }
  if (++n->ref == 1) {
    for (const auto& child : n->e) {
      inc_ref(child);
    }
  }
}

template <class NodeT>
void Package::dec_ref(const Edge<NodeT>& e) {
  cn_.dec_ref(e.w);
  NodeT* n = e.node;
  if (n->v == kTerminalVar || n->ref == NodeT::kImmortal) {
    return;
  }
  if (n->ref == 0) {
    throw ContractViolation("node reference count below zero at variable " + std::to_string(n->v));
  }
  if (--n->ref == 0) {
    for (const auto& child : n->e) {
      dec_ref(child);
    }
  }
}

GcResult Package::garbage_collect() {
  GcResult r;
  r.nodes = matrix_unique_.collect() + vector_unique_.collect();
  r.reals = cn_.garbage_collect();
  clear_compute_tables();
  ++gc_runs_;
  return r;
}

bool Package::gc_due() const noexcept {
  return matrix_unique_.inserts_since_gc() + vector_unique_.inserts_since_gc() >
         config_.gc_threshold;
}

GcResult Package::collect_if_due() { return gc_due() ? garbage_collect() : GcResult{}; }

template <class NodeT>
std::size_t Package::levels(const Edge<NodeT>& root) const {
  const NodeT* n = root.node;
  if (n->v == kTerminalVar) {
    return 0;
  }
  const Var top = n->v;
  Var deepest = top;
  while (n->v != kTerminalVar) {
    deepest = n->v;
    const NodeT* next = nullptr;
    for (const auto& child : n->e) {
      if (!is_zero_stub(child)) {
        next = child.node;
        break;
      }
    }
    n = next;
  }
  return static_cast<std::size_t>(deepest - top + 1);
}

template <class NodeT>
std::size_t Package::size(const Edge<NodeT>& root) const {
  std::unordered_set<const NodeT*> seen;
  std::vector<const NodeT*> stack{root.node};
  while (!stack.empty()) {
    const NodeT* n = stack.back();
    stack.pop_back();
    if (n->v == kTerminalVar || !seen.insert(n).second) {
      continue;
    }
    for (const auto& child : n->e) {
      stack.push_back(child.node);
    }
  }
  return seen.size();
}

std::complex<double> Package::entry(const MatrixEdge& root, std::size_t row,
                                    std::size_t col) const {
  if (is_zero_stub(root)) {
    return {0.0, 0.0};
  }
  if (!root.is_terminal() && root.node->v != 0) {
    throw ContractViolation("entry extraction needs a DD rooted at variable 0");
  }
  const std::size_t n = levels(root);
  if (n < 64 && (row >> n != 0 || col >> n != 0)) {
    throw ContractViolation("index (" + std::to_string(row) + ", " + std::to_string(col) +
                            ") outside a " + std::to_string(n) + "-qubit matrix");
  }
  std::complex<double> value = root.w.value();
  const MatrixNode* node = root.node;
  while (node->v != kTerminalVar) {
    const auto shift = n - 1 - static_cast<std::size_t>(node->v);
    const auto idx = 2 * ((row >> shift) & 1U) + ((col >> shift) & 1U);
    const MatrixEdge& e = node->e[idx];
    if (is_zero_stub(e)) {
      return {0.0, 0.0};
    }
    value *= e.w.value();
    node = e.node;
  }
  return value;
}

std::complex<double> Package::amplitude(const VectorEdge& root, std::size_t index) const {
  if (is_zero_stub(root)) {
    return {0.0, 0.0};
  }
  if (!root.is_terminal() && root.node->v != 0) {
    throw ContractViolation("amplitude extraction needs a DD rooted at variable 0");
  }
  const std::size_t n = levels(root);
  if (n < 64 && index >> n != 0) {
    throw ContractViolation("index " + std::to_string(index) + " outside a " +
                            std::to_string(n) + "-qubit vector");
  }
  std::complex<double> value = root.w.value();
  const VectorNode* node = root.node;
  while (node->v != kTerminalVar) {
    const auto shift = n - 1 - static_cast<std::size_t>(node->v);
    const VectorEdge& e = node->e[(index >> shift) & 1U];
    if (is_zero_stub(e)) {
      return {0.0, 0.0};
    }
    value *= e.w.value();
    node = e.node;
  }
  return value;
}

std::vector<std::complex<double>> Package::amplitudes(const VectorEdge& root) const {
  const std::size_t n = levels(root);
  if (n >= 32) {
    throw ContractViolation("dense amplitude vector too large");
  }
  std::vector<std::complex<double>> out(std::size_t{1} << n);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = amplitude(root, i);
  }
  return out;
}

void Package::set_compute_tables_enabled(bool on) noexcept {
  mul_mm_.set_enabled(on);
  mul_mv_.set_enabled(on);
  add_m_.set_enabled(on);
  add_v_.set_enabled(on);
  kron_.set_enabled(on);
  ct_.set_enabled(on);
}

void Package::clear_compute_tables() noexcept {
  mul_mm_.clear();
  mul_mv_.clear();
  add_m_.clear();
  add_v_.clear();
  kron_.clear();
  ct_.clear();
}

PackageStats Package::stats() const noexcept {
  PackageStats s;
  s.reals = cn_.table().stats();
  s.cache = cn_.cache().stats();
  s.matrix_nodes = matrix_unique_.stats();
  s.vector_nodes = vector_unique_.stats();
  for (const ComputeTableStats* t :
       {&mul_mm_.stats(), &mul_mv_.stats(), &add_m_.stats(), &add_v_.stats(), &kron_.stats(),
        &ct_.stats()}) {
    s.compute_lookups += t->lookups;
    s.compute_hits += t->hits;
  }
  s.gc_runs = gc_runs_;
  return s;
}

template <class NodeT>
void Package::check_operand(const Edge<NodeT>& e, const char* op) const {
  if (cn_.is_cached(e.w)) {
    throw ContractViolation(std::string(op) + ": operand weight must be table-resident");
  }
}

#define QDD_INSTANTIATE(N)                                                                      \
  template NormalizedEdges<N> Package::normalize<N>(Var, std::array<Edge<N>, N::kArity>);     \
  template N* Package::unique_lookup<N>(Var, const std::array<Edge<N>, N::kArity>&);          \
  template Edge<N> Package::make_node<N>(Var, std::array<Edge<N>, N::kArity>);                \
  template Edge<N> Package::normalize_node<N>(Var, std::array<Edge<N>, N::kArity>);           \
  template Edge<N> Package::finish<N>(Edge<N>);                                               \
  template Edge<N> Package::from_stored<N>(const StoredEdge<N>&);                             \
  template StoredEdge<N> Package::to_stored<N>(const Edge<N>&) const noexcept;                \
  template void Package::inc_ref<N>(const Edge<N>&);                                          \
  template void Package::dec_ref<N>(const Edge<N>&);                                          \
  template std::size_t Package::levels<N>(const Edge<N>&) const;                              \
  template std::size_t Package::size<N>(const Edge<N>&) const;                                \
  template void Package::check_operand<N>(const Edge<N>&, const char*) const;

QDD_INSTANTIATE(MatrixNode)
QDD_INSTANTIATE(VectorNode)

#undef QDD_INSTANTIATE

}  // namespace qdd
