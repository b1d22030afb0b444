#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qdd/complex.hpp"
#include "qdd/dd.hpp"

namespace qdd {

using Qubit = std::size_t;

/// Row-major 2x2 single-qubit operator.
using GateMatrix = std::array<std::complex<double>, 4>;

struct PackageConfig {
  double epsilon = 1e-13;
  std::size_t real_buckets = 65536;
  std::size_t max_qubits = 128;  // n_max; sizes the complex cache
  std::size_t cache_k = 16;      // cache holds cache_k * (max_qubits + 1) values
  std::size_t unique_buckets = 32768;
  std::size_t gc_threshold = 131072;
  std::size_t compute_slots = std::size_t{1} << 20;
  TableMode table_mode = TableMode::Bucketed;
  bool compute_tables = true;
};

template <class NodeT>
struct NormalizedEdges {
  ComplexValue factor;  // cache-resident unless `zero`
  std::array<Edge<NodeT>, NodeT::kArity> edges;
  bool zero = false;
};

struct GcResult {
  std::size_t nodes = 0;
  std::size_t reals = 0;
};

struct PackageStats {
  RealTableStats reals;
  CacheStats cache;
  UniqueTableStats matrix_nodes;
  UniqueTableStats vector_nodes;
  std::size_t compute_lookups = 0;
  std::size_t compute_hits = 0;
  std::size_t gc_runs = 0;
};

namespace detail {

template <class A, class B>
struct PairKey {
  const A* a;
  const B* b;

  static std::uint64_t hash(const PairKey& k) noexcept {
    return mix64(reinterpret_cast<std::uintptr_t>(k.a) ^
                 mix64(reinterpret_cast<std::uintptr_t>(k.b)));
  }
  friend bool operator==(const PairKey&, const PairKey&) = default;
};

template <class N>
struct AddKey {
  const N* a;
  RoundedKey wa;
  const N* b;
  RoundedKey wb;

  static std::uint64_t hash(const AddKey& k) noexcept {
    std::uint64_t h = mix64(reinterpret_cast<std::uintptr_t>(k.a));
    h = mix64(h ^ static_cast<std::uint64_t>(k.wa.re));
    h = mix64(h ^ static_cast<std::uint64_t>(k.wa.im));
    h = mix64(h ^ reinterpret_cast<std::uintptr_t>(k.b));
    h = mix64(h ^ static_cast<std::uint64_t>(k.wb.re));
    return mix64(h ^ static_cast<std::uint64_t>(k.wb.im));
  }
  friend bool operator==(const AddKey&, const AddKey&) = default;
};

template <class N>
struct UnaryKey {
  const N* a;

  static std::uint64_t hash(const UnaryKey& k) noexcept {
    return mix64(reinterpret_cast<std::uintptr_t>(k.a));
  }
  friend bool operator==(const UnaryKey&, const UnaryKey&) = default;
};

}  // namespace detail

/// A decision-diagram package instance. Owns every table, cache and free
/// list; instances are independent and must not be shared across threads
/// concurrently.
///
/// Every public operation takes and returns edges whose weights are
/// table-resident. Results are unprotected: call inc_ref() on edges that
/// must survive garbage_collect().
class Package {
 public:
  explicit Package(PackageConfig config = {});

  Package(const Package&) = delete;
  Package& operator=(const Package&) = delete;

  const PackageConfig& config() const noexcept { return config_; }
  ComplexNumbers& complex() noexcept { return cn_; }
  const ComplexNumbers& complex() const noexcept { return cn_; }

  template <class NodeT>
  NodeT* terminal() noexcept;
  template <class NodeT>
  Edge<NodeT> zero_stub() noexcept {
    return {terminal<NodeT>(), cn_.zero()};
  }
  template <class NodeT>
  Edge<NodeT> one_terminal() noexcept {
    return {terminal<NodeT>(), cn_.one()};
  }
  template <class NodeT>
  bool is_zero_stub(const Edge<NodeT>& e) const noexcept {
    return e.w == cn_.zero();
  }

  // Node construction.

  /// Divides all weights by the leftmost weight of maximal magnitude and
  /// interns the quotients. Cache-resident input weights are consumed.
  template <class NodeT>
  NormalizedEdges<NodeT> normalize(Var v, std::array<Edge<NodeT>, NodeT::kArity> edges);
  template <class NodeT>
  NodeT* unique_lookup(Var v, const std::array<Edge<NodeT>, NodeT::kArity>& edges);
  /// normalize + unique_lookup; the returned weight is table-resident.
  template <class NodeT>
  Edge<NodeT> make_node(Var v, std::array<Edge<NodeT>, NodeT::kArity> edges);

  // Reference counting and garbage collection.

  template <class NodeT>
  void inc_ref(const Edge<NodeT>& e);
  template <class NodeT>
  void dec_ref(const Edge<NodeT>& e);

  GcResult garbage_collect();
  bool gc_due() const noexcept;
  /// Collects only when the insertion counter passed gc_threshold.
  GcResult collect_if_due();

  // Inspection.

  std::complex<double> entry(const MatrixEdge& root, std::size_t row, std::size_t col) const;
  std::complex<double> amplitude(const VectorEdge& root, std::size_t index) const;
  std::vector<std::complex<double>> amplitudes(const VectorEdge& root) const;
  template <class NodeT>
  std::size_t size(const Edge<NodeT>& root) const;
  /// Number of variable levels below and including the root's (0 for a
  /// terminal or stub); equals the qubit count for DDs rooted at variable 0.
  template <class NodeT>
  std::size_t levels(const Edge<NodeT>& root) const;

  // Operations.

  MatrixEdge identity(std::size_t n);
  /// |0...0> on n qubits.
  VectorEdge zero_state(std::size_t n);
  /// u on `target`, active only where every qubit in `controls` is 1.
  MatrixEdge gate(const GateMatrix& u, Qubit target, std::span<const Qubit> controls,
                  std::size_t n);

  MatrixEdge add(const MatrixEdge& a, const MatrixEdge& b);
  VectorEdge add(const VectorEdge& a, const VectorEdge& b);
  MatrixEdge multiply(const MatrixEdge& a, const MatrixEdge& b);
  VectorEdge multiply(const MatrixEdge& a, const VectorEdge& v);
  VectorEdge mat_vec(const MatrixEdge& a, const VectorEdge& v) { return multiply(a, v); }
  /// a's variables stay on top; b's are relabelled to follow them.
  MatrixEdge kron(const MatrixEdge& a, const MatrixEdge& b);
  MatrixEdge conjugate_transpose(const MatrixEdge& a);

  // Tables.

  const UniqueTable<MatrixNode>& matrix_nodes() const noexcept { return matrix_unique_; }
  const UniqueTable<VectorNode>& vector_nodes() const noexcept { return vector_unique_; }
  void set_compute_tables_enabled(bool on) noexcept;
  void clear_compute_tables() noexcept;
  PackageStats stats() const noexcept;

 private:
  template <class NodeT>
  UniqueTable<NodeT>& unique() noexcept;

  template <class NodeT>
  Edge<NodeT> normalize_node(Var v, std::array<Edge<NodeT>, NodeT::kArity> edges);
  template <class NodeT>
  Edge<NodeT> finish(Edge<NodeT> cached);
  template <class NodeT>
  Edge<NodeT> from_stored(const StoredEdge<NodeT>& s);
  template <class NodeT>
  StoredEdge<NodeT> to_stored(const Edge<NodeT>& e) const noexcept;

  template <class NodeT>
  Edge<NodeT> add_rec(const Edge<NodeT>& x, const Edge<NodeT>& y);
  template <class NodeT>
  Edge<NodeT> mul_rec(const MatrixEdge& a, const Edge<NodeT>& b);
  template <class NodeT>
  Edge<NodeT> mul_nodes(MatrixNode* a, NodeT* b);
  MatrixEdge kron_nodes(MatrixNode* a, MatrixNode* b);
  MatrixEdge shift(const MatrixEdge& e, Var offset);
  MatrixEdge ct_nodes(MatrixNode* a);

  template <class NodeT>
  void check_operand(const Edge<NodeT>& e, const char* op) const;

  PackageConfig config_;
  ComplexNumbers cn_;
  UniqueTable<MatrixNode> matrix_unique_;
  UniqueTable<VectorNode> vector_unique_;

  ComputeTable<detail::PairKey<MatrixNode, MatrixNode>, StoredEdge<MatrixNode>> mul_mm_;
  ComputeTable<detail::PairKey<MatrixNode, VectorNode>, StoredEdge<VectorNode>> mul_mv_;
  ComputeTable<detail::AddKey<MatrixNode>, StoredEdge<MatrixNode>> add_m_;
  ComputeTable<detail::AddKey<VectorNode>, StoredEdge<VectorNode>> add_v_;
  ComputeTable<detail::PairKey<MatrixNode, MatrixNode>, StoredEdge<MatrixNode>> kron_;
  ComputeTable<detail::UnaryKey<MatrixNode>, StoredEdge<MatrixNode>> ct_;

  std::size_t gc_runs_ = 0;
};

}  // namespace qdd
