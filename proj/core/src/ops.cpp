#include <algorithm>
#include <string>
#include <unordered_map>

#include "qdd/errors.hpp"
#include "qdd/package.hpp"

// Internal recursions return edges whose weight is cache-resident (or the
// canonical zero for stubs); the caller owns that cache value. Public entry
// points intern the root weight via finish().

namespace qdd {

MatrixEdge Package::identity(std::size_t n) {
  if (n > config_.max_qubits) {
    throw ContractViolation("identity on " + std::to_string(n) + " qubits exceeds max_qubits");
  }
  MatrixEdge e = one_terminal<MatrixNode>();
  const MatrixEdge zero = zero_stub<MatrixNode>();
  for (std::size_t q = n; q-- > 0;) {
    e = make_node<MatrixNode>(static_cast<Var>(q), {e, zero, zero, e});
  }
  return e;
}

VectorEdge Package::zero_state(std::size_t n) {
  if (n > config_.max_qubits) {
    throw ContractViolation("state on " + std::to_string(n) + " qubits exceeds max_qubits");
  }
  VectorEdge e = one_terminal<VectorNode>();
  const VectorEdge zero = zero_stub<VectorNode>();
  for (std::size_t q = n; q-- > 0;) {
    e = make_node<VectorNode>(static_cast<Var>(q), {e, zero});
  }
  return e;
}

// Built bottom-up. Below the target, block[i] holds
//   delta_i * (I - P) + u_i * P
// over the levels seen so far, P projecting every lower control onto |1>.
// Above the target, a control level keeps identity on its |0> branch.
MatrixEdge Package::gate(const GateMatrix& u, Qubit target, std::span<const Qubit> controls,
                         std::size_t n) {
  if (n == 0 || n > config_.max_qubits) {
    throw ContractViolation("gate on " + std::to_string(n) + " qubits outside [1, max_qubits]");
  }
  if (target >= n) {
    throw ContractViolation("target qubit " + std::to_string(target) + " out of range");
  }
  std::vector<bool> is_control(n, false);
  for (const Qubit c : controls) {
    if (c >= n) {
      throw ContractViolation("control qubit " + std::to_string(c) + " out of range");
    }
    if (c == target) {
      throw ContractViolation("control qubit equals target " + std::to_string(target));
    }
    is_control[c] = true;
  }

  const MatrixEdge zero = zero_stub<MatrixNode>();
  std::array<MatrixEdge, 4> block;
  for (std::size_t i = 0; i < 4; ++i) {
    const ComplexValue w = cn_.lookup(u[i]);
    block[i] = cn_.is_zero(w) ? zero : MatrixEdge{terminal<MatrixNode>(), w};
  }
  MatrixEdge ident = one_terminal<MatrixNode>();

  for (std::size_t q = n; q-- > target + 1;) {
    const auto v = static_cast<Var>(q);
    for (std::size_t i = 0; i < 4; ++i) {
      if (is_control[q]) {
        const bool diagonal = i == 0 || i == 3;
        block[i] = make_node<MatrixNode>(v, {diagonal ? ident : zero, zero, zero, block[i]});
      } else {
        block[i] = make_node<MatrixNode>(v, {block[i], zero, zero, block[i]});
      }
    }
    ident = make_node<MatrixNode>(v, {ident, zero, zero, ident});
  }

  MatrixEdge e = make_node<MatrixNode>(static_cast<Var>(target), block);
  // Identity over the levels below q is only needed while a control remains above.
  std::size_t upper_controls = 0;
  for (std::size_t q = 0; q < target; ++q) {
    upper_controls += is_control[q] ? 1 : 0;
  }
  if (upper_controls > 0) {
    ident = make_node<MatrixNode>(static_cast<Var>(target), {ident, zero, zero, ident});
  }
  for (std::size_t q = target; q-- > 0;) {
    const auto v = static_cast<Var>(q);
    if (is_control[q]) {
      e = make_node<MatrixNode>(v, {ident, zero, zero, e});
      --upper_controls;
    } else {
      e = make_node<MatrixNode>(v, {e, zero, zero, e});
    }
    if (upper_controls > 0) {
      ident = make_node<MatrixNode>(v, {ident, zero, zero, ident});
    }
  }
  return e;
}

template <class NodeT>
Edge<NodeT> Package::add_rec(const Edge<NodeT>& x, const Edge<NodeT>& y) {
  const bool x_zero = cn_.approx_zero(x.w);
  const bool y_zero = cn_.approx_zero(y.w);
  if (x_zero && y_zero) {
    return zero_stub<NodeT>();
  }
  if (x_zero) {
    return {y.node, cn_.cache_copy(y.w)};
  }
  if (y_zero) {
    return {x.node, cn_.cache_copy(x.w)};
  }
  if (x.node == y.node) {
    const ComplexValue sum = cn_.add(x.w, y.w);
    if (cn_.approx_zero(sum)) {
      cn_.release(sum);
      return zero_stub<NodeT>();
    }
    return {x.node, sum};
  }
  if (x.is_terminal() || y.is_terminal() || x.node->v != y.node->v) {
    throw ContractViolation("add: operands span different variable levels");
  }

  // Addition commutes; order operands so both orders share one slot.
  const bool swap = std::less<const NodeT*>{}(y.node, x.node);
  const Edge<NodeT>& a = swap ? y : x;
  const Edge<NodeT>& b = swap ? x : y;
  const detail::AddKey<NodeT> key{a.node, cn_.round_for_key(a.w), b.node, cn_.round_for_key(b.w)};
  auto& table = [this]() -> auto& {
    if constexpr (NodeT::kArity == 4) {
      return add_m_;
    } else {
      return add_v_;
    }
  }();
  if (const auto* hit = table.find(key)) {
    return from_stored(*hit);
  }

  std::array<Edge<NodeT>, NodeT::kArity> out;
  for (std::size_t i = 0; i < NodeT::kArity; ++i) {
    const Edge<NodeT>& ca = a.node->e[i];
    const Edge<NodeT>& cb = b.node->e[i];
    const Edge<NodeT> ea =
        is_zero_stub(ca) ? zero_stub<NodeT>() : Edge<NodeT>{ca.node, cn_.mul(a.w, ca.w)};
    const Edge<NodeT> eb =
        is_zero_stub(cb) ? zero_stub<NodeT>() : Edge<NodeT>{cb.node, cn_.mul(b.w, cb.w)};
    out[i] = add_rec(ea, eb);
    cn_.release_if_cached(ea.w);
    cn_.release_if_cached(eb.w);
  }
  Edge<NodeT> r = normalize_node<NodeT>(a.node->v, out);
  table.insert(key, to_stored(r));
  return r;
}

template <class NodeT>
Edge<NodeT> Package::mul_rec(const MatrixEdge& a, const Edge<NodeT>& b) {
  if (cn_.approx_zero(a.w) || cn_.approx_zero(b.w)) {
    return zero_stub<NodeT>();
  }
  Edge<NodeT> r = mul_nodes<NodeT>(a.node, b.node);
  if (is_zero_stub(r)) {
    return r;
  }
  const auto product = r.w.value() * a.w.value() * b.w.value();
  cn_.release(r.w);
  if (cn_.approx_zero(product)) {
    return zero_stub<NodeT>();
  }
  return {r.node, cn_.cache_value(product)};
}

template <class NodeT>
Edge<NodeT> Package::mul_nodes(MatrixNode* a, NodeT* b) {
  if (a->v == kTerminalVar && b->v == kTerminalVar) {
    return {b, cn_.cache_value({1.0, 0.0})};
  }
  if (a->v != b->v) {
    throw ContractViolation("multiply: operand dimensions differ");
  }
  const detail::PairKey<MatrixNode, NodeT> key{a, b};
  auto& table = [this]() -> auto& {
    if constexpr (NodeT::kArity == 4) {
      return mul_mm_;
    } else {
      return mul_mv_;
    }
  }();
  if (const auto* hit = table.find(key)) {
    return from_stored(*hit);
  }

  constexpr std::size_t cols = NodeT::kArity / 2;
  std::array<Edge<NodeT>, NodeT::kArity> out;
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const Edge<NodeT> lhs = mul_rec<NodeT>(a->e[2 * i], b->e[j]);
      const Edge<NodeT> rhs = mul_rec<NodeT>(a->e[2 * i + 1], b->e[cols + j]);
      out[cols * i + j] = add_rec(lhs, rhs);
      cn_.release_if_cached(lhs.w);
      cn_.release_if_cached(rhs.w);
    }
  }
  Edge<NodeT> r = normalize_node<NodeT>(a->v, out);
  table.insert(key, to_stored(r));
  return r;
}

MatrixEdge Package::add(const MatrixEdge& a, const MatrixEdge& b) {
  check_operand(a, "add");
  check_operand(b, "add");
  return finish(add_rec(a, b));
}

VectorEdge Package::add(const VectorEdge& a, const VectorEdge& b) {
  check_operand(a, "add");
  check_operand(b, "add");
  return finish(add_rec(a, b));
}

MatrixEdge Package::multiply(const MatrixEdge& a, const MatrixEdge& b) {
  check_operand(a, "multiply");
  check_operand(b, "multiply");
  return finish(mul_rec<MatrixNode>(a, b));
}

VectorEdge Package::multiply(const MatrixEdge& a, const VectorEdge& v) {
  check_operand(a, "mat_vec");
  check_operand(v, "mat_vec");
  return finish(mul_rec<VectorNode>(a, v));
}

MatrixEdge Package::shift(const MatrixEdge& e, Var offset) {
  std::unordered_map<const MatrixNode*, MatrixNode*> memo;
  auto rec = [&](auto&& self, MatrixNode* n) -> MatrixNode* {
    if (n->v == kTerminalVar) {
      return n;
    }
    if (auto it = memo.find(n); it != memo.end()) {
      return it->second;
    }
    std::array<MatrixEdge, 4> edges = n->e;
    for (auto& child : edges) {
      child.node = self(self, child.node);
    }
    MatrixNode* shifted = unique_lookup<MatrixNode>(n->v + offset, edges);
    memo.emplace(n, shifted);
    return shifted;
  };
  return {rec(rec, e.node), e.w};
}

MatrixEdge Package::kron_nodes(MatrixNode* a, MatrixNode* b) {
  if (a->v == kTerminalVar) {
    return {b, cn_.cache_value({1.0, 0.0})};
  }
  const detail::PairKey<MatrixNode, MatrixNode> key{a, b};
  if (const auto* hit = kron_.find(key)) {
    return from_stored(*hit);
  }
  std::array<MatrixEdge, 4> out;
  for (std::size_t i = 0; i < 4; ++i) {
    const MatrixEdge& child = a->e[i];
    if (is_zero_stub(child)) {
      out[i] = zero_stub<MatrixNode>();
      continue;
    }
    const MatrixEdge k = kron_nodes(child.node, b);
    out[i] = {k.node, cn_.mul(k.w, child.w)};
    cn_.release(k.w);
  }
  MatrixEdge r = normalize_node<MatrixNode>(a->v, out);
  kron_.insert(key, to_stored(r));
  return r;
}

MatrixEdge Package::kron(const MatrixEdge& a, const MatrixEdge& b) {
  check_operand(a, "kron");
  check_operand(b, "kron");
  if (is_zero_stub(a) || is_zero_stub(b)) {
    return zero_stub<MatrixNode>();
  }
  if (!a.is_terminal() && a.node->v != 0) {
    throw ContractViolation("kron: upper operand must be rooted at variable 0");
  }
  if (!b.is_terminal() && b.node->v != 0) {
    throw ContractViolation("kron: lower operand must be rooted at variable 0");
  }
  const std::size_t upper = levels(a);
  if (upper + levels(b) > config_.max_qubits) {
    throw ContractViolation("kron: result exceeds max_qubits");
  }
  const MatrixEdge lower = shift(b, static_cast<Var>(upper));
  const MatrixEdge r = kron_nodes(a.node, lower.node);
  const auto w = r.w.value() * a.w.value() * lower.w.value();
  cn_.release(r.w);
  if (cn_.approx_zero(w)) {
    return zero_stub<MatrixNode>();
  }
  return finish(MatrixEdge{r.node, cn_.cache_value(w)});
}

MatrixEdge Package::ct_nodes(MatrixNode* a) {
  if (a->v == kTerminalVar) {
    return {a, cn_.cache_value({1.0, 0.0})};
  }
  const detail::UnaryKey<MatrixNode> key{a};
  if (const auto* hit = ct_.find(key)) {
    return from_stored(*hit);
  }
  constexpr std::array<std::size_t, 4> kTransposed{0, 2, 1, 3};
  std::array<MatrixEdge, 4> out;
  for (std::size_t i = 0; i < 4; ++i) {
    const MatrixEdge& src = a->e[kTransposed[i]];
    if (is_zero_stub(src)) {
      out[i] = zero_stub<MatrixNode>();
      continue;
    }
    const MatrixEdge t = ct_nodes(src.node);
    out[i] = {t.node, cn_.mul(t.w, conjugate(src.w))};
    cn_.release(t.w);
  }
  MatrixEdge r = normalize_node<MatrixNode>(a->v, out);
  ct_.insert(key, to_stored(r));
  return r;
}

MatrixEdge Package::conjugate_transpose(const MatrixEdge& a) {
  check_operand(a, "conjugate_transpose");
  if (is_zero_stub(a)) {
    return a;
  }
  const MatrixEdge r = ct_nodes(a.node);
  const ComplexValue w = cn_.mul(r.w, conjugate(a.w));
  cn_.release(r.w);
  return finish(MatrixEdge{r.node, w});
}

template Edge<MatrixNode> Package::add_rec<MatrixNode>(const Edge<MatrixNode>&,
                                                       const Edge<MatrixNode>&);
template Edge<VectorNode> Package::add_rec<VectorNode>(const Edge<VectorNode>&,
                                                       const Edge<VectorNode>&);

}  // namespace qdd
