#include "qdd/dot.hpp"

#include <cstdio>
#include <unordered_map>
#include <vector>

namespace qdd {

std::string format_weight(std::complex<double> w) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g%+.6gi", w.real() == 0.0 ? 0.0 : w.real(),
                w.imag() == 0.0 ? 0.0 : w.imag());
  return buf;
}

namespace {

template <class NodeT>
void write_dot(const Edge<NodeT>& root, std::ostream& os) {
  os << "digraph dd {\n";
  os << "  root [shape=point];\n";
  os << "  t [shape=box,label=\"1\"];\n";
  if (root.w.value() == std::complex<double>{}) {
    os << "}\n";
    return;
  }
  std::unordered_map<const NodeT*, std::size_t> ids;
  std::vector<const NodeT*> order;
  auto id_of = [&](const NodeT* n) -> std::string {
    if (n->v == kTerminalVar) {
      return "t";
    }
    auto [it, inserted] = ids.emplace(n, ids.size());
    if (inserted) {
      order.push_back(n);
    }
    return "n" + std::to_string(it->second);
  };
  os << "  root -> " << id_of(root.node) << " [label=\"" << format_weight(root.w.value())
     << "\"];\n";
  for (std::size_t i = 0; i < order.size(); ++i) {
    const NodeT* n = order[i];
    os << "  n" << ids[n] << " [shape=circle,label=\"q" << n->v << "\"];\n";
    for (std::size_t k = 0; k < NodeT::kArity; ++k) {
      const auto& e = n->e[k];
      if (e.w.value() == std::complex<double>{}) {
        continue;
      }
      os << "  n" << ids[n] << " -> " << id_of(e.node) << " [label=\"" << format_weight(e.w.value())
         << "\",taillabel=\"" << k << "\"];\n";
    }
  }
  os << "}\n";
}

}  // namespace

void export_dot(const MatrixEdge& root, std::ostream& os) { write_dot(root, os); }
void export_dot(const VectorEdge& root, std::ostream& os) { write_dot(root, os); }

}  // namespace qdd
