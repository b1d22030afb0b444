#include "qdd/oracle.hpp"

#include <cmath>
#include <string>

#include "qdd/errors.hpp"

namespace qdd::oracle {

namespace {

using C = std::complex<double>;

void check_size(std::size_t n) {
  if (n == 0 || n > kMaxQubits) {
    throw ContractViolation("dense oracle supports 1.." + std::to_string(kMaxQubits) +
                            " qubits, got " + std::to_string(n));
  }
}

std::size_t bit_of(std::size_t q, std::size_t n) { return std::size_t{1} << (n - 1 - q); }

}  // namespace

DenseMatrix DenseMatrix::identity(std::size_t dim) {
  DenseMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    m(i, i) = 1.0;
  }
  return m;
}

DenseMatrix DenseMatrix::operator*(const DenseMatrix& rhs) const {
  if (dim_ != rhs.dim_) {
    throw ContractViolation("dense product dimension mismatch");
  }
  DenseMatrix out(dim_);
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t k = 0; k < dim_; ++k) {
      const C a = (*this)(i, k);
      if (a == C{}) {
        continue;
      }
      for (std::size_t j = 0; j < dim_; ++j) {
        out(i, j) += a * rhs(k, j);
      }
    }
  }
  return out;
}

DenseMatrix DenseMatrix::adjoint() const {
  DenseMatrix out(dim_);
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = 0; j < dim_; ++j) {
      out(j, i) = std::conj((*this)(i, j));
    }
  }
  return out;
}

double DenseMatrix::max_abs_diff(const DenseMatrix& other) const {
  if (dim_ != other.dim_) {
    throw ContractViolation("dense comparison dimension mismatch");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    worst = std::max(worst, std::abs(data_[i] - other.data_[i]));
  }
  return worst;
}

DenseMatrix single_qubit_matrix(const Gate& g) {
  DenseMatrix m(2);
  const C i{0.0, 1.0};
  auto set = [&m](C a, C b, C c, C d) {
    m(0, 0) = a;
    m(0, 1) = b;
    m(1, 0) = c;
    m(1, 1) = d;
  };
  switch (g.kind) {
    case GateKind::H: {
      const double s = 1.0 / std::sqrt(2.0);
      set(s, s, s, -s);
      break;
    }
    case GateKind::X:
    case GateKind::CX: set(0.0, 1.0, 1.0, 0.0); break;
    case GateKind::Y: set(0.0, -i, i, 0.0); break;
    case GateKind::Z:
    case GateKind::CZ: set(1.0, 0.0, 0.0, -1.0); break;
    case GateKind::S: set(1.0, 0.0, 0.0, std::exp(i * M_PI / 2.0)); break;
    case GateKind::Sdg: set(1.0, 0.0, 0.0, std::exp(-i * M_PI / 2.0)); break;
    case GateKind::T: set(1.0, 0.0, 0.0, std::exp(i * M_PI / 4.0)); break;
    case GateKind::Tdg: set(1.0, 0.0, 0.0, std::exp(-i * M_PI / 4.0)); break;
    case GateKind::SX: {
      // exp(i pi/4) * RX(pi/2)
      const C ph = std::exp(i * M_PI / 4.0);
      const double c = std::cos(M_PI / 4.0);
      const double s = std::sin(M_PI / 4.0);
      set(ph * c, -i * ph * s, -i * ph * s, ph * c);
      break;
    }
    case GateKind::SY: {
      // exp(i pi/4) * RY(pi/2)
      const C ph = std::exp(i * M_PI / 4.0);
      const double c = std::cos(M_PI / 4.0);
      const double s = std::sin(M_PI / 4.0);
      set(ph * c, -ph * s, ph * s, ph * c);
      break;
    }
    case GateKind::CP:
      set(1.0, 0.0, 0.0, std::exp(i * (M_PI / std::pow(2.0, static_cast<double>(g.k) - 1.0))));
      break;
  }
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 2; ++c) {
      // exp() leaves ~1e-17 residue on exact zeros; keep them exact.
      auto& z = m(r, c);
      if (std::abs(z.real()) < 1e-15) z.real(0.0);
      if (std::abs(z.imag()) < 1e-15) z.imag(0.0);
    }
  }
  return m;
}

DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.dim() * b.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) {
    for (std::size_t j = 0; j < a.dim(); ++j) {
      for (std::size_t k = 0; k < b.dim(); ++k) {
        for (std::size_t l = 0; l < b.dim(); ++l) {
          out(i * b.dim() + k, j * b.dim() + l) = a(i, j) * b(k, l);
        }
      }
    }
  }
  return out;
}

DenseMatrix dense_gate(const Gate& g, std::size_t n) {
  check_size(n);
  const DenseMatrix u = single_qubit_matrix(g);
  if (!g.control) {
    DenseMatrix m = DenseMatrix::identity(1);
    for (std::size_t q = 0; q < n; ++q) {
      m = kron(m, q == g.target ? u : DenseMatrix::identity(2));
    }
    return m;
  }
  const std::size_t dim = std::size_t{1} << n;
  const std::size_t cbit = bit_of(*g.control, n);
  const std::size_t tbit = bit_of(g.target, n);
  DenseMatrix m(dim);
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      if ((r & ~tbit) != (c & ~tbit)) {
        continue;
      }
      if ((c & cbit) == 0) {
        m(r, c) = r == c ? 1.0 : 0.0;
      } else {
        m(r, c) = u((r & tbit) ? 1 : 0, (c & tbit) ? 1 : 0);
      }
    }
  }
  return m;
}

void apply_gate(DenseMatrix& m, const Gate& g, std::size_t n) {
  const DenseMatrix u = single_qubit_matrix(g);
  const std::size_t dim = m.dim();
  const std::size_t tbit = bit_of(g.target, n);
  const std::size_t cbit = g.control ? bit_of(*g.control, n) : 0;
  for (std::size_t r0 = 0; r0 < dim; ++r0) {
    if ((r0 & tbit) != 0 || (cbit != 0 && (r0 & cbit) == 0)) {
      continue;
    }
    const std::size_t r1 = r0 | tbit;
    for (std::size_t c = 0; c < dim; ++c) {
      const C a = m(r0, c);
      const C b = m(r1, c);
      m(r0, c) = u(0, 0) * a + u(0, 1) * b;
      m(r1, c) = u(1, 0) * a + u(1, 1) * b;
    }
  }
}

DenseMatrix dense_from_circuit(const Circuit& c) {
  check_size(c.qubits);
  DenseMatrix m = DenseMatrix::identity(std::size_t{1} << c.qubits);
  for (const Gate& g : c.gates) {
    apply_gate(m, g, c.qubits);
  }
  return m;
}

DenseMatrix dense_from_circuit_by_products(const Circuit& c) {
  check_size(c.qubits);
  DenseMatrix m = DenseMatrix::identity(std::size_t{1} << c.qubits);
  for (const Gate& g : c.gates) {
    m = dense_gate(g, c.qubits) * m;
  }
  return m;
}

CompareReport compare(const Package& pkg, const MatrixEdge& root, const DenseMatrix& m,
                      double tol) {
  const std::size_t n = pkg.levels(root);
  if (!pkg.is_zero_stub(root) && (std::size_t{1} << n) != m.dim()) {
    throw ContractViolation("compare: DD has " + std::to_string(n) +
                            " qubits, dense matrix dimension " + std::to_string(m.dim()));
  }
  CompareReport rep;
  for (std::size_t r = 0; r < m.dim(); ++r) {
    for (std::size_t c = 0; c < m.dim(); ++c) {
      const double d = std::abs(pkg.entry(root, r, c) - m(r, c));
      if (d > rep.max_deviation || std::isnan(d)) {
        rep.max_deviation = d;
        rep.row = r;
        rep.col = c;
      }
    }
  }
  rep.pass = rep.max_deviation <= tol;
  return rep;
}

CompareReport compare(const Package& pkg, const VectorEdge& root,
                      const std::vector<std::complex<double>>& v, double tol) {
  const std::size_t n = pkg.levels(root);
  if (!pkg.is_zero_stub(root) && (std::size_t{1} << n) != v.size()) {
    throw ContractViolation("compare: vector dimension mismatch");
  }
  CompareReport rep;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = std::abs(pkg.amplitude(root, i) - v[i]);
    if (d > rep.max_deviation || std::isnan(d)) {
      rep.max_deviation = d;
      rep.row = i;
    }
  }
  rep.pass = rep.max_deviation <= tol;
  return rep;
}

std::vector<std::complex<double>> column(const DenseMatrix& m, std::size_t col) {
  std::vector<std::complex<double>> out(m.dim());
  for (std::size_t r = 0; r < m.dim(); ++r) {
    out[r] = m(r, col);
  }
  return out;
}

}  // namespace qdd::oracle
