#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "qdd/circuit.hpp"
#include "qdd/package.hpp"

/// Dense reference implementation. Shares no code path with the decision
/// diagram package apart from reading DD entries in compare().
namespace qdd::oracle {

inline constexpr std::size_t kMaxQubits = 12;

class DenseMatrix {
 public:
  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t dim) : dim_(dim), data_(dim * dim) {}

  static DenseMatrix identity(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  std::complex<double>& operator()(std::size_t r, std::size_t c) { return data_[r * dim_ + c]; }
  const std::complex<double>& operator()(std::size_t r, std::size_t c) const {
    return data_[r * dim_ + c];
  }

  DenseMatrix operator*(const DenseMatrix& rhs) const;
  DenseMatrix adjoint() const;
  double max_abs_diff(const DenseMatrix& other) const;

 private:
  std::size_t dim_ = 0;
  std::vector<std::complex<double>> data_;
};

/// The 2x2 operator of a gate, written out independently of gate_matrix().
DenseMatrix single_qubit_matrix(const Gate& g);

DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b);

/// Full 2^n x 2^n matrix of one gate: Kronecker composition with identities,
/// controlled gates placed block-wise (identity where the control is 0).
DenseMatrix dense_gate(const Gate& g, std::size_t n);

/// M <- G * M for one gate without forming G, using its 2x2 block action on
/// row pairs.
void apply_gate(DenseMatrix& m, const Gate& g, std::size_t n);

/// Matrix of the whole circuit, G_k ... G_1. Refuses n > kMaxQubits.
DenseMatrix dense_from_circuit(const Circuit& c);

/// Same product computed by explicit multiplication of dense_gate() matrices.
DenseMatrix dense_from_circuit_by_products(const Circuit& c);

struct CompareReport {
  double max_deviation = 0.0;
  std::size_t row = 0;
  std::size_t col = 0;
  bool pass = true;
};

CompareReport compare(const Package& pkg, const MatrixEdge& root, const DenseMatrix& m,
                      double tol);
CompareReport compare(const Package& pkg, const VectorEdge& root,
                      const std::vector<std::complex<double>>& v, double tol);

std::vector<std::complex<double>> column(const DenseMatrix& m, std::size_t col);

}  // namespace qdd::oracle
