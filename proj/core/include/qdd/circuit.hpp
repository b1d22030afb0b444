#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qdd/package.hpp"

namespace qdd {

enum class GateKind { H, X, Y, Z, S, Sdg, T, Tdg, SX, SY, CX, CZ, CP };

std::string_view gate_name(GateKind kind) noexcept;
std::optional<GateKind> gate_from_name(std::string_view name) noexcept;
bool is_controlled(GateKind kind) noexcept;

struct Gate {
  GateKind kind = GateKind::H;
  Qubit target = 0;
  std::optional<Qubit> control;
  // cp only: phase pi / 2^(k-1)
  unsigned k = 0;

  friend bool operator==(const Gate&, const Gate&) = default;
};

/// Qubit 0 is the most significant bit of a basis index.
struct Circuit {
  std::size_t qubits = 1;
  std::vector<Gate> gates;

  friend bool operator==(const Circuit&, const Circuit&) = default;
};

/// Single-qubit operator applied to the target (for cx/cz/cp, the operator
/// applied when the control is 1).
GateMatrix gate_matrix(const Gate& g);

/// Parses the line-oriented circuit format:
///
///     # comment
///     qubits 2
///     h 0
///     cx 0 1
///     cp 3 0 1     # phase pi/4, control 0, target 1
Circuit parse_circuit(std::string_view text);
Circuit load_circuit(const std::filesystem::path& path);
std::string render_circuit(const Circuit& c);

void validate(const Circuit& c);

MatrixEdge gate_dd(Package& pkg, const Gate& g, std::size_t n);

/// Called after each gate with the number of gates applied so far; return
/// false to stop early.
using BuildProgress = std::function<bool(std::size_t)>;

/// U = G_k ... G_2 G_1, starting from the identity. The returned root is
/// not protected. Garbage collection may run between gates. Only the first
/// `limit` gates are used when given.
MatrixEdge build_functionality(Package& pkg, const Circuit& c,
                               std::optional<std::size_t> limit = std::nullopt,
                               const BuildProgress& progress = {});

/// U|0...0> by successive matrix-vector products.
VectorEdge simulate(Package& pkg, const Circuit& c, std::optional<std::size_t> limit = std::nullopt);

/// Textbook QFT without the final qubit reversal: for each qubit j an H,
/// then cp(k - j + 1) controlled by every later qubit k. The result maps
/// column x to row bitreverse(y) with amplitude exp(2 pi i x y / 2^n) / sqrt(2^n).
Circuit gen_qft(std::size_t n);

/// xorshift64* (shifts 12, 25, 27; multiplier 0x2545F4914F6CDD1D). A zero
/// seed is replaced by 0x9E3779B97F4A7C15.
class XorShift64Star {
 public:
  explicit XorShift64Star(std::uint64_t seed) noexcept
      : state_(seed == 0 ? 0x9E3779B97F4A7C15ULL : seed) {}

  std::uint64_t next() noexcept {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1DULL;
  }

 private:
  std::uint64_t state_;
};

/// Random grid circuit. Cycle 0 puts H on every qubit. Cycle c >= 1 applies
/// CZ layout (c - 1) mod 8, then a single-qubit gate on each qubit that is
/// idle in this layout but was coupled in the previous cycle: t for the
/// first such gate on a qubit, otherwise one of {t, sx, sy} different from
/// its previous gate. `depth` counts cycles including cycle 0. Qubit index
/// is row * cols + col.
///
/// Layouts 0..7 are H(0,0) H(1,0) V(0,0) V(1,0) H(0,1) H(1,1) V(0,1) V(1,1):
/// H(a,b) couples (r,c)-(r,c+1) where c = a + b*r (mod 2); V(a,b) couples
/// (r,c)-(r+1,c) where r = a + b*c (mod 2).
Circuit gen_supremacy(std::size_t rows, std::size_t cols, std::size_t depth, std::uint64_t seed);

}  // namespace qdd
