#include "qdd/circuit.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "qdd/errors.hpp"

namespace qdd {

namespace {

using C = std::complex<double>;

struct NamedGate {
  std::string_view name;
  GateKind kind;
};

constexpr std::array<NamedGate, 13> kGateNames{{
    {"h", GateKind::H},
    {"x", GateKind::X},
    {"y", GateKind::Y},
    {"z", GateKind::Z},
    {"s", GateKind::S},
    {"sdg", GateKind::Sdg},
    {"t", GateKind::T},
    {"tdg", GateKind::Tdg},
    {"sx", GateKind::SX},
    {"sy", GateKind::SY},
    {"cx", GateKind::CX},
    {"cz", GateKind::CZ},
    {"cp", GateKind::CP},
}};

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) {
      ++i;
    }
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') {
      ++i;
    }
    if (i > start) {
      out.push_back(s.substr(start, i - start));
    }
  }
  return out;
}

std::size_t parse_index(std::string_view tok, std::size_t line) {
  std::size_t value = 0;
  const auto* end = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError(line, "expected a decimal index, got '" + std::string(tok) + "'");
  }
  return value;
}

}  // namespace

std::string_view gate_name(GateKind kind) noexcept {
  for (const auto& g : kGateNames) {
    if (g.kind == kind) {
      return g.name;
    }
  }
  return "?";
}

std::optional<GateKind> gate_from_name(std::string_view name) noexcept {
  for (const auto& g : kGateNames) {
    if (g.name == name) {
      return g.kind;
    }
  }
  return std::nullopt;
}

bool is_controlled(GateKind kind) noexcept {
  return kind == GateKind::CX || kind == GateKind::CZ || kind == GateKind::CP;
}

GateMatrix gate_matrix(const Gate& g) {
  constexpr double r = std::numbers::sqrt2 / 2.0;
  const C i{0.0, 1.0};
  const C t{r, r};  // e^{i pi/4}
  switch (g.kind) {
    case GateKind::H: return {C{r}, C{r}, C{r}, C{-r}};
    case GateKind::X:
    case GateKind::CX: return {C{0}, C{1}, C{1}, C{0}};
    case GateKind::Y: return {C{0}, -i, i, C{0}};
    case GateKind::Z:
    case GateKind::CZ: return {C{1}, C{0}, C{0}, C{-1}};
    case GateKind::S: return {C{1}, C{0}, C{0}, i};
    case GateKind::Sdg: return {C{1}, C{0}, C{0}, -i};
    case GateKind::T: return {C{1}, C{0}, C{0}, t};
    case GateKind::Tdg: return {C{1}, C{0}, C{0}, std::conj(t)};
    case GateKind::SX: return {C{0.5, 0.5}, C{0.5, -0.5}, C{0.5, -0.5}, C{0.5, 0.5}};
    case GateKind::SY: return {C{0.5, 0.5}, C{-0.5, -0.5}, C{0.5, 0.5}, C{0.5, 0.5}};
    case GateKind::CP: {
      if (g.k == 0) {
        throw ContractViolation("cp needs k >= 1");
      }
      const double angle = std::numbers::pi / std::ldexp(1.0, static_cast<int>(g.k) - 1);
      return {C{1}, C{0}, C{0}, std::polar(1.0, angle)};
    }
  }
  throw ContractViolation("unknown gate kind");
}

void validate(const Circuit& c) {
  if (c.qubits == 0) {
    throw ContractViolation("circuit needs at least one qubit");
  }
  for (const Gate& g : c.gates) {
    if (g.target >= c.qubits) {
      throw ContractViolation("target qubit " + std::to_string(g.target) + " out of range");
    }
    if (is_controlled(g.kind) != g.control.has_value()) {
      throw ContractViolation(std::string(gate_name(g.kind)) + ": wrong control arity");
    }
    if (g.control && (*g.control >= c.qubits || *g.control == g.target)) {
      throw ContractViolation(std::string(gate_name(g.kind)) + ": bad control qubit");
    }
  }
}

Circuit parse_circuit(std::string_view text) {
  Circuit c;
  bool have_header = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    const auto tok = split_ws(line);
    if (tok.empty()) {
      continue;
    }
    if (!have_header) {
      if (tok[0] != "qubits" || tok.size() != 2) {
        throw ParseError(line_no, "expected header 'qubits <n>'");
      }
      c.qubits = parse_index(tok[1], line_no);
      if (c.qubits == 0) {
        throw ParseError(line_no, "qubit count must be positive");
      }
      have_header = true;
      continue;
    }
    const auto kind = gate_from_name(tok[0]);
    if (!kind) {
      throw ParseError(line_no, "unknown gate '" + std::string(tok[0]) + "'");
    }
    Gate g;
    g.kind = *kind;
    std::size_t expected = 2;
    if (*kind == GateKind::CP) {
      expected = 4;
    } else if (is_controlled(*kind)) {
      expected = 3;
    }
    if (tok.size() != expected) {
      throw ParseError(line_no, std::string(tok[0]) + " takes " + std::to_string(expected - 1) +
                                    " arguments");
    }
    std::size_t pos = 1;
    if (*kind == GateKind::CP) {
      const auto k = parse_index(tok[pos++], line_no);
      if (k == 0 || k > 1000) {
        throw ParseError(line_no, "cp exponent must be in [1, 1000]");
      }
      g.k = static_cast<unsigned>(k);
    }
    if (is_controlled(*kind)) {
      g.control = parse_index(tok[pos++], line_no);
    }
    g.target = parse_index(tok[pos], line_no);
    if (g.target >= c.qubits || (g.control && *g.control >= c.qubits)) {
      throw ParseError(line_no, "qubit index out of range for " + std::to_string(c.qubits) +
                                    " qubits");
    }
    if (g.control && *g.control == g.target) {
      throw ParseError(line_no, "control equals target");
    }
    c.gates.push_back(g);
  }
  if (!have_header) {
    throw ParseError(line_no == 0 ? 1 : line_no, "missing 'qubits <n>' header");
  }
  return c;
}

Circuit load_circuit(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError(0, "cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_circuit(buf.str());
}

std::string render_circuit(const Circuit& c) {
  std::ostringstream os;
  os << "qubits " << c.qubits << '\n';
  for (const Gate& g : c.gates) {
    os << gate_name(g.kind);
    if (g.kind == GateKind::CP) {
      os << ' ' << g.k;
    }
    if (g.control) {
      os << ' ' << *g.control;
    }
    os << ' ' << g.target << '\n';
  }
  return os.str();
}

MatrixEdge gate_dd(Package& pkg, const Gate& g, std::size_t n) {
  if (g.control) {
    const Qubit controls[] = {*g.control};
    return pkg.gate(gate_matrix(g), g.target, controls, n);
  }
  return pkg.gate(gate_matrix(g), g.target, {}, n);
}

MatrixEdge build_functionality(Package& pkg, const Circuit& c, std::optional<std::size_t> limit,
                               const BuildProgress& progress) {
  validate(c);
  const std::size_t count = std::min(limit.value_or(c.gates.size()), c.gates.size());
  MatrixEdge u = pkg.identity(c.qubits);
  pkg.inc_ref(u);
  for (std::size_t i = 0; i < count; ++i) {
    const MatrixEdge g = gate_dd(pkg, c.gates[i], c.qubits);
    const MatrixEdge next = pkg.multiply(g, u);
    pkg.inc_ref(next);
    pkg.dec_ref(u);
    u = next;
    pkg.collect_if_due();
    if (progress && !progress(i + 1)) {
      break;
    }
  }
  pkg.dec_ref(u);
  return u;
}

VectorEdge simulate(Package& pkg, const Circuit& c, std::optional<std::size_t> limit) {
  validate(c);
  const std::size_t count = std::min(limit.value_or(c.gates.size()), c.gates.size());
  VectorEdge state = pkg.zero_state(c.qubits);
  pkg.inc_ref(state);
  for (std::size_t i = 0; i < count; ++i) {
    const MatrixEdge g = gate_dd(pkg, c.gates[i], c.qubits);
    const VectorEdge next = pkg.mat_vec(g, state);
    pkg.inc_ref(next);
    pkg.dec_ref(state);
    state = next;
    pkg.collect_if_due();
  }
  pkg.dec_ref(state);
  return state;
}

Circuit gen_qft(std::size_t n) {
  if (n == 0) {
    throw ContractViolation("qft needs at least one qubit");
  }
  Circuit c;
  c.qubits = n;
  for (Qubit j = 0; j < n; ++j) {
    c.gates.push_back({GateKind::H, j, std::nullopt, 0});
    for (Qubit k = j + 1; k < n; ++k) {
      c.gates.push_back({GateKind::CP, j, k, static_cast<unsigned>(k - j + 1)});
    }
  }
  return c;
}

Circuit gen_supremacy(std::size_t rows, std::size_t cols, std::size_t depth, std::uint64_t seed) {
  if (rows == 0 || cols == 0 || depth == 0) {
    throw ContractViolation("supremacy circuit needs rows, cols, depth >= 1");
  }
  const std::size_t n = rows * cols;
  Circuit c;
  c.qubits = n;
  for (Qubit q = 0; q < n; ++q) {
    c.gates.push_back({GateKind::H, q, std::nullopt, 0});
  }

  XorShift64Star rng(seed);
  std::vector<bool> coupled_prev(n, false);
  std::vector<std::optional<GateKind>> last_single(n);
  constexpr std::array<GateKind, 3> kSingles{GateKind::T, GateKind::SX, GateKind::SY};

  for (std::size_t cycle = 1; cycle < depth; ++cycle) {
    const std::size_t layout = (cycle - 1) % 8;
    const bool horizontal = (layout % 4) < 2;
    const std::size_t a = layout % 2;
    const std::size_t b = layout / 4;
    std::vector<bool> coupled(n, false);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t col = 0; col < cols; ++col) {
        std::size_t r2 = r;
        std::size_t c2 = col;
        if (horizontal) {
          if (col % 2 != (a + b * r) % 2) {
            continue;
          }
          c2 = col + 1;
        } else {
          if (r % 2 != (a + b * col) % 2) {
            continue;
          }
          r2 = r + 1;
        }
        if (r2 >= rows || c2 >= cols) {
          continue;
        }
        const Qubit q1 = r * cols + col;
        const Qubit q2 = r2 * cols + c2;
        c.gates.push_back({GateKind::CZ, q2, q1, 0});
        coupled[q1] = true;
        coupled[q2] = true;
      }
    }
    for (Qubit q = 0; q < n; ++q) {
      if (coupled[q] || !coupled_prev[q]) {
        continue;
      }
      GateKind kind = GateKind::T;
      if (last_single[q]) {
        std::array<GateKind, 2> options{};
        std::size_t k = 0;
        for (GateKind s : kSingles) {
          if (s != *last_single[q]) {
            options[k++] = s;
          }
        }
        kind = options[rng.next() % 2];
      }
      c.gates.push_back({kind, q, std::nullopt, 0});
      last_single[q] = kind;
    }
    coupled_prev = std::move(coupled);
  }
  return c;
}

}  // namespace qdd
