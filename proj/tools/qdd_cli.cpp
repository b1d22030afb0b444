#include <algorithm>
#include <chrono>
#include <complex>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <new>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qdd/circuit.hpp"
#include "qdd/dot.hpp"
#include "qdd/errors.hpp"
#include "qdd/oracle.hpp"
#include "qdd/package.hpp"

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

constexpr int kExitParse = 1;
constexpr int kExitResource = 2;
constexpr int kExitTolerance = 3;
constexpr std::size_t kMaxDenseAmplitudeQubits = 24;

struct Options {
  std::string circuit;
  double epsilon = qdd::PackageConfig{}.epsilon;
  std::size_t buckets = qdd::PackageConfig{}.real_buckets;
  std::size_t gc_threshold = qdd::PackageConfig{}.gc_threshold;
  std::optional<std::size_t> truncate;
  std::string export_dot;
  bool linear_scan = false;
  double tol = 1e-10;
  std::string amplitudes = "all";
};

qdd::PackageConfig make_config(const Options& o, std::size_t qubits, bool linear) {
  qdd::PackageConfig c;
  c.epsilon = o.epsilon;
  c.real_buckets = o.buckets;
  c.gc_threshold = o.gc_threshold;
  c.max_qubits = std::max(c.max_qubits, qubits);
  c.table_mode = linear ? qdd::TableMode::LinearScan : qdd::TableMode::Bucketed;
  return c;
}

std::size_t applied_gates(const Options& o, const qdd::Circuit& c) {
  return std::min(o.truncate.value_or(c.gates.size()), c.gates.size());
}

// dd_size counts nodes of the result; peak_unique_table_nodes is the sum of
// the matrix and vector table peaks, so it bounds dd_size for either kind.
template <class NodeT>
json run_stats(const qdd::Package& pkg, const qdd::Circuit& c, std::size_t ops,
               const qdd::Edge<NodeT>& root, double ms) {
  const qdd::PackageStats s = pkg.stats();
  json j;
  j["qubits"] = c.qubits;
  j["op_count"] = ops;
  j["dd_size"] = pkg.size(root);
  j["distinct_complex_entries"] = s.reals.live;
  j["peak_complex_entries"] = s.reals.peak;
  j["peak_unique_table_nodes"] = s.matrix_nodes.peak + s.vector_nodes.peak;
  j["gc_runs"] = s.gc_runs;
  j["wall_time_ms"] = ms;
  return j;
}

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

template <class NodeT>
void write_dot(const std::string& path, const qdd::Edge<NodeT>& root) {
  if (path.empty()) {
    return;
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  qdd::export_dot(root, out);
}

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

int cmd_build(const Options& o) {
  const qdd::Circuit c = qdd::load_circuit(o.circuit);
  qdd::Package pkg(make_config(o, c.qubits, o.linear_scan));
  const auto start = Clock::now();
  const qdd::MatrixEdge u = qdd::build_functionality(pkg, c, o.truncate);
  const double ms = elapsed_ms(start);
  write_dot(o.export_dot, u);
  emit(run_stats(pkg, c, applied_gates(o, c), u, ms));
  return 0;
}

json amplitude_list(const qdd::Package& pkg, const qdd::VectorEdge& v, std::size_t n,
                    const std::string& mode) {
  if (n > kMaxDenseAmplitudeQubits) {
    throw qdd::ContractViolation("amplitude listing limited to " +
                                 std::to_string(kMaxDenseAmplitudeQubits) + " qubits");
  }
  const auto amps = pkg.amplitudes(v);
  std::vector<std::size_t> order(amps.size());
  std::iota(order.begin(), order.end(), 0);
  if (mode != "all") {
    const std::size_t k = std::min<std::size_t>(std::stoull(mode.substr(4)), amps.size());
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::norm(amps[a]) > std::norm(amps[b]);
    });
    order.resize(k);
  }
  json list = json::array();
  for (std::size_t i : order) {
    std::string bits(n, '0');
    for (std::size_t q = 0; q < n; ++q) {
      if ((i >> (n - 1 - q)) & 1U) {
        bits[q] = '1';
      }
    }
    list.push_back({{"index", i}, {"state", bits}, {"re", amps[i].real()}, {"im", amps[i].imag()}});
  }
  return list;
}

int cmd_simulate(const Options& o) {
  const qdd::Circuit c = qdd::load_circuit(o.circuit);
  qdd::Package pkg(make_config(o, c.qubits, o.linear_scan));
  const auto start = Clock::now();
  const qdd::VectorEdge v = qdd::simulate(pkg, c, o.truncate);
  const double ms = elapsed_ms(start);
  write_dot(o.export_dot, v);
  json j = run_stats(pkg, c, applied_gates(o, c), v, ms);
  j["amplitudes"] = amplitude_list(pkg, v, c.qubits, o.amplitudes);
  emit(j);
  return 0;
}

int cmd_verify(const Options& o) {
  qdd::Circuit c = qdd::load_circuit(o.circuit);
  if (c.qubits > qdd::oracle::kMaxQubits) {
    throw qdd::ContractViolation("verify supports at most " +
                                 std::to_string(qdd::oracle::kMaxQubits) + " qubits");
  }
  c.gates.resize(applied_gates(o, c));
  qdd::Package pkg(make_config(o, c.qubits, o.linear_scan));
  const auto start = Clock::now();
  const qdd::MatrixEdge u = qdd::build_functionality(pkg, c);
  const double ms = elapsed_ms(start);
  pkg.inc_ref(u);
  const auto report = qdd::oracle::compare(pkg, u, qdd::oracle::dense_from_circuit(c), o.tol);
  write_dot(o.export_dot, u);
  json j = run_stats(pkg, c, c.gates.size(), u, ms);
  j["max_deviation"] = report.max_deviation;
  j["worst_row"] = report.row;
  j["worst_col"] = report.col;
  j["tol"] = o.tol;
  j["pass"] = report.pass;
  emit(j);
  if (!report.pass) {
    std::cerr << "verify: deviation " << report.max_deviation << " exceeds " << o.tol << '\n';
    return kExitTolerance;
  }
  return 0;
}

int cmd_bench(const Options& o, unsigned repeat) {
  const qdd::Circuit c = qdd::load_circuit(o.circuit);
  json j;
  j["qubits"] = c.qubits;
  j["op_count"] = applied_gates(o, c);
  double times[2] = {0.0, 0.0};
  for (int linear = 0; linear < 2; ++linear) {
    double best = 0.0;
    json stats;
    for (unsigned r = 0; r < repeat; ++r) {
      qdd::Package pkg(make_config(o, c.qubits, linear != 0));
      const auto start = Clock::now();
      const qdd::MatrixEdge u = qdd::build_functionality(pkg, c, o.truncate);
      const double ms = elapsed_ms(start);
      if (r == 0 || ms < best) {
        best = ms;
        stats = run_stats(pkg, c, applied_gates(o, c), u, ms);
      }
    }
    times[linear] = best;
    j[linear != 0 ? "linear_scan" : "bucketed"] = stats;
  }
  j["speedup"] = times[0] > 0.0 ? times[1] / times[0] : 0.0;
  emit(j);
  return 0;
}

int write_circuit(const qdd::Circuit& c, const std::string& out) {
  const std::string text = qdd::render_circuit(c);
  if (out.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream f(out);
  if (!f) {
    std::cerr << "gen: cannot write " << out << '\n';
    return kExitResource;
  }
  f << text;
  return 0;
}

void add_table_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("circuit", o.circuit, "Circuit file")->required();
  cmd->add_option("--epsilon", o.epsilon, "Complex-table tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--buckets", o.buckets, "Real-table bucket count");
  cmd->add_option("--gc-threshold", o.gc_threshold, "Node insertions between collections");
  cmd->add_option("--truncate", o.truncate, "Apply only the first K gates");
  cmd->add_flag("--linear-scan-table", o.linear_scan, "Use the linear-scan real table");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decision-diagram quantum circuit tool"};
  app.require_subcommand(1);
  Options o;

  auto* build = app.add_subcommand("build", "Build the functionality DD of a circuit");
  add_table_flags(build, o);
  build->add_option("--export-dot", o.export_dot, "Write the DD in DOT format");

  auto* sim = app.add_subcommand("simulate", "Simulate a circuit from |0...0>");
  add_table_flags(sim, o);
  sim->add_option("--export-dot", o.export_dot, "Write the state DD in DOT format");
  sim->add_option("--amplitudes", o.amplitudes, "all | top-<k>")
      ->check([](const std::string& s) -> std::string {
        if (s == "all") {
          return {};
        }
        if (s.rfind("top-", 0) == 0 && s.size() > 4 &&
            s.find_first_not_of("0123456789", 4) == std::string::npos) {
          return {};
        }
        return "expected 'all' or 'top-<k>'";
      });

  auto* verify = app.add_subcommand("verify", "Compare the DD against a dense reference");
  add_table_flags(verify, o);
  verify->add_option("--export-dot", o.export_dot, "Write the DD in DOT format");
  verify->add_option("--tol", o.tol, "Maximum absolute deviation")->check(CLI::NonNegativeNumber);

  unsigned repeat = 1;
  auto* bench = app.add_subcommand("bench", "Time bucketed vs linear-scan real tables");
  add_table_flags(bench, o);
  bench->add_option("--repeat", repeat, "Runs per table; the fastest is reported")
      ->check(CLI::PositiveNumber);

  auto* gen = app.add_subcommand("gen", "Generate a circuit");
  gen->require_subcommand(1);
  std::string out;
  std::size_t qft_n = 0;
  auto* qft = gen->add_subcommand("qft", "Quantum Fourier transform");
  qft->add_option("n", qft_n, "Qubits")->required()->check(CLI::PositiveNumber);
  qft->add_option("-o,--output", out, "Output file (default: standard output)");
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t depth = 0;
  std::uint64_t seed = 1;
  auto* sup = gen->add_subcommand("supremacy", "Random grid circuit");
  sup->add_option("rows", rows, "Grid rows")->required()->check(CLI::PositiveNumber);
  sup->add_option("cols", cols, "Grid columns")->required()->check(CLI::PositiveNumber);
  sup->add_option("depth", depth, "Cycles including the H layer")
      ->required()
      ->check(CLI::PositiveNumber);
  sup->add_option("--seed", seed, "PRNG seed");
  sup->add_option("-o,--output", out, "Output file (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitParse;
  }

  try {
    if (*build) {
      return cmd_build(o);
    }
    if (*sim) {
      return cmd_simulate(o);
    }
    if (*verify) {
      return cmd_verify(o);
    }
    if (*bench) {
      return cmd_bench(o, repeat);
    }
    if (*qft) {
      return write_circuit(qdd::gen_qft(qft_n), out);
    }
    return write_circuit(qdd::gen_supremacy(rows, cols, depth, seed), out);
  } catch (const qdd::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const std::bad_alloc&) {
    std::cerr << "error: out of memory\n";
    return kExitResource;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitResource;
  }
}
