#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qdd/circuit.hpp"
#include "qdd/errors.hpp"
#include "qdd/package.hpp"
#include "support.hpp"

namespace qdd {
namespace {

using testing::small_config;

const double kRsqrt2 = 1.0 / std::numbers::sqrt2;

class DdTest : public ::testing::Test {
 protected:
  Package pkg{small_config()};
  ComplexNumbers& cn = pkg.complex();

  MatrixEdge stub() { return pkg.zero_stub<MatrixNode>(); }
  MatrixEdge to_terminal(std::complex<double> w) {
    return {pkg.terminal<MatrixNode>(), cn.lookup(w)};
  }
};

TEST_F(DdTest, NormalizeDividesByLeftmostMaximum) {
  // q0 node over a shared identity child: weights 1/sqrt2, 1/sqrt2, 1/sqrt2, -1/sqrt2.
  const MatrixEdge id = pkg.identity(2);
  const MatrixEdge child = id.node->e[0];
  ASSERT_EQ(child.node->v, 1);
  std::array<MatrixEdge, 4> raw;
  for (std::size_t i = 0; i < 4; ++i) {
    raw[i] = {child.node, cn.lookup(i == 3 ? -kRsqrt2 : kRsqrt2, 0.0)};
  }
  auto n = pkg.normalize<MatrixNode>(0, raw);
  ASSERT_FALSE(n.zero);
  EXPECT_TRUE(cn.is_cached(n.factor));
  EXPECT_NEAR(n.factor.value().real(), kRsqrt2, 1e-15);
  EXPECT_EQ(n.edges[0].w, cn.one());
  EXPECT_EQ(n.edges[1].w, cn.one());
  EXPECT_EQ(n.edges[2].w, cn.one());
  EXPECT_EQ(n.edges[3].w, negate(cn.one()));
  cn.release(n.factor);
}

TEST_F(DdTest, NormalizeIdentityBlockUnchanged) {
  const MatrixEdge one = pkg.one_terminal<MatrixNode>();
  auto n = pkg.normalize<MatrixNode>(0, {one, stub(), stub(), one});
  EXPECT_EQ(n.factor.value(), std::complex<double>(1.0, 0.0));
  EXPECT_EQ(n.edges[0], one);
  EXPECT_EQ(n.edges[3], one);
  EXPECT_EQ(n.edges[1], stub());
  cn.release(n.factor);
}

TEST_F(DdTest, NormalizeAllZero) {
  auto n = pkg.normalize<MatrixNode>(0, {stub(), stub(), stub(), stub()});
  EXPECT_TRUE(n.zero);
  EXPECT_EQ(n.factor, cn.zero());
  EXPECT_EQ(pkg.make_node<MatrixNode>(0, {stub(), stub(), stub(), stub()}), stub());

  // Near-zero cache values count as zero and are returned to the cache.
  const MatrixEdge tiny{pkg.terminal<MatrixNode>(), cn.cache_value({1e-14, -1e-14})};
  EXPECT_TRUE(pkg.normalize<MatrixNode>(0, {tiny, stub(), stub(), stub()}).zero);
  EXPECT_EQ(cn.cache().stats().in_use, 0U);
}

TEST_F(DdTest, NormalizeTieBreaksLeftmost) {
  auto n = pkg.normalize<MatrixNode>(
      0, {to_terminal({0.0, 0.5}), to_terminal({0.5, 0.0}), to_terminal({0.3, 0.4}), stub()});
  EXPECT_EQ(n.edges[0].w, cn.one());
  EXPECT_EQ(n.edges[1].w, cn.lookup(0.0, -1.0));
  EXPECT_NEAR(n.factor.value().imag(), 0.5, 1e-16);
  cn.release(n.factor);

  auto m = pkg.normalize<MatrixNode>(
      0, {to_terminal(0.3), to_terminal({0.0, -0.9}), stub(), to_terminal(0.6)});
  EXPECT_EQ(m.edges[1].w, cn.one());
  EXPECT_NEAR(std::abs(m.edges[0].w.value() - std::complex<double>(0.3) / std::complex<double>(0.0, -0.9)), 0.0, 1e-13);
  cn.release(m.factor);
}

TEST_F(DdTest, NormalizeRejectsNonFinite) {
  const MatrixEdge bad{pkg.terminal<MatrixNode>(), cn.cache_value({std::nan(""), 0.0})};
  EXPECT_THROW(pkg.normalize<MatrixNode>(0, {bad, stub(), stub(), stub()}), ContractViolation);
}

TEST_F(DdTest, NormalizeConsumesCacheWeights) {
  const auto before = cn.cache().stats().in_use;
  const MatrixEdge a{pkg.terminal<MatrixNode>(), cn.cache_value({2.0, 0.0})};
  const MatrixEdge b{pkg.terminal<MatrixNode>(), cn.cache_value({1.0, 1.0})};
  auto n = pkg.normalize<MatrixNode>(0, {a, b, stub(), stub()});
  EXPECT_EQ(n.edges[0].w, cn.one());
  EXPECT_EQ(n.edges[1].w, cn.lookup(0.5, 0.5));
  EXPECT_EQ(cn.cache().stats().in_use, before + 1);  // only the factor
  cn.release(n.factor);
}

TEST_F(DdTest, UniqueLookupCanonicity) {
  const MatrixEdge one = pkg.one_terminal<MatrixNode>();
  const std::array<MatrixEdge, 4> a{one, stub(), stub(), one};
  const std::array<MatrixEdge, 4> b{one, stub(), stub(), MatrixEdge{one.node, negate(one.w)}};
  MatrixNode* n1 = pkg.unique_lookup<MatrixNode>(3, a);
  MatrixNode* n2 = pkg.unique_lookup<MatrixNode>(3, a);
  MatrixNode* n3 = pkg.unique_lookup<MatrixNode>(3, b);
  EXPECT_EQ(n1, n2);
  EXPECT_NE(n1, n3);
  EXPECT_FALSE(testing::unique_table_has_duplicates(pkg.matrix_nodes()));

  const MatrixEdge cached{one.node, cn.cache_value({0.5, 0.0})};
  EXPECT_THROW(pkg.unique_lookup<MatrixNode>(3, {cached, stub(), stub(), one}), ContractViolation);
  cn.release(cached.w);
  const MatrixEdge upper{n1, cn.one()};
  EXPECT_THROW(pkg.unique_lookup<MatrixNode>(3, {upper, stub(), stub(), upper}),
               ContractViolation);
}

TEST(DdExample, HadamardTensorIdentityHasTwoNodes) {
  Package pkg(small_config());
  const MatrixEdge h = gate_dd(pkg, {GateKind::H, 0, {}, 0}, 2);
  EXPECT_EQ(pkg.matrix_nodes().stats().live, 2U);
  EXPECT_EQ(pkg.size(h), 2U);
  EXPECT_NEAR(h.w.value().real(), kRsqrt2, 1e-15);
  EXPECT_EQ(h.node->e[3].w, negate(pkg.complex().one()));
  EXPECT_NEAR(std::abs(pkg.entry(h, 2, 2) - std::complex<double>(-kRsqrt2, 0.0)), 0.0, 1e-13);
}

TEST_F(DdTest, SizeExamples) {
  EXPECT_EQ(pkg.size(stub()), 0U);
  for (std::size_t n = 1; n <= 8; ++n) {
    EXPECT_EQ(pkg.size(pkg.identity(n)), n);
    EXPECT_EQ(pkg.levels(pkg.identity(n)), n);
  }
}

TEST_F(DdTest, ExtractIdentity) {
  const MatrixEdge id = pkg.identity(3);
  for (std::size_t r = 0; r < 8; ++r) {
    for (std::size_t c = 0; c < 8; ++c) {
      EXPECT_EQ(pkg.entry(id, r, c), std::complex<double>(r == c ? 1.0 : 0.0, 0.0));
    }
  }
  EXPECT_THROW(pkg.entry(id, 8, 0), ContractViolation);
  EXPECT_THROW(pkg.entry(id, 0, 9), ContractViolation);
  EXPECT_EQ(pkg.entry(stub(), 5, 5), std::complex<double>(0.0, 0.0));
  const VectorEdge zero = pkg.zero_state(2);
  EXPECT_EQ(pkg.amplitude(zero, 0), std::complex<double>(1.0, 0.0));
  EXPECT_EQ(pkg.amplitude(zero, 3), std::complex<double>(0.0, 0.0));
  EXPECT_THROW(pkg.amplitude(zero, 4), ContractViolation);
}

TEST_F(DdTest, RefcountBalance) {
  const MatrixEdge u = build_functionality(pkg, gen_qft(3));
  std::vector<std::uint32_t> before;
  pkg.matrix_nodes().for_each_node([&](const MatrixNode& n) { before.push_back(n.ref); });
  pkg.inc_ref(u);
  EXPECT_TRUE(testing::refcounts_consistent(pkg.matrix_nodes(), {u}));
  pkg.dec_ref(u);
  std::vector<std::uint32_t> after;
  pkg.matrix_nodes().for_each_node([&](const MatrixNode& n) { after.push_back(n.ref); });
  EXPECT_EQ(before, after);
  EXPECT_THROW(pkg.dec_ref(u), ContractViolation);
}

TEST_F(DdTest, SharedSubgraphsStayProtected) {
  const MatrixEdge a = pkg.identity(3);
  const MatrixEdge b = pkg.kron(gate_dd(pkg, {GateKind::X, 0, {}, 0}, 1), pkg.identity(2));
  pkg.inc_ref(a);
  pkg.inc_ref(b);
  EXPECT_TRUE(testing::refcounts_consistent(pkg.matrix_nodes(), {a, b}));
  pkg.dec_ref(a);
  EXPECT_TRUE(testing::refcounts_consistent(pkg.matrix_nodes(), {b}));
  pkg.garbage_collect();
  EXPECT_EQ(pkg.size(b), 3U);
  EXPECT_EQ(pkg.entry(b, 4, 0), std::complex<double>(1.0, 0.0));
  pkg.dec_ref(b);
}

TEST_F(DdTest, SaturatedNodeIsImmortal) {
  const MatrixEdge a = pkg.identity(2);
  a.node->ref = MatrixNode::kImmortal - 1;
  pkg.inc_ref(a);
  EXPECT_EQ(a.node->ref, MatrixNode::kImmortal);
  for (int i = 0; i < 10; ++i) {
    pkg.dec_ref(a);
  }
  pkg.garbage_collect();
  EXPECT_EQ(pkg.matrix_nodes().stats().live, 1U);
}

TEST_F(DdTest, GarbageCollectReleasesEverythingUnprotected) {
  const MatrixEdge u = build_functionality(pkg, gen_qft(4));
  pkg.inc_ref(u);
  pkg.dec_ref(u);
  const GcResult r = pkg.garbage_collect();
  EXPECT_GT(r.nodes, 0U);
  EXPECT_EQ(pkg.matrix_nodes().stats().live, 0U);
  EXPECT_EQ(pkg.complex().table().stats().live, 2U);
}

TEST_F(DdTest, GarbageCollectKeepsProtectedRoot) {
  const Circuit qft = gen_qft(3);
  const MatrixEdge u = build_functionality(pkg, qft);
  pkg.inc_ref(u);
  pkg.identity(5);
  pkg.garbage_collect();
  EXPECT_EQ(pkg.matrix_nodes().stats().live, pkg.size(u));
  EXPECT_EQ(testing::normalization_violation(pkg, u), "");
  const double s = 1.0 / std::sqrt(8.0);
  EXPECT_NEAR(std::abs(pkg.entry(u, 0, 0) - s), 0.0, 1e-12);
  pkg.dec_ref(u);
}

TEST_F(DdTest, GarbageCollectClearsComputeTables) {
  const MatrixEdge a = gate_dd(pkg, {GateKind::H, 1, {}, 0}, 3);
  const MatrixEdge b = gate_dd(pkg, {GateKind::T, 2, {}, 0}, 3);
  pkg.inc_ref(a);
  pkg.inc_ref(b);
  pkg.multiply(a, b);
  auto hits = pkg.stats().compute_hits;
  const MatrixEdge r1 = pkg.multiply(a, b);
  EXPECT_GT(pkg.stats().compute_hits, hits);

  pkg.garbage_collect();
  hits = pkg.stats().compute_hits;
  const auto lookups = pkg.stats().compute_lookups;
  const MatrixEdge r2 = pkg.multiply(a, b);
  EXPECT_GT(pkg.stats().compute_lookups, lookups + 1);  // top-level probe missed, recursed
  hits = pkg.stats().compute_hits;
  const auto lookups2 = pkg.stats().compute_lookups;
  const MatrixEdge r3 = pkg.multiply(a, b);
  EXPECT_EQ(pkg.stats().compute_lookups, lookups2 + 1);
  EXPECT_EQ(pkg.stats().compute_hits, hits + 1);
  EXPECT_EQ(r2, r3);
  (void)r1;
  pkg.dec_ref(a);
  pkg.dec_ref(b);
}

TEST_F(DdTest, GcTriggerThreshold) {
  PackageConfig cfg = small_config();
  cfg.gc_threshold = 10;
  Package p(cfg);
  EXPECT_FALSE(p.gc_due());
  p.identity(12);
  EXPECT_TRUE(p.gc_due());
  const GcResult r = p.collect_if_due();
  EXPECT_EQ(r.nodes, 12U);
  EXPECT_FALSE(p.gc_due());
  EXPECT_EQ(p.stats().gc_runs, 1U);
}

TEST_F(DdTest, InvalidConfiguration) {
  PackageConfig cfg = small_config();
  cfg.compute_slots = 1000;
  EXPECT_THROW(Package{cfg}, ContractViolation);
  cfg = small_config();
  cfg.real_buckets = 1 << 20;
  cfg.epsilon = 1e-6;
  EXPECT_THROW(Package{cfg}, ContractViolation);
}

}  // namespace
}  // namespace qdd
