#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "qdd/complex.hpp"
#include "qdd/errors.hpp"

namespace qdd {
namespace {

constexpr double kEps = 1e-13;
constexpr std::size_t kBuckets = 65536;
const double kRsqrt2 = 1.0 / std::numbers::sqrt2;

ComplexNumbers make_numbers(TableMode mode = TableMode::Bucketed, std::size_t cache = 64) {
  return ComplexNumbers(kEps, kBuckets, cache, mode);
}

// Brute-force scan over every live entry.
std::vector<const RealEntry*> entries_within(const RealTable& t, double a) {
  std::vector<const RealEntry*> out;
  t.for_each_entry([&](const RealEntry& e, std::size_t) {
    if (std::abs(e.value - a) <= t.epsilon()) {
      out.push_back(&e);
    }
  });
  return out;
}

bool pairwise_separated(const RealTable& t) {
  std::vector<double> values;
  t.for_each_entry([&](const RealEntry& e, std::size_t) { values.push_back(e.value); });
  std::sort(values.begin(), values.end());
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] - values[i - 1] <= t.epsilon()) {
      return false;
    }
  }
  return true;
}

TEST(RealTable, ZeroIsCanonicalAndPositive) {
  RealTable t(kEps, kBuckets);
  const RealHandle z = t.lookup(0.0);
  EXPECT_EQ(z, t.zero());
  EXPECT_FALSE(z.negative());
  EXPECT_EQ(t.lookup(-0.0), t.zero());
  EXPECT_EQ(t.lookup(-0.5 * kEps), t.zero());
}

TEST(RealTable, ToleranceMatchKeepsSign) {
  RealTable t(kEps, kBuckets);
  const double v = 0.7071067811865476;
  const RealHandle first = t.lookup(v);
  const RealHandle again = t.lookup(-(v + 1e-14));
  EXPECT_EQ(again.entry(), first.entry());
  EXPECT_TRUE(again.negative());
  EXPECT_FALSE(first.negative());
  EXPECT_EQ(t.stats().live, 3U);
}

TEST(RealTable, NeighborBucketSearch) {
  RealTable t(kEps, kBuckets);
  const double border = 1.0 / 65536.0;
  const double r1 = border - 2e-14;
  const double r2 = border + 2e-14;
  ASSERT_EQ(t.bucket_index(r1), 0U);
  ASSERT_EQ(t.bucket_index(r2), 1U);

  const RealHandle h1 = t.lookup(r1);
  const auto before = t.stats().neighbor_searches;
  const RealHandle h2 = t.lookup(r2);
  EXPECT_EQ(h2.entry(), h1.entry());
  EXPECT_EQ(t.stats().neighbor_searches, before + 1);

  // Linear-scan oracle: r1's entry is the only one within eps of r2.
  const auto matches = entries_within(t, r2);
  ASSERT_EQ(matches.size(), 1U);
  EXPECT_EQ(matches.front(), h1.entry());
}

TEST(RealTable, NeighborSearchAtUpperBorder) {
  RealTable t(kEps, kBuckets);
  const double border = 7.0 / 65536.0;
  const RealHandle above = t.lookup(border + 3e-14);
  const RealHandle below = t.lookup(border - 3e-14);
  EXPECT_EQ(below.entry(), above.entry());
}

TEST(RealTable, OutOfRangeIsContractViolation) {
  RealTable t(kEps, kBuckets);
  EXPECT_THROW(t.lookup(1.5), ContractViolation);
  EXPECT_THROW(t.lookup(-1.0 - 10 * kEps), ContractViolation);
  EXPECT_THROW(t.lookup(std::nan("")), ContractViolation);
  try {
    t.lookup(1.25);
    FAIL();
  } catch (const ContractViolation& e) {
    EXPECT_NE(std::string(e.what()).find("1.25"), std::string::npos);
  }
  EXPECT_EQ(t.lookup(1.0 + 0.5 * kEps), t.one());
}

TEST(RealTable, OverflowChainForLargeRootWeights) {
  RealTable t(kEps, kBuckets);
  const RealHandle a = t.lookup_unbounded(std::numbers::sqrt2);
  const RealHandle b = t.lookup_unbounded(-std::numbers::sqrt2 - 1e-14);
  EXPECT_EQ(a.entry(), b.entry());
  EXPECT_TRUE(b.negative());
  EXPECT_EQ(t.lookup_unbounded(0.5).entry(), t.lookup(0.5).entry());
}

TEST(RealTable, ConfigurationChecks) {
  EXPECT_THROW(RealTable(0.25, 4), ContractViolation);
  EXPECT_THROW(RealTable(0.0, 16), ContractViolation);
  EXPECT_NO_THROW(RealTable(0.1, 4));
}

TEST(RealTable, GarbageCollection) {
  RealTable t(kEps, kBuckets);
  EXPECT_EQ(t.garbage_collect(), 0U);

  const RealHandle h = t.lookup(kRsqrt2);
  t.inc_ref(h.entry());
  EXPECT_EQ(t.garbage_collect(), 0U);
  t.dec_ref(h.entry());
  EXPECT_EQ(t.garbage_collect(), 1U);
  EXPECT_EQ(t.stats().live, 2U);
  EXPECT_THROW(t.dec_ref(h.entry()), ContractViolation);

  // Freed entries are recycled.
  const RealHandle again = t.lookup(0.3);
  EXPECT_EQ(again.entry(), h.entry());
}

TEST(RealTable, SaturatedEntriesAreImmortal) {
  RealTable t(kEps, kBuckets);
  RealEntry* e = t.lookup(0.25).entry();
  e->ref = RealEntry::kImmortal - 1;
  t.inc_ref(e);
  EXPECT_EQ(e->ref, RealEntry::kImmortal);
  for (int i = 0; i < 5; ++i) {
    t.dec_ref(e);
  }
  EXPECT_EQ(e->ref, RealEntry::kImmortal);
  EXPECT_EQ(t.garbage_collect(), 0U);
}

class RealTableProperties : public ::testing::TestWithParam<TableMode> {};

TEST_P(RealTableProperties, RandomLookups) {
  RealTable t(kEps, kBuckets, GetParam());
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coarse(-1.0, 1.0);
  std::uniform_real_distribution<double> jitter(-3 * kEps, 3 * kEps);
  std::vector<double> base;
  for (int i = 0; i < 200; ++i) {
    base.push_back(coarse(rng));
  }
  // Some values hug bucket borders.
  for (int i = 1; i < 50; ++i) {
    base.push_back(static_cast<double>(i) / kBuckets);
  }
  const int rounds = GetParam() == TableMode::LinearScan ? 2000 : 20000;
  for (int i = 0; i < rounds; ++i) {
    const double r = std::clamp(base[rng() % base.size()] + jitter(rng), -1.0, 1.0);
    const RealHandle h1 = t.lookup(r);
    const RealHandle h2 = t.lookup(r);
    ASSERT_EQ(h1, h2);
    ASSERT_LE(std::abs(h1.value() - r), kEps);
    if (h1.entry()->value == 0.0) {
      ASSERT_FALSE(h1.negative());
    }
  }
  EXPECT_TRUE(pairwise_separated(t));
  if (GetParam() == TableMode::Bucketed) {
    bool resident = true;
    t.for_each_entry([&](const RealEntry& e, std::size_t b) {
      resident &= b == t.bucket_index(e.value);
    });
    EXPECT_TRUE(resident);
  }
}

INSTANTIATE_TEST_SUITE_P(Modes, RealTableProperties,
                         ::testing::Values(TableMode::Bucketed, TableMode::LinearScan));

TEST(ComplexLookup, Examples) {
  auto cn = make_numbers();
  const ComplexValue one = cn.lookup(1.0, 0.0);
  EXPECT_EQ(one, cn.one());
  EXPECT_FALSE(one.re.negative());

  const ComplexValue neg = cn.lookup(-kRsqrt2, 0.0);
  const ComplexValue pos = cn.lookup(kRsqrt2, 0.0);
  EXPECT_EQ(neg.re.entry(), pos.re.entry());
  EXPECT_TRUE(neg.re.negative());
  EXPECT_FALSE(pos.re.negative());

  EXPECT_EQ(cn.lookup(0.5, 0.5), cn.lookup(0.5, 0.5));
  // Both parts share the entry for 0.5.
  const ComplexValue half = cn.lookup(0.5, -0.5);
  EXPECT_EQ(half.re.entry(), half.im.entry());
}

TEST(TagOps, Examples) {
  auto cn = make_numbers();
  const ComplexValue v = cn.lookup(0.5, -0.5);
  EXPECT_EQ(mul_i(v), cn.lookup(0.5, 0.5));

  const ComplexValue w = cn.lookup(0.3, 0.8);
  EXPECT_EQ(conjugate(conjugate(w)), w);

  const ComplexValue i = cn.lookup(0.0, 1.0);
  const ComplexValue negated = negate(i);
  EXPECT_EQ(negated, cn.lookup(0.0, -1.0));
  EXPECT_FALSE(negated.re.negative());
}

TEST(TagOps, AgreeWithExactArithmetic) {
  auto cn = make_numbers();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const std::complex<double> i{0.0, 1.0};
  for (int k = 0; k < 1000; ++k) {
    const double re = k % 10 == 0 ? 0.0 : d(rng);
    const double im = k % 7 == 0 ? 0.0 : d(rng);
    const ComplexValue v = cn.lookup(re, im);
    const auto x = v.value();
    EXPECT_EQ(negate(v).value(), -x);
    EXPECT_EQ(conjugate(v).value(), std::conj(x));
    EXPECT_EQ(mul_i(v).value(), x * i);
    EXPECT_EQ(mul_neg_i(v).value(), x * -i);
    for (TagOp op : {TagOp::Negate, TagOp::Conjugate, TagOp::MulI, TagOp::MulNegI}) {
      const ComplexValue t = tag_op(op, v);
      EXPECT_FALSE(t.re.entry()->value == 0.0 && t.re.negative());
      EXPECT_FALSE(t.im.entry()->value == 0.0 && t.im.negative());
    }
  }
}

TEST(Arithmetic, ResultsStayInCache) {
  auto cn = make_numbers();
  const ComplexValue r = cn.lookup(kRsqrt2, 0.0);
  const auto live = cn.table().stats().live;

  const ComplexValue p = cn.mul(r, r);
  EXPECT_TRUE(cn.is_cached(p));
  EXPECT_NEAR(p.value().real(), 0.5, 1e-15);
  EXPECT_EQ(p.value().imag(), 0.0);

  const ComplexValue s = cn.add(r, r);
  EXPECT_TRUE(cn.is_cached(s));
  EXPECT_NEAR(s.value().real(), std::numbers::sqrt2, 1e-15);

  const ComplexValue i = cn.lookup(0.0, 1.0);
  const ComplexValue q = cn.div(i, i);
  EXPECT_EQ(q.value(), std::complex<double>(1.0, 0.0));

  const ComplexValue d = cn.sub(r, r);
  EXPECT_EQ(d.value(), std::complex<double>(0.0, 0.0));

  EXPECT_EQ(cn.table().stats().live, live);
  for (auto v : {p, s, q, d}) {
    cn.release(v);
  }
  EXPECT_EQ(cn.cache().stats().in_use, 0U);
  EXPECT_EQ(cn.cache().stats().allocs, cn.cache().stats().releases);
}

TEST(Arithmetic, Errors) {
  auto cn = make_numbers(TableMode::Bucketed, 3);
  EXPECT_THROW(cn.div(cn.one(), cn.zero()), ArithmeticError);
  EXPECT_THROW(cn.div(cn.one(), cn.lookup(1e-14, 0.0)), ArithmeticError);

  std::vector<ComplexValue> held;
  for (int k = 0; k < 3; ++k) {
    held.push_back(cn.add(cn.one(), cn.one()));
  }
  EXPECT_THROW(cn.add(cn.one(), cn.one()), ContractViolation);
  for (auto v : held) {
    cn.release(v);
  }
  EXPECT_THROW(cn.release(cn.one()), ContractViolation);
}

TEST(Intern, CollapsesWithinTolerance) {
  auto cn = make_numbers();
  EXPECT_EQ(cn.intern(cn.cache_value({1.0, 0.0})), cn.one());

  const ComplexValue a = cn.intern(cn.cache_value({0.6, -0.8}));
  const ComplexValue b = cn.intern(cn.cache_value({0.6 + 0.4 * kEps, -0.8 - 0.3 * kEps}));
  EXPECT_EQ(a, b);
  EXPECT_FALSE(cn.is_cached(a));
  EXPECT_EQ(cn.cache().stats().in_use, 0U);
  EXPECT_EQ(cn.cache().stats().allocs, cn.cache().stats().releases);
}

TEST(RoundForKey, GridBehaviour) {
  auto cn = make_numbers();
  const double step = 2 * kEps;
  const double x = 123456.0 * step;
  const ComplexValue a = cn.cache_value({x, -x});
  const ComplexValue b = cn.cache_value({x + 0.5 * kEps, -x - 0.5 * kEps});
  EXPECT_EQ(cn.round_for_key(a), cn.round_for_key(b));
  cn.release(a);
  cn.release(b);

  const ComplexValue t = cn.lookup(kRsqrt2, -0.25);
  EXPECT_EQ(cn.round_for_key(t), cn.round_for_key(t));
  EXPECT_NE(cn.round_for_key(cn.lookup(1.0, 0.0)), cn.round_for_key(cn.lookup(0.0, 1.0)));
}

TEST(ComplexRefs, TableValuesCountCacheValuesDoNot) {
  auto cn = make_numbers();
  const ComplexValue v = cn.lookup(0.25, 0.75);
  cn.inc_ref(v);
  EXPECT_EQ(v.re.entry()->ref, 1U);
  EXPECT_EQ(cn.garbage_collect(), 0U);
  cn.dec_ref(v);
  EXPECT_EQ(cn.garbage_collect(), 2U);

  const ComplexValue c = cn.cache_value({0.1, 0.2});
  cn.inc_ref(c);
  cn.dec_ref(c);
  EXPECT_EQ(c.re.entry()->ref, 0U);
  cn.release(c);
}

}  // namespace
}  // namespace qdd
