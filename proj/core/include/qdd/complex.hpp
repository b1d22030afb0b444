#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

namespace qdd {

/// A nonnegative real stored either in the lookup table or in the
/// intermediate-value cache. Cache slots reuse the same layout and may hold
/// signed values of any magnitude.
struct RealEntry {
  static constexpr std::uint32_t kImmortal = std::numeric_limits<std::uint32_t>::max();

  double value = 0.0;
  RealEntry* next = nullptr;
  std::uint32_t ref = 0;
};

/// Pointer to a RealEntry with the sign kept in the lowest address bit.
/// Equality is identity: same entry and same sign.
class RealHandle {
 public:
  constexpr RealHandle() = default;

  static RealHandle make(RealEntry* entry, bool negative) noexcept {
    RealHandle h;
    h.bits_ = reinterpret_cast<std::uintptr_t>(entry) | (negative ? kSignBit : 0U);
    return h;
  }

  RealEntry* entry() const noexcept { return reinterpret_cast<RealEntry*>(bits_ & ~kSignBit); }
  bool negative() const noexcept { return (bits_ & kSignBit) != 0; }
  bool null() const noexcept { return bits_ == 0; }
  std::uintptr_t bits() const noexcept { return bits_; }

  double value() const noexcept {
    const double v = entry()->value;
    return negative() ? -v : v;
  }

  /// Sign flip. A handle to a zero value keeps the positive tag.
  RealHandle flipped() const noexcept {
    if (entry()->value == 0.0) {
      return *this;
    }
    RealHandle h;
    h.bits_ = bits_ ^ kSignBit;
    return h;
  }

  friend bool operator==(RealHandle, RealHandle) = default;

 private:
  static constexpr std::uintptr_t kSignBit = 1U;
  std::uintptr_t bits_ = 0;
};

static_assert(alignof(RealEntry) >= 2, "sign tag needs a free low bit");

/// Edge weight: a pair of sign-tagged handles. Either both parts live in the
/// lookup table or both live in the cache.
struct ComplexValue {
  RealHandle re;
  RealHandle im;

  std::complex<double> value() const noexcept { return {re.value(), im.value()}; }
  double mag2() const noexcept {
    const double a = re.value();
    const double b = im.value();
    return a * a + b * b;
  }

  friend bool operator==(const ComplexValue&, const ComplexValue&) = default;
};

enum class TagOp { Negate, Conjugate, MulI, MulNegI };

inline ComplexValue negate(ComplexValue v) noexcept { return {v.re.flipped(), v.im.flipped()}; }
inline ComplexValue conjugate(ComplexValue v) noexcept { return {v.re, v.im.flipped()}; }
// (a + bi) * i = -b + ai
inline ComplexValue mul_i(ComplexValue v) noexcept { return {v.im.flipped(), v.re}; }
// (a + bi) * -i = b - ai
inline ComplexValue mul_neg_i(ComplexValue v) noexcept { return {v.im, v.re.flipped()}; }

inline ComplexValue tag_op(TagOp op, ComplexValue v) noexcept {
  switch (op) {
    case TagOp::Negate: return negate(v);
    case TagOp::Conjugate: return conjugate(v);
    case TagOp::MulI: return mul_i(v);
    case TagOp::MulNegI: return mul_neg_i(v);
  }
  return v;
}

enum class TableMode {
  Bucketed,    // N equal-width buckets over [0, 1]
  LinearScan,  // one flat array scanned front to back (baseline)
};

struct RealTableStats {
  std::size_t live = 0;
  std::size_t peak = 0;
  std::size_t lookups = 0;
  std::size_t hits = 0;
  std::size_t inserts = 0;
  std::size_t neighbor_searches = 0;
  std::size_t comparisons = 0;
  std::size_t collected = 0;
};

/// Tolerance-aware interning table for reals in [0, 1].
///
/// Lookup scans the target bucket, then at most one neighbour when the
/// tolerance window crosses a bucket border, and returns the first entry
/// within epsilon. Values above 1 + epsilon are only admitted through
/// lookup_unbounded() and go to a separate overflow chain; they arise as
/// root weights of non-unitary results.
class RealTable {
 public:
  static constexpr std::size_t kBlockSize = 2048;

  RealTable(double epsilon, std::size_t bucket_count, TableMode mode = TableMode::Bucketed);

  RealTable(const RealTable&) = delete;
  RealTable& operator=(const RealTable&) = delete;
  RealTable(RealTable&&) noexcept = default;
  RealTable& operator=(RealTable&&) noexcept = default;

  RealHandle lookup(double r);
  RealHandle lookup_unbounded(double r);

  RealHandle zero() const noexcept { return RealHandle::make(zero_, false); }
  RealHandle one() const noexcept { return RealHandle::make(one_, false); }

  void inc_ref(RealEntry* e) noexcept;
  void dec_ref(RealEntry* e);

  std::size_t garbage_collect();

  double epsilon() const noexcept { return epsilon_; }
  std::size_t bucket_count() const noexcept { return buckets_.size(); }
  TableMode mode() const noexcept { return mode_; }
  const RealTableStats& stats() const noexcept { return stats_; }
  std::size_t bucket_index(double v) const noexcept;

  /// Visits every live entry with its bucket index (bucket_count() for the
  /// overflow chain, and for every entry in linear-scan mode).
  template <class Fn>
  void for_each_entry(Fn&& fn) const {
    if (mode_ == TableMode::LinearScan) {
      for (const RealEntry* e : linear_) {
        fn(*e, buckets_.size());
      }
      return;
    }
    for (std::size_t b = 0; b < buckets_.size(); ++b) {
      for (const RealEntry* e = buckets_[b]; e != nullptr; e = e->next) {
        fn(*e, b);
      }
    }
    for (const RealEntry* e = overflow_; e != nullptr; e = e->next) {
      fn(*e, buckets_.size());
    }
  }

 private:
  RealEntry* find_in_chain(RealEntry* head, double a) noexcept;
  RealEntry* find_linear(double a) noexcept;
  RealEntry* allocate(double a);
  void insert(RealEntry* e, std::size_t bucket);
  RealEntry* collect_chain(RealEntry* head, std::size_t& count);

  double epsilon_;
  TableMode mode_;
  std::vector<RealEntry*> buckets_;
  RealEntry* overflow_ = nullptr;
  std::vector<RealEntry*> linear_;
  RealEntry* free_ = nullptr;
  std::vector<std::unique_ptr<RealEntry[]>> blocks_;
  std::size_t block_used_ = kBlockSize;
  RealEntry* zero_ = nullptr;
  RealEntry* one_ = nullptr;
  RealTableStats stats_;
};

struct CacheStats {
  std::size_t capacity = 0;  // complex values
  std::size_t in_use = 0;
  std::size_t high_water = 0;
  std::size_t allocs = 0;
  std::size_t releases = 0;
};

/// Fixed pool of slots for intermediate complex values. Never grows;
/// running out is a ContractViolation.
class ComplexCache {
 public:
  explicit ComplexCache(std::size_t complex_capacity);

  ComplexCache(const ComplexCache&) = delete;
  ComplexCache& operator=(const ComplexCache&) = delete;
  ComplexCache(ComplexCache&&) noexcept = default;
  ComplexCache& operator=(ComplexCache&&) noexcept = default;

  ComplexValue get(double re, double im);
  ComplexValue get(std::complex<double> v) { return get(v.real(), v.imag()); }
  void release(ComplexValue v);

  bool owns(const RealEntry* e) const noexcept {
    return e >= pool_.get() && e < pool_.get() + slots_;
  }

  const CacheStats& stats() const noexcept { return stats_; }

 private:
  std::unique_ptr<RealEntry[]> pool_;
  std::size_t slots_;
  RealEntry* free_ = nullptr;
  CacheStats stats_;
};

/// Key for compute-table hashing: parts snapped to a grid of step 2*epsilon.
struct RoundedKey {
  std::int64_t re = 0;
  std::int64_t im = 0;

  friend bool operator==(const RoundedKey&, const RoundedKey&) = default;
};

/// Table + cache + arithmetic. Arithmetic always yields cache-resident
/// values; intern() is the only path from cache to table.
class ComplexNumbers {
 public:
  ComplexNumbers(double epsilon, std::size_t bucket_count, std::size_t cache_capacity,
                 TableMode mode = TableMode::Bucketed);

  ComplexValue zero() const noexcept { return {table_.zero(), table_.zero()}; }
  ComplexValue one() const noexcept { return {table_.one(), table_.zero()}; }

  RealHandle lookup_real(double r) { return table_.lookup(r); }
  ComplexValue lookup(double re, double im) { return {table_.lookup(re), table_.lookup(im)}; }
  ComplexValue lookup(std::complex<double> v) { return lookup(v.real(), v.imag()); }
  /// Like lookup(), but admits parts above 1 (root weights of non-unitary DDs).
  ComplexValue lookup_unbounded(std::complex<double> v) {
    return {table_.lookup_unbounded(v.real()), table_.lookup_unbounded(v.imag())};
  }

  bool is_cached(ComplexValue v) const noexcept { return cache_.owns(v.re.entry()); }
  bool is_zero(ComplexValue v) const noexcept { return v == zero(); }
  bool is_one(ComplexValue v) const noexcept { return v == one(); }
  /// Per-part |x| <= epsilon test on machine values.
  bool approx_zero(ComplexValue v) const noexcept;
  bool approx_zero(std::complex<double> v) const noexcept;

  ComplexValue add(ComplexValue a, ComplexValue b) { return cache_.get(a.value() + b.value()); }
  ComplexValue sub(ComplexValue a, ComplexValue b) { return cache_.get(a.value() - b.value()); }
  ComplexValue mul(ComplexValue a, ComplexValue b) { return cache_.get(a.value() * b.value()); }
  ComplexValue div(ComplexValue a, ComplexValue b);

  ComplexValue cache_value(std::complex<double> v) { return cache_.get(v); }
  ComplexValue cache_copy(ComplexValue v) { return cache_.get(v.value()); }
  void release(ComplexValue v) { cache_.release(v); }
  void release_if_cached(ComplexValue v) {
    if (is_cached(v)) {
      cache_.release(v);
    }
  }

  /// Looks up a cache-resident value in the table and returns its slots to the cache.
  ComplexValue intern(ComplexValue cached);
  /// intern() that also admits magnitudes above 1.
  ComplexValue intern_unbounded(ComplexValue cached);

  RoundedKey round_for_key(ComplexValue v) const noexcept { return round_for_key(v.value()); }
  RoundedKey round_for_key(std::complex<double> v) const noexcept;

  void inc_ref(ComplexValue v) noexcept;
  void dec_ref(ComplexValue v);

  std::size_t garbage_collect() { return table_.garbage_collect(); }

  double epsilon() const noexcept { return table_.epsilon(); }
  RealTable& table() noexcept { return table_; }
  const RealTable& table() const noexcept { return table_; }
  const ComplexCache& cache() const noexcept { return cache_; }

 private:
  RealTable table_;
  ComplexCache cache_;
};

}  // namespace qdd
