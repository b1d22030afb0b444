#include "qdd/complex.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qdd/errors.hpp"

namespace qdd {

namespace {

std::string describe(double r) {
  std::ostringstream os;
  os.precision(17);
  os << r;
  return os.str();
}

}  // namespace

RealTable::RealTable(double epsilon, std::size_t bucket_count, TableMode mode)
    : epsilon_(epsilon), mode_(mode), buckets_(bucket_count, nullptr) {
  if (!(epsilon > 0.0) || bucket_count == 0) {
    throw ContractViolation("real table needs epsilon > 0 and at least one bucket");
  }
  if (static_cast<double>(bucket_count) * 2.0 * epsilon >= 1.0) {
    throw ContractViolation("bucket width must exceed 2*epsilon (N * 2 * eps < 1)");
  }
  zero_ = allocate(0.0);
  one_ = allocate(1.0);
  zero_->ref = RealEntry::kImmortal;
  one_->ref = RealEntry::kImmortal;
  insert(zero_, 0);
  insert(one_, buckets_.size() - 1);
}

std::size_t RealTable::bucket_index(double v) const noexcept {
  const auto n = buckets_.size();
  const auto b = static_cast<std::size_t>(v * static_cast<double>(n));
  return std::min(b, n - 1);
}

RealEntry* RealTable::allocate(double a) {
  RealEntry* e = nullptr;
  if (free_ != nullptr) {
    e = free_;
    free_ = e->next;
  } else {
    if (block_used_ == kBlockSize) {
      blocks_.push_back(std::make_unique<RealEntry[]>(kBlockSize));
      block_used_ = 0;
    }
    e = &blocks_.back()[block_used_++];
  }
  e->value = a;
  e->next = nullptr;
  e->ref = 0;
  ++stats_.live;
  stats_.peak = std::max(stats_.peak, stats_.live);
  return e;
}

void RealTable::insert(RealEntry* e, std::size_t bucket) {
  if (mode_ == TableMode::LinearScan) {
    linear_.push_back(e);
    return;
  }
  if (bucket == buckets_.size()) {
    e->next = overflow_;
    overflow_ = e;
    return;
  }
  e->next = buckets_[bucket];
  buckets_[bucket] = e;
}

RealEntry* RealTable::find_in_chain(RealEntry* head, double a) noexcept {
  for (RealEntry* e = head; e != nullptr; e = e->next) {
    ++stats_.comparisons;
    if (std::abs(e->value - a) <= epsilon_) {
      return e;
    }
  }
  return nullptr;
}

RealEntry* RealTable::find_linear(double a) noexcept {
  for (RealEntry* e : linear_) {
    ++stats_.comparisons;
    if (std::abs(e->value - a) <= epsilon_) {
      return e;
    }
  }
  return nullptr;
}

RealHandle RealTable::lookup(double r) {
  const double a = std::abs(r);
  if (!(a <= 1.0 + epsilon_)) {
    throw ContractViolation("real value " + describe(r) + " outside [-1-eps, 1+eps]");
  }
  ++stats_.lookups;
  if (a <= epsilon_) {
    ++stats_.hits;
    return zero();
  }
  const bool negative = r < 0.0;
  if (std::abs(a - 1.0) <= epsilon_) {
    ++stats_.hits;
    return RealHandle::make(one_, negative);
  }

  if (mode_ == TableMode::LinearScan) {
    if (RealEntry* e = find_linear(a)) {
      ++stats_.hits;
      return RealHandle::make(e, negative);
    }
    RealEntry* e = allocate(a);
    insert(e, 0);
    ++stats_.inserts;
    return RealHandle::make(e, negative);
  }

  const std::size_t b = bucket_index(a);
  if (RealEntry* e = find_in_chain(buckets_[b], a)) {
    ++stats_.hits;
    return RealHandle::make(e, negative);
  }
  // Bucket width exceeds 2*eps, so at most one neighbour can hold a match.
  const double n = static_cast<double>(buckets_.size());
  const double lower = static_cast<double>(b) / n;
  const double upper = static_cast<double>(b + 1) / n;
  RealEntry* neighbor = nullptr;
  if (a - epsilon_ < lower && b > 0) {
    ++stats_.neighbor_searches;
    neighbor = find_in_chain(buckets_[b - 1], a);
  } else if (a + epsilon_ >= upper && b + 1 < buckets_.size()) {
    ++stats_.neighbor_searches;
    neighbor = find_in_chain(buckets_[b + 1], a);
  }
  if (neighbor != nullptr) {
    ++stats_.hits;
    return RealHandle::make(neighbor, negative);
  }

  RealEntry* e = allocate(a);
  insert(e, b);
  ++stats_.inserts;
  return RealHandle::make(e, negative);
}

RealHandle RealTable::lookup_unbounded(double r) {
  const double a = std::abs(r);
  if (!std::isfinite(r)) {
    throw ContractViolation("non-finite real value " + describe(r));
  }
  if (a <= 1.0 + epsilon_) {
    return lookup(r);
  }
  ++stats_.lookups;
  const bool negative = r < 0.0;
  RealEntry* found =
      mode_ == TableMode::LinearScan ? find_linear(a) : find_in_chain(overflow_, a);
  if (found != nullptr) {
    ++stats_.hits;
    return RealHandle::make(found, negative);
  }
  RealEntry* e = allocate(a);
  insert(e, buckets_.size());
  ++stats_.inserts;
  return RealHandle::make(e, negative);
}

void RealTable::inc_ref(RealEntry* e) noexcept {
  if (e->ref != RealEntry::kImmortal) {
    ++e->ref;
  }
}

void RealTable::dec_ref(RealEntry* e) {
  if (e->ref == RealEntry::kImmortal) {
    return;
  }
  if (e->ref == 0) {
    throw ContractViolation("real entry " + describe(e->value) + " reference count below zero");
  }
  --e->ref;
}

RealEntry* RealTable::collect_chain(RealEntry* head, std::size_t& count) {
  RealEntry* kept = nullptr;
  RealEntry** tail = &kept;
  while (head != nullptr) {
    RealEntry* next = head->next;
    if (head->ref == 0) {
      head->next = free_;
      free_ = head;
      ++count;
    } else {
      *tail = head;
      tail = &head->next;
    }
    head = next;
  }
  *tail = nullptr;
  return kept;
}

std::size_t RealTable::garbage_collect() {
  std::size_t count = 0;
  if (mode_ == TableMode::LinearScan) {
    auto dead = std::stable_partition(linear_.begin(), linear_.end(),
                                      [](const RealEntry* e) { return e->ref != 0; });
    for (auto it = dead; it != linear_.end(); ++it) {
      (*it)->next = free_;
      free_ = *it;
      ++count;
    }
    linear_.erase(dead, linear_.end());
  } else {
    for (auto& head : buckets_) {
      if (head != nullptr) {
        head = collect_chain(head, count);
      }
    }
    overflow_ = collect_chain(overflow_, count);
  }
  stats_.live -= count;
  stats_.collected += count;
  return count;
}

ComplexCache::ComplexCache(std::size_t complex_capacity)
    : pool_(std::make_unique<RealEntry[]>(2 * complex_capacity)), slots_(2 * complex_capacity) {
  for (std::size_t i = slots_; i-- > 0;) {
    pool_[i].next = free_;
    free_ = &pool_[i];
  }
  stats_.capacity = complex_capacity;
}

ComplexValue ComplexCache::get(double re, double im) {
  if (free_ == nullptr || free_->next == nullptr) {
    throw ContractViolation("complex cache exhausted (capacity " + std::to_string(stats_.capacity) +
                            ")");
  }
  RealEntry* r = free_;
  RealEntry* i = r->next;
  free_ = i->next;
  r->value = re;
  i->value = im;
  ++stats_.allocs;
  ++stats_.in_use;
  stats_.high_water = std::max(stats_.high_water, stats_.in_use);
  return {RealHandle::make(r, false), RealHandle::make(i, false)};
}

void ComplexCache::release(ComplexValue v) {
  RealEntry* r = v.re.entry();
  RealEntry* i = v.im.entry();
  if (!owns(r) || !owns(i)) {
    throw ContractViolation("released value is not cache-resident");
  }
  if (stats_.in_use == 0) {
    throw ContractViolation("complex cache released more values than allocated");
  }
  i->next = free_;
  r->next = i;
  free_ = r;
  ++stats_.releases;
  --stats_.in_use;
}

ComplexNumbers::ComplexNumbers(double epsilon, std::size_t bucket_count,
                               std::size_t cache_capacity, TableMode mode)
    : table_(epsilon, bucket_count, mode), cache_(cache_capacity) {}

bool ComplexNumbers::approx_zero(std::complex<double> v) const noexcept {
  const double eps = epsilon();
  return std::abs(v.real()) <= eps && std::abs(v.imag()) <= eps;
}

bool ComplexNumbers::approx_zero(ComplexValue v) const noexcept {
  return v == zero() || approx_zero(v.value());
}

ComplexValue ComplexNumbers::div(ComplexValue a, ComplexValue b) {
  const std::complex<double> d = b.value();
  if (std::abs(d) <= epsilon()) {
    throw ArithmeticError("division by near-zero complex value");
  }
  if (b == one()) {
    return cache_.get(a.value());
  }
  return cache_.get(a.value() / d);
}

ComplexValue ComplexNumbers::intern(ComplexValue cached) {
  const std::complex<double> v = cached.value();
  const ComplexValue result = lookup(v);
  cache_.release(cached);
  return result;
}

ComplexValue ComplexNumbers::intern_unbounded(ComplexValue cached) {
  const std::complex<double> v = cached.value();
  const ComplexValue result = lookup_unbounded(v);
  cache_.release(cached);
  return result;
}

RoundedKey ComplexNumbers::round_for_key(std::complex<double> v) const noexcept {
  const double step = 2.0 * epsilon();
  static constexpr double kLimit = 9.0e18;
  auto snap = [step](double x) {
    const double q = std::nearbyint(x / step);
    return static_cast<std::int64_t>(std::clamp(q, -kLimit, kLimit));
  };
  return {snap(v.real()), snap(v.imag())};
}

void ComplexNumbers::inc_ref(ComplexValue v) noexcept {
  if (is_cached(v)) {
    return;
  }
  table_.inc_ref(v.re.entry());
  table_.inc_ref(v.im.entry());
}

void ComplexNumbers::dec_ref(ComplexValue v) {
  if (is_cached(v)) {
    return;
  }
  table_.dec_ref(v.re.entry());
  table_.dec_ref(v.im.entry());
}

}  // namespace qdd
