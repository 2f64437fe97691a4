#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mfl/error.hpp"

namespace mfl {

// Elements are canonical indices in [0, order): the representative itself for
// Z/n and F_p, the coefficient vector packed base p (index = sum c_i p^i) for
// F_{p^k}. Index 0 is zero and index 1 is one in every ring, so equality and
// hashing are plain integer comparisons.
using RingElem = std::uint16_t;

enum class RingKind { PrimeField, ExtField, IntegersMod };

struct RingSpec {
  RingKind kind = RingKind::PrimeField;
  std::uint32_t p = 0;              // characteristic prime (field kinds)
  std::uint32_t k = 1;              // extension degree
  std::uint32_t n = 0;              // modulus for Z/n
  std::vector<std::uint32_t> poly;  // c0..c_{k-1} of x^k + c_{k-1}x^{k-1} + ... + c0
};

class Ring {
 public:
  static Ring make(const RingSpec& spec);
  static Ring fp(std::uint32_t p);
  static Ring fpk(std::uint32_t p, std::uint32_t k, std::vector<std::uint32_t> poly);
  static Ring zn(std::uint32_t n);

  // Descriptor grammar: Fp:<p> | Fpk:<p>,<k>,<c0,...,c_{k-1}> | Zn:<n>, plus the
  // compact forms F<q> (prime power; lexicographically least irreducible
  // polynomial chosen for q = p^k) and Z<n>. parse_prefix consumes a descriptor
  // embedded in a longer comma-separated string and reports how far it read.
  static Ring parse(const std::string& descriptor);
  static Ring parse_prefix(const std::string& text, std::size_t& pos);

  std::uint32_t order() const { return d_->order; }
  std::uint32_t characteristic() const { return d_->characteristic; }
  RingKind kind() const { return d_->spec.kind; }
  bool is_field() const { return d_->spec.kind != RingKind::IntegersMod; }
  const RingSpec& spec() const { return d_->spec; }
  std::string descriptor() const;

  RingElem zero() const { return 0; }
  RingElem one() const { return 1; }

  RingElem add(RingElem a, RingElem b) const {
    return d_->add_t.empty() ? slow_add(a, b) : d_->add_t[a * d_->order + b];
  }
  RingElem mul(RingElem a, RingElem b) const {
    return d_->mul_t.empty() ? slow_mul(a, b) : d_->mul_t[a * d_->order + b];
  }
  RingElem neg(RingElem a) const { return d_->neg_t.empty() ? slow_neg(a) : d_->neg_t[a]; }
  RingElem sub(RingElem a, RingElem b) const { return add(a, neg(b)); }

  bool is_unit(RingElem a) const;
  // Multiplicative inverse; throws NotInvertible on zero divisors and 0.
  RingElem inv(RingElem a) const;

  RingElem check(std::uint32_t raw) const {
    if (raw >= d_->order) fail(Err::ElementOutOfRing, "value " + std::to_string(raw));
    return static_cast<RingElem>(raw);
  }

  // Coefficients of a over F_p (length k); the canonical representative digit
  // expansion for the other kinds.
  std::vector<std::uint32_t> coeffs(RingElem a) const;
  std::string to_string(RingElem a) const { return std::to_string(a); }

  bool same(const Ring& other) const { return d_ == other.d_; }

  // True when the p*order multiplication/addition tables are materialized
  // (order <= 256); scan-heavy callers may key optimizations off this.
  bool tabulated() const { return !d_->mul_t.empty(); }

 private:
  struct Data {
    RingSpec spec;
    std::uint32_t order = 0;
    std::uint32_t characteristic = 0;
    std::vector<RingElem> add_t, mul_t, neg_t, inv_t;  // inv_t: 0xFFFF = not a unit
    std::vector<std::vector<std::uint32_t>> reduction;  // x^{k+i} reduced, ext fields
  };

  explicit Ring(std::shared_ptr<const Data> d) : d_(std::move(d)) {}
  RingElem slow_add(RingElem a, RingElem b) const;
  RingElem slow_mul(RingElem a, RingElem b) const;
  RingElem slow_neg(RingElem a) const;
  RingElem slow_inv(RingElem a) const;  // 0xFFFF when not a unit

  std::shared_ptr<const Data> d_;
};

}  // namespace mfl
