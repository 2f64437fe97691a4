#include "mfl/ring.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

namespace mfl {

const char* err_name(Err e) {
  switch (e) {
    case Err::NonPrimeCharacteristic: return "NonPrimeCharacteristic";
    case Err::ReduciblePolynomial: return "ReduciblePolynomial";
    case Err::UnsupportedSize: return "UnsupportedSize";
    case Err::ElementOutOfRing: return "ElementOutOfRing";
    case Err::NotInvertible: return "NotInvertible";
    case Err::RingMismatch: return "RingMismatch";
    case Err::SingularMatrix: return "SingularMatrix";
    case Err::TooLarge: return "TooLarge";
    case Err::NotLatinSquare: return "NotLatinSquare";
    case Err::NoIdentity: return "NoIdentity";
    case Err::IndexOutOfRange: return "IndexOutOfRange";
    case Err::MissingSecondArgument: return "MissingSecondArgument";
    case Err::MissingThirdArgument: return "MissingThirdArgument";
    case Err::NotMoufang: return "NotMoufang";
    case Err::NotASubloop: return "NotASubloop";
    case Err::NotNormal: return "NotNormal";
    case Err::IllDefined: return "IllDefined";
    case Err::NotPseudoautomorphism: return "NotPseudoautomorphism";
    case Err::Timeout: return "Timeout";
    case Err::AutomorphismOrderViolation: return "AutomorphismOrderViolation";
    case Err::NotMoufangElement: return "NotMoufangElement";
    case Err::BaseNotAssociative: return "BaseNotAssociative";
    case Err::TrialityFails: return "TrialityFails";
    case Err::OperatorDomainMismatch: return "OperatorDomainMismatch";
    case Err::TooLargeToMaterialize: return "TooLargeToMaterialize";
    case Err::NotAGroup: return "NotAGroup";
    case Err::InvarianceNotEstablished: return "InvarianceNotEstablished";
    case Err::OutOfCatalog: return "OutOfCatalog";
    case Err::KernelNotAbelian: return "KernelNotAbelian";
    case Err::KernelNotNormal: return "KernelNotNormal";
    case Err::KernelNotClosed: return "KernelNotClosed";
    case Err::TooLargeToDecide: return "TooLargeToDecide";
    case Err::BadDescriptor: return "BadDescriptor";
    case Err::BadFile: return "BadFile";
  }
  return "UnknownError";
}

namespace {

constexpr std::uint32_t kMaxOrder = 1u << 16;
constexpr std::uint32_t kMaxDegree = 4;
constexpr std::uint32_t kTableCap = 256;  // orders up to this get full op tables

bool is_prime(std::uint32_t p) {
  if (p < 2) return false;
  for (std::uint32_t d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

using Poly = std::vector<std::uint32_t>;  // coefficients, low degree first

int degree(const Poly& f) {
  for (int i = static_cast<int>(f.size()) - 1; i >= 0; --i)
    if (f[i] != 0) return i;
  return -1;
}

// Remainder of f by monic g over F_p.
Poly poly_mod(Poly f, const Poly& g, std::uint32_t p) {
  int dg = degree(g);
  for (int i = degree(f); i >= dg; --i) {
    std::uint32_t c = f[i];
    if (c == 0) continue;
    for (int j = 0; j <= dg; ++j) {
      std::uint32_t t = f[i - dg + j] + p - (c * g[j]) % p;
      f[i - dg + j] = t % p;
    }
  }
  f.resize(std::max(dg, 1));
  return f;
}

// Exhaustive trial division by all monic polynomials of degree 1..k/2.
bool is_irreducible(const Poly& f, std::uint32_t p) {
  int k = degree(f);
  for (int d = 1; 2 * d <= k; ++d) {
    std::uint64_t count = 1;
    for (int i = 0; i < d; ++i) count *= p;
    for (std::uint64_t packed = 0; packed < count; ++packed) {
      Poly g(d + 1, 0);
      std::uint64_t rest = packed;
      for (int i = 0; i < d; ++i) {
        g[i] = rest % p;
        rest /= p;
      }
      g[d] = 1;
      if (degree(poly_mod(f, g, p)) < 0) return false;
    }
  }
  return true;
}

std::uint32_t pow_u32(std::uint32_t b, std::uint32_t e) {
  std::uint64_t r = 1;
  while (e--) {
    r *= b;
    if (r > kMaxOrder) fail(Err::UnsupportedSize, "ring order exceeds 2^16");
  }
  return static_cast<std::uint32_t>(r);
}

std::uint32_t parse_u32(const std::string& s, std::size_t& pos) {
  std::uint32_t value = 0;
  const char* begin = s.data() + pos;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr == begin) fail(Err::BadDescriptor, "expected integer in '" + s + "'");
  pos += static_cast<std::size_t>(ptr - begin);
  return value;
}

void expect_char(const std::string& s, std::size_t& pos, char c) {
  if (pos >= s.size() || s[pos] != c)
    fail(Err::BadDescriptor, std::string("expected '") + c + "' in '" + s + "'");
  ++pos;
}

}  // namespace

Ring Ring::make(const RingSpec& spec) {
  auto d = std::make_shared<Data>();
  d->spec = spec;
  switch (spec.kind) {
    case RingKind::PrimeField: {
      if (!is_prime(spec.p)) fail(Err::NonPrimeCharacteristic, std::to_string(spec.p));
      if (spec.p > kMaxOrder) fail(Err::UnsupportedSize, "p too large");
      d->order = spec.p;
      d->characteristic = spec.p;
      d->spec.k = 1;
      break;
    }
    case RingKind::ExtField: {
      if (!is_prime(spec.p)) fail(Err::NonPrimeCharacteristic, std::to_string(spec.p));
      if (spec.k < 2 || spec.k > kMaxDegree)
        fail(Err::UnsupportedSize, "extension degree must be 2..4");
      if (spec.poly.size() != spec.k) fail(Err::BadDescriptor, "polynomial needs k coefficients");
      d->order = pow_u32(spec.p, spec.k);
      d->characteristic = spec.p;
      Poly f(spec.poly.begin(), spec.poly.end());
      for (auto& c : f) c %= spec.p;
      f.push_back(1);  // monic leading term
      d->spec.poly.assign(f.begin(), f.end() - 1);
      if (!is_irreducible(f, spec.p)) fail(Err::ReduciblePolynomial, "polynomial factors over F_p");
      // Reduction rows: x^{k+i} mod f for i = 0..k-2, as coefficient vectors.
      d->reduction.resize(spec.k - 1);
      for (std::uint32_t i = 0; i + 1 < spec.k; ++i) {
        Poly xn(spec.k + i + 1, 0);
        xn[spec.k + i] = 1;
        Poly r = poly_mod(xn, f, spec.p);
        r.resize(spec.k, 0);
        d->reduction[i] = r;
      }
      break;
    }
    case RingKind::IntegersMod: {
      if (spec.n < 2) fail(Err::UnsupportedSize, "modulus must be >= 2");
      if (spec.n > kMaxOrder) fail(Err::UnsupportedSize, "modulus exceeds 2^16");
      d->order = spec.n;
      d->characteristic = spec.n;
      break;
    }
  }
  if (d->order > kMaxOrder) fail(Err::UnsupportedSize, "order exceeds 2^16");

  Ring r(d);
  if (d->order <= kTableCap) {
    auto mutable_d = std::const_pointer_cast<Data>(r.d_);
    std::uint32_t n = d->order;
    mutable_d->add_t.resize(n * n);
    mutable_d->mul_t.resize(n * n);
    mutable_d->neg_t.resize(n);
    mutable_d->inv_t.resize(n);
    for (std::uint32_t a = 0; a < n; ++a) {
      mutable_d->neg_t[a] = r.slow_neg(static_cast<RingElem>(a));
      mutable_d->inv_t[a] = r.slow_inv(static_cast<RingElem>(a));
      for (std::uint32_t b = 0; b < n; ++b) {
        mutable_d->add_t[a * n + b] = r.slow_add(static_cast<RingElem>(a), static_cast<RingElem>(b));
        mutable_d->mul_t[a * n + b] = r.slow_mul(static_cast<RingElem>(a), static_cast<RingElem>(b));
      }
    }
  }
  return r;
}

Ring Ring::fp(std::uint32_t p) {
  RingSpec s;
  s.kind = RingKind::PrimeField;
  s.p = p;
  return make(s);
}

Ring Ring::fpk(std::uint32_t p, std::uint32_t k, std::vector<std::uint32_t> poly) {
  RingSpec s;
  s.kind = RingKind::ExtField;
  s.p = p;
  s.k = k;
  s.poly = std::move(poly);
  return make(s);
}

Ring Ring::zn(std::uint32_t n) {
  RingSpec s;
  s.kind = RingKind::IntegersMod;
  s.n = n;
  return make(s);
}

RingElem Ring::slow_add(RingElem a, RingElem b) const {
  const auto& s = d_->spec;
  switch (s.kind) {
    case RingKind::PrimeField:
      return static_cast<RingElem>((a + b) % s.p);
    case RingKind::IntegersMod:
      return static_cast<RingElem>((a + b) % s.n);
    case RingKind::ExtField: {
      std::uint32_t out = 0, scale = 1, x = a, y = b;
      for (std::uint32_t i = 0; i < s.k; ++i) {
        out += ((x % s.p + y % s.p) % s.p) * scale;
        x /= s.p;
        y /= s.p;
        scale *= s.p;
      }
      return static_cast<RingElem>(out);
    }
  }
  return 0;
}

RingElem Ring::slow_neg(RingElem a) const {
  const auto& s = d_->spec;
  switch (s.kind) {
    case RingKind::PrimeField:
      return static_cast<RingElem>((s.p - a) % s.p);
    case RingKind::IntegersMod:
      return static_cast<RingElem>((s.n - a) % s.n);
    case RingKind::ExtField: {
      std::uint32_t out = 0, scale = 1, x = a;
      for (std::uint32_t i = 0; i < s.k; ++i) {
        out += ((s.p - x % s.p) % s.p) * scale;
        x /= s.p;
        scale *= s.p;
      }
      return static_cast<RingElem>(out);
    }
  }
  return 0;
}

RingElem Ring::slow_mul(RingElem a, RingElem b) const {
  const auto& s = d_->spec;
  switch (s.kind) {
    case RingKind::PrimeField:
      return static_cast<RingElem>((static_cast<std::uint64_t>(a) * b) % s.p);
    case RingKind::IntegersMod:
      return static_cast<RingElem>((static_cast<std::uint64_t>(a) * b) % s.n);
    case RingKind::ExtField: {
      std::uint32_t k = s.k;
      std::uint32_t da[4] = {0, 0, 0, 0}, db[4] = {0, 0, 0, 0};
      std::uint32_t x = a, y = b;
      for (std::uint32_t i = 0; i < k; ++i) {
        da[i] = x % s.p;
        db[i] = y % s.p;
        x /= s.p;
        y /= s.p;
      }
      std::uint32_t prod[7] = {0, 0, 0, 0, 0, 0, 0};
      for (std::uint32_t i = 0; i < k; ++i)
        for (std::uint32_t j = 0; j < k; ++j) prod[i + j] = (prod[i + j] + da[i] * db[j]) % s.p;
      // Fold degrees k..2k-2 through the precomputed reductions of x^{k+i}.
      for (std::uint32_t i = 0; i + 1 < k; ++i) {
        std::uint32_t c = prod[k + i];
        if (c == 0) continue;
        for (std::uint32_t j = 0; j < k; ++j)
          prod[j] = (prod[j] + c * d_->reduction[i][j]) % s.p;
      }
      std::uint32_t out = 0, scale = 1;
      for (std::uint32_t i = 0; i < k; ++i) {
        out += prod[i] * scale;
        scale *= s.p;
      }
      return static_cast<RingElem>(out);
    }
  }
  return 0;
}

RingElem Ring::slow_inv(RingElem a) const {
  const auto& s = d_->spec;
  if (a == 0) return 0xFFFF;
  if (s.kind == RingKind::IntegersMod) {
    // Extended Euclid on (a, n).
    std::int64_t r0 = s.n, r1 = a, t0 = 0, t1 = 1;
    while (r1 != 0) {
      std::int64_t q = r0 / r1;
      std::int64_t r2 = r0 - q * r1, t2 = t0 - q * t1;
      r0 = r1;
      r1 = r2;
      t0 = t1;
      t1 = t2;
    }
    if (r0 != 1) return 0xFFFF;
    return static_cast<RingElem>(((t0 % s.n) + s.n) % s.n);
  }
  // Field: a^(order-2) by square and multiply.
  std::uint32_t e = d_->order - 2;
  RingElem result = 1, base = a;
  while (e) {
    if (e & 1) result = slow_mul(result, base);
    base = slow_mul(base, base);
    e >>= 1;
  }
  return result;
}

bool Ring::is_unit(RingElem a) const {
  if (!d_->inv_t.empty()) return d_->inv_t[a] != 0xFFFF;
  return slow_inv(a) != 0xFFFF;
}

RingElem Ring::inv(RingElem a) const {
  RingElem r = d_->inv_t.empty() ? slow_inv(a) : d_->inv_t[a];
  if (r == 0xFFFF) fail(Err::NotInvertible, "element " + std::to_string(a));
  return r;
}

std::vector<std::uint32_t> Ring::coeffs(RingElem a) const {
  const auto& s = d_->spec;
  if (s.kind != RingKind::ExtField) return {a};
  std::vector<std::uint32_t> c(s.k);
  std::uint32_t x = a;
  for (std::uint32_t i = 0; i < s.k; ++i) {
    c[i] = x % s.p;
    x /= s.p;
  }
  return c;
}

std::string Ring::descriptor() const {
  const auto& s = d_->spec;
  switch (s.kind) {
    case RingKind::PrimeField:
      return "Fp:" + std::to_string(s.p);
    case RingKind::IntegersMod:
      return "Zn:" + std::to_string(s.n);
    case RingKind::ExtField: {
      std::string out = "Fpk:" + std::to_string(s.p) + "," + std::to_string(s.k);
      for (auto c : s.poly) out += "," + std::to_string(c);
      return out;
    }
  }
  return {};
}

Ring Ring::parse_prefix(const std::string& text, std::size_t& pos) {
  auto starts = [&](const char* prefix) {
    return text.compare(pos, std::string::traits_type::length(prefix), prefix) == 0;
  };
  if (starts("Fpk:")) {
    pos += 4;
    std::uint32_t p = parse_u32(text, pos);
    expect_char(text, pos, ',');
    std::uint32_t k = parse_u32(text, pos);
    std::vector<std::uint32_t> poly;
    for (std::uint32_t i = 0; i < k; ++i) {
      expect_char(text, pos, ',');
      poly.push_back(parse_u32(text, pos));
    }
    return fpk(p, k, std::move(poly));
  }
  if (starts("Fp:")) {
    pos += 3;
    return fp(parse_u32(text, pos));
  }
  if (starts("Zn:")) {
    pos += 3;
    return zn(parse_u32(text, pos));
  }
  if (pos < text.size() && (text[pos] == 'F' || text[pos] == 'Z')) {
    char kind = text[pos++];
    std::uint32_t q = parse_u32(text, pos);
    if (kind == 'Z') return zn(q);
    if (is_prime(q)) return fp(q);
    // Prime power: factor, then pick the lexicographically least irreducible
    // monic polynomial (by coefficient tuple c0..c_{k-1}).
    std::uint32_t p = 0;
    for (std::uint32_t d = 2; d * d <= q; ++d)
      if (q % d == 0) {
        p = d;
        break;
      }
    if (p == 0 || !is_prime(p)) fail(Err::BadDescriptor, "F" + std::to_string(q) + " is not a prime power");
    std::uint32_t k = 0, m = q;
    while (m > 1) {
      if (m % p != 0) fail(Err::BadDescriptor, "F" + std::to_string(q) + " is not a prime power");
      m /= p;
      ++k;
    }
    std::uint64_t count = 1;
    for (std::uint32_t i = 0; i < k; ++i) count *= p;
    for (std::uint64_t packed = 0; packed < count; ++packed) {
      Poly f(k + 1, 0);
      std::uint64_t rest = packed;
      for (std::uint32_t i = 0; i < k; ++i) {
        f[i] = rest % p;
        rest /= p;
      }
      f[k] = 1;
      if (is_irreducible(f, p)) return fpk(p, k, Poly(f.begin(), f.end() - 1));
    }
    fail(Err::BadDescriptor, "no irreducible polynomial found");
  }
  fail(Err::BadDescriptor, "unrecognized ring descriptor in '" + text + "'");
}

Ring Ring::parse(const std::string& descriptor) {
  std::size_t pos = 0;
  Ring r = parse_prefix(descriptor, pos);
  if (pos != descriptor.size()) fail(Err::BadDescriptor, "trailing input in '" + descriptor + "'");
  return r;
}

}  // namespace mfl
