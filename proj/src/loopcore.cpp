#include "mfl/loopcore.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace mfl {

namespace {

constexpr Elt kMaxOrder = 65536;

std::uint16_t narrow(Elt x) { return static_cast<std::uint16_t>(x); }

}  // namespace

Elt apply_Txy(const Loop& l, Elt x, Elt s) { return l.mul(l.ldiv(x, s), x); }

Elt apply_Lxy(const Loop& l, Elt x, Elt y, Elt s) {
  return l.ldiv(l.mul(y, x), l.mul(y, l.mul(x, s)));
}

Elt apply_Rxy(const Loop& l, Elt x, Elt y, Elt s) {
  return l.rdiv(l.mul(l.mul(s, x), y), l.mul(x, y));
}

Elt associator(const Loop& l, Elt x, Elt y, Elt z) {
  Elt a = l.mul(x, l.mul(y, z));
  Elt b = l.mul(l.mul(x, y), z);
  return l.mul(l.inv(a), b);
}

Elt commutator(const Loop& l, Elt x, Elt y) {
  return l.mul(l.mul(l.mul(l.inv(x), l.inv(y)), x), y);
}

Elt loop_pow(const Loop& l, Elt x, std::int64_t e) {
  if (e == 0) return 0;
  bool neg = e < 0;
  std::uint64_t k = neg ? static_cast<std::uint64_t>(-(e + 1)) + 1 : static_cast<std::uint64_t>(e);
  Elt r = x;
  for (std::uint64_t i = 1; i < k; ++i) r = l.mul(r, x);
  return neg ? l.inv(r) : r;
}

Elt loop_order(const Loop& l, Elt x) {
  Elt p = x, k = 1;
  while (p != 0) {
    p = l.mul(p, x);
    ++k;
  }
  return k;
}

Perm Perm::identity(Elt n) {
  Perm p;
  p.im.resize(static_cast<std::size_t>(n));
  for (Elt i = 0; i < n; ++i) p.im[static_cast<std::size_t>(i)] = i;
  return p;
}

Perm perm_compose(const Perm& p, const Perm& q) {
  if (p.size() != q.size()) fail(Err::IndexOutOfRange, "composing permutations of different degree");
  Perm r;
  r.im.resize(p.im.size());
  for (std::size_t i = 0; i < p.im.size(); ++i)
    r.im[i] = q.im[static_cast<std::size_t>(p.im[i])];
  return r;
}

Perm perm_inverse(const Perm& p) {
  Perm r;
  r.im.resize(p.im.size());
  for (std::size_t i = 0; i < p.im.size(); ++i)
    r.im[static_cast<std::size_t>(p.im[i])] = static_cast<Elt>(i);
  return r;
}

bool perm_is_bijection(const Perm& p) {
  std::vector<char> seen(p.im.size(), 0);
  for (Elt v : p.im) {
    if (v < 0 || v >= p.size() || seen[static_cast<std::size_t>(v)]) return false;
    seen[static_cast<std::size_t>(v)] = 1;
  }
  return true;
}

void LoopTable::set_names(std::vector<std::string> names) {
  if (!names.empty() && static_cast<Elt>(names.size()) != n_)
    fail(Err::BadDescriptor, "expected " + std::to_string(n_) + " names, got " +
                                 std::to_string(names.size()));
  names_ = std::move(names);
}

bool LoopTable::is_associative() const {
  for (Elt x = 0; x < n_; ++x)
    for (Elt y = 0; y < n_; ++y)
      for (Elt z = 0; z < n_; ++z)
        if (mul(mul(x, y), z) != mul(x, mul(y, z))) return false;
  return true;
}

bool LoopTable::is_commutative() const {
  for (Elt x = 0; x < n_; ++x)
    for (Elt y = x + 1; y < n_; ++y)
      if (mul(x, y) != mul(y, x)) return false;
  return true;
}

LoopTable build_table(Elt n, const std::function<Elt(Elt, Elt)>& mul,
                      std::vector<std::string> names) {
  if (n <= 0) fail(Err::UnsupportedSize, "loop order must be positive");
  if (n > kMaxOrder) fail(Err::TooLarge, "loop order " + std::to_string(n) + " exceeds 65536");
  std::size_t un = static_cast<std::size_t>(n);
  std::vector<std::uint16_t> raw(un * un);
  for (Elt x = 0; x < n; ++x)
    for (Elt y = 0; y < n; ++y) {
      Elt v = mul(x, y);
      if (v < 0 || v >= n)
        fail(Err::IndexOutOfRange, "product map returned " + std::to_string(v));
      raw[static_cast<std::size_t>(x) * un + static_cast<std::size_t>(y)] = narrow(v);
    }

  Elt id = -1;
  for (Elt e = 0; e < n; ++e) {
    bool ok = true;
    for (Elt x = 0; x < n && ok; ++x)
      ok = raw[static_cast<std::size_t>(e) * un + static_cast<std::size_t>(x)] == x &&
           raw[static_cast<std::size_t>(x) * un + static_cast<std::size_t>(e)] == x;
    if (ok) {
      id = e;
      break;
    }
  }
  if (id < 0) fail(Err::NoIdentity, "no two-sided identity element");

  if (id != 0) {
    // Relabel by the transposition 0 <-> id.
    auto rel = [&](Elt v) { return v == 0 ? id : (v == id ? Elt{0} : v); };
    std::vector<std::uint16_t> moved(un * un);
    for (Elt x = 0; x < n; ++x)
      for (Elt y = 0; y < n; ++y)
        moved[static_cast<std::size_t>(x) * un + static_cast<std::size_t>(y)] = narrow(
            rel(raw[static_cast<std::size_t>(rel(x)) * un + static_cast<std::size_t>(rel(y))]));
    raw.swap(moved);
    if (!names.empty() && static_cast<Elt>(names.size()) == n)
      std::swap(names[0], names[static_cast<std::size_t>(id)]);
  }

  LoopTable t;
  t.n_ = n;
  t.t_ = std::move(raw);
  t.ld_.assign(un * un, 0);
  t.rd_.assign(un * un, 0);
  std::vector<char> seen(un);
  for (Elt x = 0; x < n; ++x) {
    std::fill(seen.begin(), seen.end(), 0);
    for (Elt y = 0; y < n; ++y) {
      Elt v = t.t_[static_cast<std::size_t>(x) * un + static_cast<std::size_t>(y)];
      if (seen[static_cast<std::size_t>(v)])
        fail(Err::NotLatinSquare, "row " + std::to_string(x) + " repeats value " + std::to_string(v));
      seen[static_cast<std::size_t>(v)] = 1;
      t.ld_[static_cast<std::size_t>(x) * un + static_cast<std::size_t>(v)] = narrow(y);
    }
  }
  for (Elt y = 0; y < n; ++y) {
    std::fill(seen.begin(), seen.end(), 0);
    for (Elt x = 0; x < n; ++x) {
      Elt v = t.t_[static_cast<std::size_t>(x) * un + static_cast<std::size_t>(y)];
      if (seen[static_cast<std::size_t>(v)])
        fail(Err::NotLatinSquare,
             "column " + std::to_string(y) + " repeats value " + std::to_string(v));
      seen[static_cast<std::size_t>(v)] = 1;
      t.rd_[static_cast<std::size_t>(y) * un + static_cast<std::size_t>(v)] = narrow(x);
    }
  }
  t.inv_.resize(un);
  for (Elt x = 0; x < n; ++x) t.inv_[static_cast<std::size_t>(x)] = t.ld_[static_cast<std::size_t>(x) * un];
  t.set_names(std::move(names));
  return t;
}

Elt loop_eval(const LoopTable& t, EvalOp op, Elt x, Elt y) {
  switch (op) {
    case EvalOp::Mul: return t.mul(x, y);
    case EvalOp::Ldiv: return t.ldiv(x, y);
    case EvalOp::Rdiv: return t.rdiv(x, y);
    case EvalOp::Inv: return t.inv(x);
  }
  fail(Err::IndexOutOfRange, "bad eval op");
}

Perm translation(const LoopTable& t, TransKind kind, Elt x, std::optional<Elt> y) {
  bool needs_y = kind == TransKind::Lxy || kind == TransKind::Rxy || kind == TransKind::Dxy;
  if (needs_y && !y)
    fail(Err::MissingSecondArgument, "this translation kind needs a second element");
  Elt n = t.size();
  Perm p;
  p.im.resize(static_cast<std::size_t>(n));
  for (Elt s = 0; s < n; ++s) {
    Elt v = 0;
    switch (kind) {
      case TransKind::L: v = t.mul(x, s); break;
      case TransKind::R: v = t.mul(s, x); break;
      case TransKind::P: v = t.rdiv(t.ldiv(x, s), x); break;
      case TransKind::T: v = apply_Txy(t, x, s); break;
      case TransKind::Lxy: v = apply_Lxy(t, x, *y, s); break;
      case TransKind::Rxy: v = apply_Rxy(t, x, *y, s); break;
      case TransKind::Dxy:
        v = t.mul(t.inv(x), t.mul(t.mul(t.mul(x, t.inv(*y)), s), *y));
        break;
    }
    p.im[static_cast<std::size_t>(s)] = v;
  }
  return p;
}

Elt assoc_comm(const LoopTable& t, AcKind kind, Elt x, Elt y, std::optional<Elt> z) {
  if (kind == AcKind::Commutator) return commutator(t, x, y);
  if (!z) fail(Err::MissingThirdArgument, "associator needs three elements");
  return associator(t, x, y, *z);
}

std::vector<Perm> inner_mappings(const LoopTable& t) {
  MoufangVerdict mv = is_moufang(t);
  if (!mv.pass) fail(Err::NotMoufang, "inner-mapping generator set assumes a Moufang table");
  Elt n = t.size();
  std::set<std::vector<Elt>> seen;
  std::vector<Perm> out;
  auto push = [&](Perm p) {
    if (seen.insert(p.im).second) out.push_back(std::move(p));
  };
  for (Elt x = 0; x < n; ++x) {
    push(translation(t, TransKind::T, x));
    for (Elt y = 0; y < n; ++y) {
      push(translation(t, TransKind::Lxy, x, y));
      push(translation(t, TransKind::Rxy, x, y));
    }
  }
  return out;
}

MoufangVerdict is_moufang(const Loop& l, std::uint64_t budget, std::uint64_t seed, Elt threshold) {
  Elt n = l.size();
  MoufangVerdict v;
  auto check = [&](Elt x, Elt y, Elt z) {
    // xy.zx = (x.yz)x
    return l.mul(l.mul(x, y), l.mul(z, x)) == l.mul(l.mul(x, l.mul(y, z)), x);
  };
  if (n <= threshold) {
    v.exhaustive = true;
    for (Elt x = 0; x < n; ++x)
      for (Elt y = 0; y < n; ++y)
        for (Elt z = 0; z < n; ++z) {
          ++v.checked;
          if (!check(x, y, z)) {
            v.pass = false;
            v.witness = {x, y, z};
            return v;
          }
        }
    return v;
  }
  Rng rng(seed);
  std::uint64_t un = static_cast<std::uint64_t>(n);
  for (std::uint64_t i = 0; i < budget; ++i) {
    Elt x = static_cast<Elt>(rng.below(un));
    Elt y = static_cast<Elt>(rng.below(un));
    Elt z = static_cast<Elt>(rng.below(un));
    ++v.checked;
    if (!check(x, y, z)) {
      v.pass = false;
      v.witness = {x, y, z};
      return v;
    }
  }
  return v;
}

std::vector<Elt> subloop_generate(const Loop& l, const std::vector<Elt>& gens) {
  Elt n = l.size();
  std::vector<char> in(static_cast<std::size_t>(n), 0);
  std::vector<Elt> members;
  auto add = [&](Elt x) {
    if (x < 0 || x >= n) fail(Err::IndexOutOfRange, "generator " + std::to_string(x));
    if (!in[static_cast<std::size_t>(x)]) {
      in[static_cast<std::size_t>(x)] = 1;
      members.push_back(x);
    }
  };
  add(0);
  for (Elt g : gens) add(g);
  // In a finite loop a multiplicatively closed subset containing the identity
  // is closed under both divisions as well, so product closure suffices.
  for (std::size_t i = 0; i < members.size(); ++i) {
    Elt u = members[i];
    for (std::size_t j = 0; j <= i; ++j) {
      Elt w = members[j];
      add(l.mul(u, w));
      add(l.mul(w, u));
    }
  }
  std::sort(members.begin(), members.end());
  return members;
}

bool is_subloop(const Loop& l, const std::vector<Elt>& s) {
  Elt n = l.size();
  std::vector<char> in(static_cast<std::size_t>(n), 0);
  for (Elt x : s) {
    if (x < 0 || x >= n) return false;
    in[static_cast<std::size_t>(x)] = 1;
  }
  if (!in[0]) return false;
  for (Elt x : s)
    for (Elt y : s)
      if (!in[static_cast<std::size_t>(l.mul(x, y))]) return false;
  return true;
}

bool is_normal(const LoopTable& t, const std::vector<Elt>& s) {
  if (!is_subloop(t, s)) fail(Err::NotASubloop, "normality is only defined for subloops");
  Elt n = t.size();
  std::vector<char> in(static_cast<std::size_t>(n), 0);
  for (Elt x : s) in[static_cast<std::size_t>(x)] = 1;
  auto inside = [&](Elt v) { return in[static_cast<std::size_t>(v)] != 0; };
  for (Elt x = 0; x < n; ++x) {
    for (Elt m : s)
      if (!inside(apply_Txy(t, x, m))) return false;
    for (Elt y = 0; y < n; ++y)
      for (Elt m : s)
        if (!inside(apply_Lxy(t, x, y, m)) || !inside(apply_Rxy(t, x, y, m))) return false;
  }
  return true;
}

LoopTable quotient(const LoopTable& t, const std::vector<Elt>& s) {
  if (!is_normal(t, s)) fail(Err::NotNormal, "quotient needs a normal subloop");
  Elt n = t.size();
  // Left cosets x*s; since s is normal these partition the loop.
  std::vector<Elt> rep(static_cast<std::size_t>(n), -1);
  std::vector<Elt> reps;
  for (Elt x = 0; x < n; ++x) {
    if (rep[static_cast<std::size_t>(x)] >= 0) continue;
    std::vector<Elt> coset;
    coset.reserve(s.size());
    for (Elt m : s) coset.push_back(t.mul(x, m));
    Elt least = *std::min_element(coset.begin(), coset.end());
    for (Elt c : coset) {
      if (rep[static_cast<std::size_t>(c)] >= 0 && rep[static_cast<std::size_t>(c)] != least)
        fail(Err::IllDefined, "cosets do not partition the loop");
      rep[static_cast<std::size_t>(c)] = least;
    }
    reps.push_back(least);
  }
  for (Elt x = 0; x < n; ++x)
    if (rep[static_cast<std::size_t>(x)] < 0) fail(Err::IllDefined, "element in no coset");
  std::sort(reps.begin(), reps.end());
  std::vector<Elt> index_of(static_cast<std::size_t>(n), -1);
  for (std::size_t i = 0; i < reps.size(); ++i)
    index_of[static_cast<std::size_t>(reps[i])] = static_cast<Elt>(i);

  Elt q = static_cast<Elt>(reps.size());
  std::vector<Elt> qt(static_cast<std::size_t>(q) * static_cast<std::size_t>(q), -1);
  // Well-definedness check over all element pairs, not just representatives.
  for (Elt x = 0; x < n; ++x)
    for (Elt y = 0; y < n; ++y) {
      Elt cx = index_of[static_cast<std::size_t>(rep[static_cast<std::size_t>(x)])];
      Elt cy = index_of[static_cast<std::size_t>(rep[static_cast<std::size_t>(y)])];
      Elt cp = rep[static_cast<std::size_t>(t.mul(x, y))];
      Elt& slot = qt[static_cast<std::size_t>(cx) * static_cast<std::size_t>(q) +
                     static_cast<std::size_t>(cy)];
      if (slot < 0)
        slot = cp;
      else if (slot != cp)
        fail(Err::IllDefined, "coset product depends on representatives");
    }
  return build_table(q, [&](Elt a, Elt b) {
    Elt v = qt[static_cast<std::size_t>(a) * static_cast<std::size_t>(q) +
               static_cast<std::size_t>(b)];
    return index_of[static_cast<std::size_t>(v)];
  });
}

bool is_pseudoautomorphism(const LoopTable& t, const PsAutPair& p) {
  Elt n = t.size();
  if (p.A.size() != n || !perm_is_bijection(p.A)) return false;
  if (p.a < 0 || p.a >= n) return false;
  for (Elt x = 0; x < n; ++x)
    for (Elt y = 0; y < n; ++y)
      if (t.mul(p.A(x), t.mul(p.A(y), p.a)) != t.mul(p.A(t.mul(x, y)), p.a)) return false;
  return true;
}

PsAutPair psaut_compose(const PsAutPair& p, const PsAutPair& q, const LoopTable& t) {
  PsAutPair r;
  r.A = perm_compose(p.A, q.A);
  r.a = t.mul(q.A(p.a), q.a);
  if (!is_pseudoautomorphism(t, r))
    fail(Err::NotPseudoautomorphism, "composition law produced an invalid pair");
  return r;
}

namespace {

std::string triple_tag(Elt x, Elt y, Elt m) {
  return " at x=" + std::to_string(x) + " y=" + std::to_string(y) + " m=" + std::to_string(m);
}

}  // namespace

SuiteReport dxy_suite(const LoopTable& t, std::uint64_t budget, std::uint64_t seed) {
  SuiteReport rep;
  Elt n = t.size();
  auto check_triple = [&](Elt x, Elt y, Elt m) {
    Elt xi = t.inv(x), yi = t.inv(y), mi = t.inv(m);
    // Four ways to write the two-sided conjugation image of m, plus the
    // translation-product form L_x R_y L_{xy}^{-1}.
    Elt e1 = t.mul(xi, t.mul(t.mul(t.mul(x, yi), m), y));
    Elt e2 = t.mul(t.mul(yi, xi), t.mul(t.mul(x, m), y));
    Elt e3 = t.mul(t.mul(yi, t.mul(m, xi)), t.mul(x, y));
    Elt e4 = t.mul(t.mul(yi, t.mul(m, t.mul(y, xi))), x);
    Elt e5 = t.ldiv(t.mul(x, y), t.mul(t.mul(x, m), y));
    rep.checks += 4;
    if (!(e1 == e2 && e2 == e3 && e3 == e4 && e4 == e5)) {
      rep.pass = false;
      rep.detail = "two-sided operator forms disagree" + triple_tag(x, y, m);
      return false;
    }
    // Right inner translation: three displayed forms.
    Elt r1 = apply_Rxy(t, x, y, m);
    Elt r2 = apply_Lxy(t, xi, yi, m);
    Elt r3 = t.mul(y, t.rdiv(t.ldiv(y, t.mul(m, x)), x));
    rep.checks += 2;
    if (!(r1 == r2 && r2 == r3)) {
      rep.pass = false;
      rep.detail = "right inner translation forms disagree" + triple_tag(x, y, m);
      return false;
    }
    // One-sided cancellation: m^{-1}(mx.y) = xm^{-1}.my = (x.ym^{-1})m.
    Elt c1 = t.mul(mi, t.mul(t.mul(m, x), y));
    Elt c2 = t.mul(t.mul(x, mi), t.mul(m, y));
    Elt c3 = t.mul(t.mul(x, t.mul(y, mi)), m);
    rep.checks += 2;
    if (!(c1 == c2 && c2 == c3)) {
      rep.pass = false;
      rep.detail = "cancellation forms disagree" + triple_tag(x, y, m);
      return false;
    }
    return true;
  };
  std::uint64_t total = static_cast<std::uint64_t>(n) * n * n;
  if (total <= budget) {
    rep.exhaustive = true;
    for (Elt x = 0; x < n; ++x)
      for (Elt y = 0; y < n; ++y)
        for (Elt m = 0; m < n; ++m)
          if (!check_triple(x, y, m)) return rep;
  } else {
    rep.exhaustive = false;
    Rng rng(seed);
    for (std::uint64_t i = 0; i < budget; ++i)
      if (!check_triple(static_cast<Elt>(rng.below(static_cast<std::uint64_t>(n))),
                        static_cast<Elt>(rng.below(static_cast<std::uint64_t>(n))),
                        static_cast<Elt>(rng.below(static_cast<std::uint64_t>(n)))))
        return rep;
  }
  return rep;
}

SuiteReport psaut_suite(const LoopTable& t, std::uint64_t budget, std::uint64_t seed) {
  SuiteReport rep;
  Elt n = t.size();
  auto check_pair = [&](Elt x, Elt y) {
    std::string at = " at x=" + std::to_string(x) + " y=" + std::to_string(y);
    PsAutPair tx{translation(t, TransKind::T, x), loop_pow(t, x, -3)};
    ++rep.checks;
    if (!is_pseudoautomorphism(t, tx)) {
      rep.pass = false;
      rep.detail = "middle translation with cube-inverse companion fails" + at;
      return false;
    }
    PsAutPair rxy{translation(t, TransKind::Rxy, x, y), assoc_comm(t, AcKind::Commutator, x, y)};
    ++rep.checks;
    if (!is_pseudoautomorphism(t, rxy)) {
      rep.pass = false;
      rep.detail = "right inner translation with commutator companion fails" + at;
      return false;
    }
    // The two-sided operator with companion y^{-1}xy^{-2}x^{-1} factors
    // through three certified pairs.
    Elt xi = t.inv(x), yi = t.inv(y);
    Elt comp = t.mul(t.mul(t.mul(yi, x), t.inv(t.mul(y, y))), xi);
    PsAutPair dxy{translation(t, TransKind::Dxy, x, y), comp};
    PsAutPair f1{translation(t, TransKind::Lxy, x, yi), assoc_comm(t, AcKind::Commutator, xi, y)};
    PsAutPair f2{translation(t, TransKind::T, y), loop_pow(t, y, -3)};
    PsAutPair f3{translation(t, TransKind::Lxy, y, x), assoc_comm(t, AcKind::Commutator, yi, xi)};
    PsAutPair rhs = psaut_compose(psaut_compose(f1, f2, t), f3, t);
    rep.checks += 2;
    if (!is_pseudoautomorphism(t, dxy) || !(dxy.A == rhs.A) || dxy.a != rhs.a) {
      rep.pass = false;
      rep.detail = "two-sided operator factorization fails" + at;
      return false;
    }
    return true;
  };
  std::uint64_t total = static_cast<std::uint64_t>(n) * n;
  if (total <= budget) {
    rep.exhaustive = true;
    for (Elt x = 0; x < n; ++x)
      for (Elt y = 0; y < n; ++y)
        if (!check_pair(x, y)) return rep;
  } else {
    rep.exhaustive = false;
    Rng rng(seed);
    for (std::uint64_t i = 0; i < budget; ++i)
      if (!check_pair(static_cast<Elt>(rng.below(static_cast<std::uint64_t>(n))),
                      static_cast<Elt>(rng.below(static_cast<std::uint64_t>(n)))))
        return rep;
  }
  return rep;
}

namespace {

struct IsoSearch {
  const LoopTable& t1;
  const LoopTable& t2;
  std::uint64_t budget;
  std::uint64_t used = 0;

  void spend(std::uint64_t w) {
    used += w;
    if (used > budget) fail(Err::Timeout, "isomorphism search budget exhausted; undecided");
  }

  // map from t1 to t2 derived by closing generator images under products.
  bool derive(const std::vector<Elt>& gens, const std::vector<Elt>& imgs, Perm& out) {
    Elt n = t1.size();
    std::vector<Elt> map(static_cast<std::size_t>(n), -1);
    std::vector<char> used2(static_cast<std::size_t>(n), 0);
    std::vector<Elt> known;
    auto assign = [&](Elt a, Elt b) {
      if (map[static_cast<std::size_t>(a)] >= 0) return map[static_cast<std::size_t>(a)] == b;
      if (used2[static_cast<std::size_t>(b)]) return false;
      map[static_cast<std::size_t>(a)] = b;
      used2[static_cast<std::size_t>(b)] = 1;
      known.push_back(a);
      return true;
    };
    if (!assign(0, 0)) return false;
    for (std::size_t i = 0; i < gens.size(); ++i)
      if (!assign(gens[i], imgs[i])) return false;
    for (std::size_t i = 0; i < known.size(); ++i) {
      Elt u = known[i];
      for (std::size_t j = 0; j <= i; ++j) {
        Elt w = known[j];
        spend(4);
        if (!assign(t1.mul(u, w), t2.mul(map[static_cast<std::size_t>(u)],
                                         map[static_cast<std::size_t>(w)])))
          return false;
        if (!assign(t1.mul(w, u), t2.mul(map[static_cast<std::size_t>(w)],
                                         map[static_cast<std::size_t>(u)])))
          return false;
      }
    }
    if (static_cast<Elt>(known.size()) != n) return false;
    out.im = std::move(map);
    return true;
  }
};

}  // namespace

IsoVerdict isomorphic(const LoopTable& t1, const LoopTable& t2, std::uint64_t node_budget) {
  IsoVerdict verdict;
  Elt n = t1.size();
  if (t2.size() != n) return verdict;
  if (n == 1) {
    verdict.yes = true;
    verdict.bijection = Perm::identity(1);
    return verdict;
  }

  IsoSearch search{t1, t2, node_budget};

  auto profile = [&](const LoopTable& t) {
    std::vector<std::pair<Elt, Elt>> inv(static_cast<std::size_t>(n));
    for (Elt x = 0; x < n; ++x) {
      Elt comm = 0;
      for (Elt y = 0; y < n; ++y)
        if (t.mul(x, y) == t.mul(y, x)) ++comm;
      inv[static_cast<std::size_t>(x)] = {loop_order(t, x), comm};
    }
    return inv;
  };
  search.spend(4u * static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n));
  auto inv1 = profile(t1), inv2 = profile(t2);
  {
    auto s1 = inv1, s2 = inv2;
    std::sort(s1.begin(), s1.end());
    std::sort(s2.begin(), s2.end());
    if (s1 != s2) return verdict;
  }
  std::map<std::pair<Elt, Elt>, std::vector<Elt>> class2;
  for (Elt x = 0; x < n; ++x) class2[inv2[static_cast<std::size_t>(x)]].push_back(x);

  // Greedy generators for t1, preferring elements with few candidate images.
  std::vector<Elt> gens;
  std::vector<Elt> prefix_sizes;
  {
    std::vector<Elt> closure{0};
    std::vector<char> in(static_cast<std::size_t>(n), 0);
    in[0] = 1;
    while (static_cast<Elt>(closure.size()) < n) {
      Elt best = -1;
      std::size_t best_cls = 0;
      for (Elt x = 0; x < n; ++x) {
        if (in[static_cast<std::size_t>(x)]) continue;
        std::size_t cls = class2[inv1[static_cast<std::size_t>(x)]].size();
        if (best < 0 || cls < best_cls) {
          best = x;
          best_cls = cls;
        }
      }
      gens.push_back(best);
      closure = subloop_generate(t1, gens);
      search.spend(static_cast<std::uint64_t>(closure.size()) * closure.size() * 2);
      prefix_sizes.push_back(static_cast<Elt>(closure.size()));
      std::fill(in.begin(), in.end(), 0);
      for (Elt c : closure) in[static_cast<std::size_t>(c)] = 1;
    }
  }

  std::vector<Elt> imgs(gens.size(), -1);
  std::function<bool(std::size_t)> dfs = [&](std::size_t d) -> bool {
    if (d == gens.size()) return search.derive(gens, imgs, verdict.bijection);
    for (Elt cand : class2[inv1[static_cast<std::size_t>(gens[d])]]) {
      bool dup = false;
      for (std::size_t i = 0; i < d; ++i) dup = dup || imgs[i] == cand;
      if (dup) continue;
      imgs[d] = cand;
      std::vector<Elt> pref(imgs.begin(), imgs.begin() + static_cast<std::ptrdiff_t>(d) + 1);
      auto cl = subloop_generate(t2, pref);
      search.spend(static_cast<std::uint64_t>(cl.size()) * cl.size() * 2);
      if (static_cast<Elt>(cl.size()) == prefix_sizes[d] && dfs(d + 1)) return true;
    }
    imgs[d] = -1;
    return false;
  };
  verdict.yes = dfs(0);
  return verdict;
}

LoopTable materialize(const Loop& l, Elt cap, std::vector<std::string> names) {
  if (l.size() > cap)
    fail(Err::TooLargeToMaterialize,
         "order " + std::to_string(l.size()) + " exceeds cap " + std::to_string(cap));
  return build_table(l.size(), [&](Elt x, Elt y) { return l.mul(x, y); }, std::move(names));
}

LoopTable direct_product(const LoopTable& a, const LoopTable& b) {
  Elt na = a.size(), nb = b.size();
  if (na > kMaxOrder / (nb > 0 ? nb : 1))
    fail(Err::TooLarge, "direct product order exceeds 65536");
  return build_table(na * nb, [&](Elt x, Elt y) {
    Elt xa = x / nb, xb = x % nb, ya = y / nb, yb = y % nb;
    return a.mul(xa, ya) * nb + b.mul(xb, yb);
  });
}

LoopTable cyclic_table(Elt n) {
  return build_table(n, [n](Elt x, Elt y) { return (x + y) % n; });
}

void loop_save(const LoopTable& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Err::BadFile, "cannot open " + path + " for writing");
  Elt n = t.size();
  out << "loop-table v1\n";
  out << "order " << n << "\n";
  if (!t.names().empty()) {
    int depth = 0;
    for (const std::string& name : t.names()) {
      for (char c : name) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == '\n' || (c == ',' && depth == 0))
          fail(Err::BadFile, "name '" + name + "' would not survive a round trip");
      }
      if (depth != 0) fail(Err::BadFile, "unbalanced parentheses in name '" + name + "'");
    }
    out << "names ";
    for (Elt i = 0; i < n; ++i) out << (i ? "," : "") << t.names()[static_cast<std::size_t>(i)];
    out << "\n";
  }
  for (Elt x = 0; x < n; ++x) {
    for (Elt y = 0; y < n; ++y) out << (y ? " " : "") << t.mul(x, y);
    out << "\n";
  }
  if (!out) fail(Err::BadFile, "write to " + path + " failed");
}

LoopTable loop_load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Err::BadFile, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "loop-table v1")
    fail(Err::BadFile, "expected header 'loop-table v1'");
  if (!std::getline(in, line) || line.rfind("order ", 0) != 0)
    fail(Err::BadFile, "expected 'order <n>' line");
  Elt n = 0;
  try {
    std::size_t pos = 0;
    n = std::stoll(line.substr(6), &pos);
    if (pos != line.size() - 6) throw std::invalid_argument("");
  } catch (const std::exception&) {
    fail(Err::BadFile, "bad order line: " + line);
  }
  if (n <= 0 || n > kMaxOrder) fail(Err::BadFile, "order out of range: " + std::to_string(n));

  if (!std::getline(in, line)) fail(Err::BadFile, "truncated file");
  std::vector<std::string> names;
  if (line.rfind("names ", 0) == 0) {
    std::string body = line.substr(6);
    std::string cur;
    int depth = 0;
    for (char c : body) {
      if (c == '(') ++depth;
      if (c == ')') --depth;
      if (c == ',' && depth == 0) {
        names.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    names.push_back(cur);
    if (depth != 0) fail(Err::BadFile, "unbalanced parentheses in names line");
    if (static_cast<Elt>(names.size()) != n)
      fail(Err::BadFile, "names line has " + std::to_string(names.size()) + " entries, need " +
                             std::to_string(n));
    if (!std::getline(in, line)) fail(Err::BadFile, "truncated file");
  }

  std::size_t un = static_cast<std::size_t>(n);
  std::vector<Elt> raw(un * un);
  for (Elt x = 0; x < n; ++x) {
    if (x > 0 && !std::getline(in, line)) fail(Err::BadFile, "truncated table");
    std::istringstream row(line);
    for (Elt y = 0; y < n; ++y) {
      Elt v;
      if (!(row >> v) || v < 0 || v >= n)
        fail(Err::BadFile, "bad entry in row " + std::to_string(x));
      raw[static_cast<std::size_t>(x) * un + static_cast<std::size_t>(y)] = v;
    }
    Elt extra;
    if (row >> extra) fail(Err::BadFile, "trailing entries in row " + std::to_string(x));
  }
  while (std::getline(in, line))
    if (!line.empty()) fail(Err::BadFile, "unexpected trailing content");

  for (Elt x = 0; x < n; ++x)
    if (raw[static_cast<std::size_t>(x)] != x || raw[static_cast<std::size_t>(x) * un] != x)
      fail(Err::BadFile, "index 0 is not a two-sided identity");
  return build_table(n, [&](Elt x, Elt y) {
    return raw[static_cast<std::size_t>(x) * un + static_cast<std::size_t>(y)];
  }, std::move(names));
}

}  // namespace mfl
