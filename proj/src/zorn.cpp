#include "mfl/zorn.hpp"

#include <algorithm>
#include <charconv>
#include <functional>

namespace mfl {

namespace {

void check_same_ring(const ZornElem& x, const ZornElem& y) {
  if (!x.ring.same(y.ring)) fail(Err::RingMismatch, "Zorn operands over different rings");
}

}  // namespace

ZornElem zorn_make(const Ring& r, RingElem a, Vec3 v, Vec3 w, RingElem b) {
  r.check(a);
  r.check(b);
  for (int i = 0; i < 3; ++i) {
    r.check(v[static_cast<std::size_t>(i)]);
    r.check(w[static_cast<std::size_t>(i)]);
  }
  return ZornElem{r, a, v, w, b};
}

ZornElem zorn_identity(const Ring& r) { return ZornElem{r, 1, {0, 0, 0}, {0, 0, 0}, 1}; }

ZornElem zorn_zero(const Ring& r) { return ZornElem{r, 0, {0, 0, 0}, {0, 0, 0}, 0}; }

ZornCoords zorn_coords(const ZornElem& x) {
  return {x.a, x.v[0], x.v[1], x.v[2], x.w[0], x.w[1], x.w[2], x.b};
}

ZornElem zorn_from_coords(const Ring& r, const ZornCoords& c) {
  return zorn_make(r, c[0], {c[1], c[2], c[3]}, {c[4], c[5], c[6]}, c[7]);
}

ZornElem zorn_mul(const ZornElem& x, const ZornElem& y) {
  check_same_ring(x, y);
  const Ring& r = x.ring;
  ZornElem z{r, 0, {0, 0, 0}, {0, 0, 0}, 0};
  z.a = r.add(r.mul(x.a, y.a), dot(r, x.v, y.w));
  Vec3 cw = cross(r, x.w, y.w);
  Vec3 cv = cross(r, x.v, y.v);
  for (std::size_t i = 0; i < 3; ++i) {
    z.v[i] = r.sub(r.add(r.mul(x.a, y.v[i]), r.mul(y.b, x.v[i])), cw[i]);
    z.w[i] = r.add(r.add(r.mul(y.a, x.w[i]), r.mul(x.b, y.w[i])), cv[i]);
  }
  z.b = r.add(dot(r, x.w, y.v), r.mul(x.b, y.b));
  return z;
}

ZornElem zorn_add(const ZornElem& x, const ZornElem& y) {
  check_same_ring(x, y);
  const Ring& r = x.ring;
  return ZornElem{r, r.add(x.a, y.a), vec3_add(r, x.v, y.v), vec3_add(r, x.w, y.w),
                  r.add(x.b, y.b)};
}

ZornElem zorn_neg(const ZornElem& x) {
  const Ring& r = x.ring;
  return ZornElem{r, r.neg(x.a), vec3_neg(r, x.v), vec3_neg(r, x.w), r.neg(x.b)};
}

ZornElem zorn_scale(RingElem c, const ZornElem& x) {
  const Ring& r = x.ring;
  r.check(c);
  ZornElem z = x;
  z.a = r.mul(c, x.a);
  z.b = r.mul(c, x.b);
  for (std::size_t i = 0; i < 3; ++i) {
    z.v[i] = r.mul(c, x.v[i]);
    z.w[i] = r.mul(c, x.w[i]);
  }
  return z;
}

RingElem zorn_norm(const ZornElem& x) {
  const Ring& r = x.ring;
  return r.sub(r.mul(x.a, x.b), dot(r, x.v, x.w));
}

RingElem zorn_polar(const ZornElem& x, const ZornElem& y) {
  const Ring& r = x.ring;
  RingElem n = zorn_norm(zorn_add(x, y));
  return r.sub(r.sub(n, zorn_norm(x)), zorn_norm(y));
}

ZornElem zorn_conj(const ZornElem& x) {
  const Ring& r = x.ring;
  return ZornElem{r, x.b, vec3_neg(r, x.v), vec3_neg(r, x.w), x.a};
}

bool zorn_is_invertible(const ZornElem& x) { return x.ring.is_unit(zorn_norm(x)); }

ZornElem zorn_inv(const ZornElem& x) {
  const Ring& r = x.ring;
  RingElem n = zorn_norm(x);
  if (!r.is_unit(n))
    fail(Err::NotInvertible, "Zorn matrix has non-unit norm " + r.to_string(n));
  ZornElem y = zorn_scale(r.inv(n), zorn_conj(x));
  if (!(zorn_mul(x, y) == zorn_identity(r)))
    fail(Err::NotInvertible, "inverse verification failed");
  return y;
}

namespace {

LinOp8 mat_of_left(const ZornElem& x) {
  const Ring& r = x.ring;
  LinOp8 m(8);
  for (int i = 0; i < 8; ++i) {
    ZornCoords e{};
    e[static_cast<std::size_t>(i)] = 1;
    ZornCoords row = zorn_coords(zorn_mul(x, zorn_from_coords(r, e)));
    for (int j = 0; j < 8; ++j) m.at(i, j) = row[static_cast<std::size_t>(j)];
  }
  return m;
}

LinOp8 mat_of_right(const ZornElem& x) {
  const Ring& r = x.ring;
  LinOp8 m(8);
  for (int i = 0; i < 8; ++i) {
    ZornCoords e{};
    e[static_cast<std::size_t>(i)] = 1;
    ZornCoords row = zorn_coords(zorn_mul(zorn_from_coords(r, e), x));
    for (int j = 0; j < 8; ++j) m.at(i, j) = row[static_cast<std::size_t>(j)];
  }
  return m;
}

}  // namespace

LinOp8 zorn_operator(ZOpKind kind, const ZornElem& x, const std::optional<ZornElem>& y) {
  const Ring& r = x.ring;
  bool needs_y = kind == ZOpKind::Lxy || kind == ZOpKind::Dxy;
  if (needs_y && !y) fail(Err::MissingSecondArgument, "operator kind needs a second element");
  if (y) check_same_ring(x, *y);
  switch (kind) {
    case ZOpKind::L:
      return mat_of_left(x);
    case ZOpKind::R:
      return mat_of_right(x);
    case ZOpKind::T:
      return mat_mul(r, mat_of_left(zorn_inv(x)), mat_of_right(x));
    case ZOpKind::Lxy:
      return mat_mul(r, mat_mul(r, mat_of_left(x), mat_of_left(*y)),
                     mat_of_left(zorn_inv(zorn_mul(*y, x))));
    case ZOpKind::Dxy:
      return mat_mul(r, mat_mul(r, mat_of_left(x), mat_of_right(*y)),
                     mat_of_left(zorn_inv(zorn_mul(x, *y))));
  }
  fail(Err::IndexOutOfRange, "bad operator kind");
}

ZornElem zorn_apply(const LinOp8& op, const ZornElem& x) {
  const Ring& r = x.ring;
  ZornCoords c = zorn_coords(x);
  VecN v(c.begin(), c.end());
  VecN out = vec_apply(r, v, op);
  ZornCoords oc;
  std::copy(out.begin(), out.end(), oc.begin());
  return zorn_from_coords(r, oc);
}

std::string zorn_format(const ZornElem& x) {
  const Ring& r = x.ring;
  std::string s = "zorn(" + r.to_string(x.a) + ";";
  for (std::size_t i = 0; i < 3; ++i) s += (i ? "," : "") + r.to_string(x.v[i]);
  s += ";";
  for (std::size_t i = 0; i < 3; ++i) s += (i ? "," : "") + r.to_string(x.w[i]);
  s += ";" + r.to_string(x.b) + ")";
  return s;
}

ZornElem zorn_parse(const Ring& r, const std::string& text) {
  std::size_t pos = 0;
  auto expect = [&](const std::string& tok) {
    if (text.compare(pos, tok.size(), tok) != 0)
      fail(Err::BadDescriptor, "expected '" + tok + "' at offset " + std::to_string(pos) +
                                   " in '" + text + "'");
    pos += tok.size();
  };
  auto number = [&]() {
    long val = 0;
    auto [p, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), val);
    if (ec != std::errc() || p == text.data() + pos)
      fail(Err::BadDescriptor, "expected a ring element index in '" + text + "'");
    pos = static_cast<std::size_t>(p - text.data());
    if (val < 0 || val >= static_cast<long>(r.order()))
      fail(Err::ElementOutOfRing, "index " + std::to_string(val) + " not in ring of order " +
                                      std::to_string(r.order()));
    return static_cast<RingElem>(val);
  };
  expect("zorn(");
  RingElem a = number();
  expect(";");
  Vec3 v{}, w{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (i) expect(",");
    v[i] = number();
  }
  expect(";");
  for (std::size_t i = 0; i < 3; ++i) {
    if (i) expect(",");
    w[i] = number();
  }
  expect(";");
  RingElem b = number();
  expect(")");
  if (pos != text.size()) fail(Err::BadDescriptor, "trailing characters in '" + text + "'");
  return zorn_make(r, a, v, w, b);
}

ZornSetLoop::ZornSetLoop(Ring ring, std::vector<ZornElem> elements, Fold fold)
    : ring_(std::move(ring)) {
  if (fold == Fold::ScalarOrbit) {
    for (std::uint32_t c = 0; c < ring_.order(); ++c)
      if (ring_.mul(static_cast<RingElem>(c), static_cast<RingElem>(c)) == 1)
        unit_scalars_.push_back(static_cast<RingElem>(c));
  }
  // Fold, deduplicate, then order with the identity first.
  std::map<ZornCoords, ZornElem> canon;
  for (const ZornElem& z : elements) {
    ZornElem f = this->fold(z);
    canon.emplace(zorn_coords(f), f);
  }
  ZornElem id = this->fold(zorn_identity(ring_));
  if (!canon.count(zorn_coords(id)))
    fail(Err::NoIdentity, "element set does not contain the identity");
  elems_.push_back(id);
  for (auto& [c, z] : canon)
    if (!(z == id)) elems_.push_back(z);
  for (std::size_t i = 0; i < elems_.size(); ++i)
    where_.emplace(zorn_coords(elems_[i]), static_cast<Elt>(i));
}

ZornElem ZornSetLoop::fold(const ZornElem& z) const {
  if (unit_scalars_.empty()) return z;
  ZornElem best = z;
  ZornCoords bc = zorn_coords(best);
  for (RingElem c : unit_scalars_) {
    ZornElem cand = zorn_scale(c, z);
    ZornCoords cc = zorn_coords(cand);
    if (cc < bc) {
      best = cand;
      bc = cc;
    }
  }
  return best;
}

Elt ZornSetLoop::index_of(const ZornElem& z) const {
  auto it = where_.find(zorn_coords(fold(z)));
  if (it == where_.end())
    fail(Err::IndexOutOfRange, "Zorn matrix " + zorn_format(z) + " is not in this loop");
  return it->second;
}

Elt ZornSetLoop::mul(Elt x, Elt y) const {
  return index_of(zorn_mul(elem(x), elem(y)));
}

Elt ZornSetLoop::inv(Elt x) const { return index_of(zorn_inv(elem(x))); }

std::vector<std::string> ZornSetLoop::names() const {
  std::vector<std::string> out;
  out.reserve(elems_.size());
  for (const ZornElem& z : elems_) out.push_back(zorn_format(z));
  return out;
}

namespace {

std::vector<ZornElem> norm_one_elements(const Ring& r) {
  if (r.spec().kind != RingKind::PrimeField && r.spec().kind != RingKind::ExtField)
    fail(Err::BadDescriptor, "norm-one loops require a field");
  std::uint32_t q = r.order();
  std::vector<ZornElem> out;
  ZornCoords c{};
  // Odometer over all q^8 coordinate tuples.
  while (true) {
    ZornElem z = zorn_from_coords(r, c);
    if (zorn_norm(z) == 1) out.push_back(z);
    int i = 7;
    while (i >= 0 && c[static_cast<std::size_t>(i)] == q - 1) {
      c[static_cast<std::size_t>(i)] = 0;
      --i;
    }
    if (i < 0) break;
    ++c[static_cast<std::size_t>(i)];
  }
  return out;
}

}  // namespace

ZornSetLoop sl_loop(const Ring& r) {
  return ZornSetLoop(r, norm_one_elements(r), ZornSetLoop::Fold::None);
}

ZornSetLoop psl_set_loop(const Ring& r) {
  return ZornSetLoop(r, norm_one_elements(r), ZornSetLoop::Fold::ScalarOrbit);
}

LoopTable psl_loop(const Ring& r, Elt cap) {
  ZornSetLoop lazy = psl_set_loop(r);
  return materialize(lazy, cap, lazy.names());
}

ZornSetLoop parabolic_subloop(const Ring& r) {
  std::vector<ZornElem> elems;
  for (const Mat2& m : gl2_enumerate(r))
    for (std::uint32_t r1 = 0; r1 < r.order(); ++r1)
      for (std::uint32_t r2 = 0; r2 < r.order(); ++r2)
        elems.push_back(zorn_make(r, m.e[0], {0, m.e[1], static_cast<RingElem>(r1)},
                                  {static_cast<RingElem>(r2), m.e[2], 0}, m.e[3]));
  ZornSetLoop loop(r, std::move(elems), ZornSetLoop::Fold::None);
  // Closure re-verification: the shape constraints v1 = 0 and w3 = 0 must
  // survive products, which index_of would reject otherwise.
  Elt n = loop.size();
  if (n <= 512) {
    for (Elt x = 0; x < n; ++x)
      for (Elt y = 0; y < n; ++y) loop.mul(x, y);
  } else {
    Rng rng(1);
    for (int i = 0; i < 10000; ++i)
      loop.mul(static_cast<Elt>(rng.below(static_cast<std::uint64_t>(n))),
               static_cast<Elt>(rng.below(static_cast<std::uint64_t>(n))));
  }
  return loop;
}

PerpBasis one_perp(const Ring& r) {
  if (r.spec().kind != RingKind::PrimeField && r.spec().kind != RingKind::ExtField)
    fail(Err::BadDescriptor, "orthogonal complement requires a field");
  PerpBasis out;
  ZornElem one = zorn_identity(r);
  // Collect the kernel of x -> polar(x, 1) over the coordinate basis: the
  // polar form of N pairs a with b and v_i with w_i, so U = {a + b = 0}.
  RowSpan span(r);
  std::vector<VecN> cand;
  VecN diag(8, 0);
  diag[0] = 1;
  diag[7] = r.neg(1);
  cand.push_back(diag);
  for (int i = 1; i <= 6; ++i) {
    VecN e(8, 0);
    e[static_cast<std::size_t>(i)] = 1;
    cand.push_back(e);
  }
  for (const VecN& u : cand) {
    ZornCoords c{};
    std::copy(u.begin(), u.end(), c.begin());
    if (zorn_polar(zorn_from_coords(r, c), one) != 0)
      fail(Err::IllDefined, "candidate basis vector not orthogonal to 1");
    span.add(u);
    out.basis.push_back(u);
  }
  if (span.dim() != 7) fail(Err::IllDefined, "orthogonal complement has unexpected dimension");
  if (r.characteristic() == 2) {
    VecN onev(8, 0);
    onev[0] = onev[7] = 1;
    out.line.push_back(onev);
    for (int i = 1; i <= 6; ++i) {
      VecN e(8, 0);
      e[static_cast<std::size_t>(i)] = 1;
      out.quotient.push_back(e);
    }
  }
  return out;
}

namespace {

ZornElem random_invertible(const Ring& r, Rng& rng) {
  for (;;) {
    ZornCoords c{};
    for (auto& x : c) x = static_cast<RingElem>(rng.below(r.order()));
    ZornElem z = zorn_from_coords(r, c);
    if (zorn_is_invertible(z)) return z;
  }
}

}  // namespace

SuiteReport altop_suite(const Ring& r, std::uint64_t budget, std::uint64_t seed, bool norm_one) {
  SuiteReport rep;
  Rng rng(seed);
  const MatN id8 = MatN::identity(8);

  using OpPair = std::function<MatN(const ZornElem&, const ZornElem&)>;
  using OpOne = std::function<MatN(const ZornElem&)>;

  // Per-pair operator caches over the norm-1 loop; the suite's products stay
  // inside that loop, so every composite is resolvable by index.
  std::unique_ptr<ZornSetLoop> loop;
  std::vector<MatN> dcache, lcache, tcache;
  Elt n_elems = 0;
  bool cache_pairs = false;
  if (norm_one) {
    loop = std::make_unique<ZornSetLoop>(sl_loop(r));
    n_elems = loop->size();
    cache_pairs = n_elems <= 512;
    if (cache_pairs) {
      std::size_t sq = static_cast<std::size_t>(n_elems) * static_cast<std::size_t>(n_elems);
      dcache.assign(sq, MatN());
      lcache.assign(sq, MatN());
      tcache.assign(static_cast<std::size_t>(n_elems), MatN());
    }
  }

  OpPair op_d, op_l;
  OpOne op_t;
  if (cache_pairs) {
    op_d = [&](const ZornElem& x, const ZornElem& y) {
      std::size_t key = static_cast<std::size_t>(loop->index_of(x)) * n_elems +
                        static_cast<std::size_t>(loop->index_of(y));
      if (dcache[key].dim() == 0) dcache[key] = zorn_operator(ZOpKind::Dxy, x, y);
      return dcache[key];
    };
    op_l = [&](const ZornElem& x, const ZornElem& y) {
      std::size_t key = static_cast<std::size_t>(loop->index_of(x)) * n_elems +
                        static_cast<std::size_t>(loop->index_of(y));
      if (lcache[key].dim() == 0) lcache[key] = zorn_operator(ZOpKind::Lxy, x, y);
      return lcache[key];
    };
    op_t = [&](const ZornElem& x) {
      std::size_t key = static_cast<std::size_t>(loop->index_of(x));
      if (tcache[key].dim() == 0) tcache[key] = zorn_operator(ZOpKind::T, x);
      return tcache[key];
    };
  } else {
    op_d = [](const ZornElem& x, const ZornElem& y) { return zorn_operator(ZOpKind::Dxy, x, y); };
    op_l = [](const ZornElem& x, const ZornElem& y) { return zorn_operator(ZOpKind::Lxy, x, y); };
    op_t = [](const ZornElem& x) { return zorn_operator(ZOpKind::T, x); };
  }

  auto describe = [&](const char* what, const ZornElem& m, const ZornElem& n,
                      const std::optional<ZornElem>& k) {
    rep.pass = false;
    rep.detail = std::string(what) + " fails over " + r.descriptor() + " at m=" + zorn_format(m) +
                 ", n=" + zorn_format(n);
    if (k) rep.detail += ", k=" + zorn_format(*k);
  };

  // The four triple identities, compared entrywise as 8x8 matrices.
  auto check_triple = [&](const ZornElem& m, const ZornElem& n, const ZornElem& k) {
    ZornElem mn = zorn_mul(m, n), km = zorn_mul(k, m), nk = zorn_mul(n, k);
    ZornElem m_nk = zorn_mul(m, nk);
    MatN d_mn = op_d(m, n), l_nm = op_l(n, m);
    MatN rhs1 = mat_mul(r, mat_mul(r, op_l(m, zorn_inv(n)), op_t(n)), l_nm);
    rep.checks++;
    if (!(d_mn == rhs1)) return describe("two-sided factorization", m, n, std::nullopt);
    MatN d_mn_km = op_d(mn, km), l_nk_m = op_l(nk, m), d_mnk_m = op_d(m_nk, m);
    MatN lhs2 = mat_mul(r, l_nm, d_mn_km);
    MatN rhs2 = mat_mul(r, mat_mul(r, op_d(n, k), l_nk_m), d_mnk_m);
    rep.checks++;
    if (!(lhs2 == rhs2)) return describe("left composite identity", m, n, k);
    MatN lhs3 = mat_mul(r, op_d(k, m), op_l(km, mn));
    MatN rhs3 = mat_mul(r, mat_mul(r, op_l(k, n), l_nk_m), d_mnk_m);
    rep.checks++;
    if (!(lhs3 == rhs3)) return describe("right composite identity", m, n, k);
    MatN lhs4 = mat_add(r, mat_mul(r, d_mn, d_mn_km), mat_mul(r, op_l(m, k), op_l(km, mn)));
    MatN rhs4 = mat_add(r, mat_mul(r, op_d(m, nk), d_mnk_m), op_l(m, m_nk));
    rep.checks++;
    if (!(lhs4 == rhs4)) return describe("linearized sum identity", m, n, k);
  };

  // Degenerate pairs: two-sided operators collapse to conjugation or the
  // identity map.
  auto check_single = [&](const ZornElem& x) {
    ZornElem xi = zorn_inv(x);
    ZornElem one = zorn_identity(r);
    rep.checks += 6;
    if (!(op_d(x, xi) == op_t(xi)))
      return describe("inverse-pair conjugation form", x, xi, std::nullopt);
    if (!(op_d(one, x) == op_t(x)))
      return describe("identity-left conjugation form", one, x, std::nullopt);
    if (!(op_d(x, one) == id8)) return describe("identity-right collapse", x, one, std::nullopt);
    if (!(op_l(x, xi) == id8)) return describe("inverse-pair collapse", x, xi, std::nullopt);
    if (!(op_l(one, x) == id8)) return describe("identity-left collapse", one, x, std::nullopt);
    if (!(op_l(x, one) == id8)) return describe("identity-right pair collapse", x, one, std::nullopt);
  };

  if (norm_one) {
    std::uint64_t cube = static_cast<std::uint64_t>(n_elems) * static_cast<std::uint64_t>(n_elems) *
                         static_cast<std::uint64_t>(n_elems);
    if (cube <= budget) {
      for (Elt i = 0; i < n_elems && rep.pass; ++i)
        for (Elt j = 0; j < n_elems && rep.pass; ++j)
          for (Elt k = 0; k < n_elems && rep.pass; ++k)
            check_triple(loop->elem(i), loop->elem(j), loop->elem(k));
      for (Elt i = 0; i < n_elems && rep.pass; ++i) check_single(loop->elem(i));
    } else {
      rep.exhaustive = false;
      auto pick = [&] { return static_cast<Elt>(rng.below(static_cast<std::uint64_t>(n_elems))); };
      for (std::uint64_t s = 0; s < budget && rep.pass; ++s)
        check_triple(loop->elem(pick()), loop->elem(pick()), loop->elem(pick()));
      for (int s = 0; s < 200 && rep.pass; ++s) check_single(loop->elem(pick()));
    }
  } else {
    rep.exhaustive = false;
    for (std::uint64_t s = 0; s < budget && rep.pass; ++s)
      check_triple(random_invertible(r, rng), random_invertible(r, rng),
                   random_invertible(r, rng));
    for (int s = 0; s < 200 && rep.pass; ++s) check_single(random_invertible(r, rng));
  }
  return rep;
}

}  // namespace mfl
