#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mfl/linalg.hpp"
#include "mfl/loopcore.hpp"
#include "mfl/ring.hpp"
#include "mfl/smallmat.hpp"

namespace mfl {

// Split octonion algebra presented as Zorn vector matrices (a, v; w, b) with
// scalars a, b and 3-vectors v, w over one ring.
struct ZornElem {
  Ring ring;
  RingElem a = 0;
  Vec3 v{0, 0, 0};
  Vec3 w{0, 0, 0};
  RingElem b = 0;

  bool operator==(const ZornElem& o) const {
    return a == o.a && v == o.v && w == o.w && b == o.b;
  }
};

using ZornCoords = std::array<RingElem, 8>;  // (a, v1, v2, v3, w1, w2, w3, b)

ZornElem zorn_make(const Ring& r, RingElem a, Vec3 v, Vec3 w, RingElem b);
ZornElem zorn_identity(const Ring& r);
ZornElem zorn_zero(const Ring& r);
ZornCoords zorn_coords(const ZornElem& x);
ZornElem zorn_from_coords(const Ring& r, const ZornCoords& c);

ZornElem zorn_mul(const ZornElem& x, const ZornElem& y);
ZornElem zorn_add(const ZornElem& x, const ZornElem& y);
ZornElem zorn_neg(const ZornElem& x);
ZornElem zorn_scale(RingElem c, const ZornElem& x);

RingElem zorn_norm(const ZornElem& x);                       // N(x) = ab - v.w
RingElem zorn_polar(const ZornElem& x, const ZornElem& y);   // N(x+y) - N(x) - N(y)
ZornElem zorn_conj(const ZornElem& x);                       // (b, -v, -w, a)
ZornElem zorn_inv(const ZornElem& x);                        // conj / N, re-verified
bool zorn_is_invertible(const ZornElem& x);

// 8x8 operator matrices over the coordinate order above, acting on row
// vectors. Inverses of translations use the inverse property of alternative
// algebras (L_x^{-1} = L_{x^{-1}}), so no matrix elimination is involved.
using LinOp8 = MatN;

enum class ZOpKind { L, R, T, Lxy, Dxy };

LinOp8 zorn_operator(ZOpKind kind, const ZornElem& x,
                     const std::optional<ZornElem>& y = std::nullopt);
ZornElem zorn_apply(const LinOp8& op, const ZornElem& x);

std::string zorn_format(const ZornElem& x);  // zorn(a;v1,v2,v3;w1,w2,w3;b)
ZornElem zorn_parse(const Ring& r, const std::string& text);

// Lazy loop over a fixed list of invertible Zorn matrices, optionally folded
// by the scalar orbit x ~ lambda*x (norm-1 scalars lambda). Identity at 0,
// remaining elements in ascending coordinate order.
class ZornSetLoop final : public Loop {
 public:
  enum class Fold { None, ScalarOrbit };

  ZornSetLoop(Ring ring, std::vector<ZornElem> elements, Fold fold);

  Elt size() const override { return static_cast<Elt>(elems_.size()); }
  Elt mul(Elt x, Elt y) const override;
  Elt ldiv(Elt x, Elt y) const override { return mul(inv(x), y); }
  Elt rdiv(Elt x, Elt y) const override { return mul(x, inv(y)); }
  Elt inv(Elt x) const override;

  const Ring& ring() const { return ring_; }
  const ZornElem& elem(Elt x) const { return elems_[static_cast<std::size_t>(x)]; }
  Elt index_of(const ZornElem& z) const;  // folds first; IndexOutOfRange if absent
  ZornElem fold(const ZornElem& z) const;
  std::vector<std::string> names() const;

 private:
  Ring ring_;
  std::vector<ZornElem> elems_;
  std::map<ZornCoords, Elt> where_;
  std::vector<RingElem> unit_scalars_;  // norm-1 scalars; empty when Fold::None
};

ZornSetLoop sl_loop(const Ring& r);           // norm-1 matrices
ZornSetLoop psl_set_loop(const Ring& r);      // folded by scalar orbits
LoopTable psl_loop(const Ring& r, Elt cap = 2000);  // materialized, named table
ZornSetLoop parabolic_subloop(const Ring& r);

struct PerpBasis {
  std::vector<VecN> basis;     // basis of 1-perp under the polar form
  std::vector<VecN> line;      // <1> when it lies inside U (characteristic 2)
  std::vector<VecN> quotient;  // complement spanning U/<1> in characteristic 2
};

PerpBasis one_perp(const Ring& r);

// Exact 8x8 matrix equalities for the translation-operator identities of the
// algebra:
//   D_{m,n} = L_{m,n^{-1}} T_n L_{n,m}
//   L_{n,m} D_{mn,km} = D_{n,k} L_{nk,m} D_{m.nk,m}
//   D_{k,m} L_{km,mn} = L_{k,n} L_{nk,m} D_{m.nk,m}
//   D_{m,n} D_{mn,km} + L_{m,k} L_{km,mn} = D_{m,nk} D_{m.nk,m} + L_{m,m.nk}
// plus the degenerate forms D_{x,x^{-1}} = T_{x^{-1}}, D_{1,x} = T_x and
// D_{x,1} = L_{x,x^{-1}} = L_{1,x} = L_{x,1} = identity. With norm_one set,
// triples are drawn from the norm-1 loop (exhaustive when its cube fits the
// budget, with pairwise operator caching); otherwise from seeded random
// invertible elements. Budget counts (m,n,k) triples.
SuiteReport altop_suite(const Ring& r, std::uint64_t budget = 100000,
                        std::uint64_t seed = 12345, bool norm_one = false);

}  // namespace mfl
