#pragma once

#include <cstdint>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mfl/linalg.hpp"
#include "mfl/loopcore.hpp"
#include "mfl/ring.hpp"
#include "mfl/smallmat.hpp"
#include "mfl/zorn.hpp"

namespace mfl {

// ---------------------------------------------------------------------------
// Split pairs over an invertible 2x2 matrix group acting on row pairs.
// ---------------------------------------------------------------------------

struct GdPair {
  Mat2 g = Mat2::identity();
  Vec2 u{0, 0};

  bool operator==(const GdPair& o) const { return g == o.g && u == o.u; }
};

// (g,u)*(h,w) = (gh, u o (det h) g h^{-2} g^{-1} + w o [h^{-1}, g^{-1}]) with
// "o" the right action on row vectors; identity (I, 0).
GdPair gd_product(const Ring& r, const GdPair& p, const GdPair& q);

// (g,u)^{-1} = (g^{-1}, -u o (det g)^{-1} g^2).
GdPair gd_inverse(const Ring& r, const GdPair& p);

// The split loop on a finite 2x2 matrix group G times the row-pair module:
// table index = (group index)*|R|^2 + u1*|R| + u2 with the group list starting
// at the identity. Carries the scalar central subloop and the table of the
// quotient by it, whose product rule is the same formula on scalar cosets.
struct GdLoop {
  Ring ring;
  std::vector<Mat2> group;          // closure of the generators, identity first
  LoopTable table;                  // the full split loop
  std::vector<Elt> scalar_subloop;  // indices of (c*I, 0), a central subloop
  LoopTable quotient;               // table on scalar cosets

  Elt index_of(const GdPair& p) const;
  GdPair pair_of(Elt x) const;
};

// Empty generator list means every invertible 2x2 matrix over the ring.
// Generators must be invertible (NotAGroup otherwise); the closure times
// |R|^2 must fit the cap (TooLarge).
GdLoop gd_loop(const Ring& r, const std::vector<Mat2>& generators, Elt cap = 4096);

// The Zorn matrix with diagonal (g11, g22), off-diagonal vectors
// (0, g12, r1) and (r2, g21, 0), where (r1,r2) = u o g. Maps the pair loop
// bijectively and multiplicatively onto the parabolic subloop.
ZornElem parabolic_image(const Ring& r, const GdPair& p);

// ---------------------------------------------------------------------------
// Coordinate frame for a designated additive subgroup U of the algebra,
// optionally modulo an invariant line (quotient module in characteristic 2).
// ---------------------------------------------------------------------------

class USpace {
 public:
  // Basis rows must be independent ambient 8-vectors; modline rows span the
  // subspace quotiented away (its span must be independent from the basis).
  USpace(Ring ring, std::vector<VecN> basis, std::vector<VecN> modline = {});

  const Ring& ring() const { return ring_; }
  int dim() const { return static_cast<int>(basis_.size()); }
  const std::vector<VecN>& basis() const { return basis_; }
  const std::vector<VecN>& modline() const { return modline_; }
  std::uint64_t size() const;  // |R|^dim

  VecN to_ambient(const VecN& coords) const;  // coset representative
  // Solve coords * basis = ambient modulo the line; nullopt when ambient lies
  // outside the span of basis and line.
  std::optional<VecN> coords_of(const VecN& ambient) const;
  bool contains(const VecN& ambient) const;

 private:
  Ring ring_;
  std::vector<VecN> basis_;
  std::vector<VecN> modline_;
  std::vector<VecN> solver_rows_;   // echelon rows over basis then line
  std::vector<VecN> solver_tf_;     // expression of each echelon row in inputs
  std::vector<int> solver_pivots_;
};

enum class UModule { Perp, Perp6, Full };

// Perp: the 7-dimensional orthogonal complement of the unit. Perp6: its
// 6-dimensional quotient by the unit line (characteristic 2 only). Full: the
// whole algebra.
USpace uspace_standard(const Ring& r, UModule kind);

// ---------------------------------------------------------------------------
// Semidirect pairs (m, u) over a norm-1 or unit Zorn loop M and module U.
// ---------------------------------------------------------------------------

struct SdPair {
  Elt m = 0;  // index into the base loop
  VecN u;     // coordinates over the module basis

  bool operator==(const SdPair& o) const { return m == o.m && u == o.u; }
};

struct InvarianceVerdict {
  bool pass = true;
  std::string detail;  // offending operator and vector when failing
};

// For every generator pair (m, n) and every basis vector b of U, membership of
// b T_m and b L_{n,m} in U is tested (modulo the line when U is a quotient);
// the line itself must also be preserved.
InvarianceVerdict sd_invariance_check(const Ring& r, const std::vector<ZornElem>& gens,
                                      const USpace& u);

// Lazy loop on pairs (m, u): index = m * |U| + u-code where the u-code packs
// coordinates with the first basis coordinate least significant. Product rule
// (m,u)*(n,w) = (mn, u D_{m,n} + w L_{n,m}); inverse (m^{-1}, -u T_{m^{-1}}).
// Operator matrices are projected onto the module coordinates and kept in a
// bounded LRU cache shared behind a mutex.
class SdLoop final : public Loop {
 public:
  SdLoop(ZornSetLoop base, USpace u, std::size_t cache_cap = 65536);

  Elt size() const override;
  Elt mul(Elt x, Elt y) const override;
  Elt ldiv(Elt x, Elt y) const override { return mul(inv(x), y); }
  Elt rdiv(Elt x, Elt y) const override { return mul(x, inv(y)); }
  Elt inv(Elt x) const override;

  const ZornSetLoop& base() const { return base_; }
  const USpace& uspace() const { return u_; }

  SdPair pair_of(Elt x) const;
  Elt index_of(const SdPair& p) const;
  SdPair product(const SdPair& p, const SdPair& q) const;
  SdPair inverse(const SdPair& p) const;
  std::string name_of(Elt x) const;

  // Projected operator matrix on module coordinates for base elements m (and
  // n for the two-element kinds), through the cache.
  MatN op_matrix(ZOpKind kind, Elt m, Elt n = 0) const;

 private:
  MatN project(const LinOp8& op) const;

  ZornSetLoop base_;
  USpace u_;
  std::uint64_t usize_;

  struct CacheEntry {
    MatN mat;
    std::list<std::uint64_t>::iterator where;
  };
  // Indirection keeps the loop movable; the mutex guards concurrent readers.
  struct CacheState {
    std::mutex mu;
    std::list<std::uint64_t> order;
    std::unordered_map<std::uint64_t, CacheEntry> map;
  };
  mutable std::unique_ptr<CacheState> cache_ = std::make_unique<CacheState>();
  std::size_t cache_cap_ = 65536;
};

// Validates the generator invariance over the whole base (desk scale) before
// constructing; InvarianceNotEstablished on failure.
SdLoop sd_loop(const ZornSetLoop& base, const USpace& u, std::size_t cache_cap = 65536);

// The quotient by the central subloop of scalar base elements: the same module
// over the scalar-folded base. The operators are constant on scalar cosets,
// so pairs map by (m, u) -> (fold m, u).
SdLoop sd_quotient_scalars(const SdLoop& l, std::size_t cache_cap = 65536);

// The quotient by an invariant submodule: ambient rows are added to the
// mod-out line of U. Rows must lie in U and be operator-invariant
// (InvarianceNotEstablished otherwise).
SdLoop sd_quotient_module(const SdLoop& l, const std::vector<VecN>& invariant_rows,
                          std::size_t cache_cap = 65536);

// ---------------------------------------------------------------------------
// Named construction dispatch (also backs the CLI descriptors).
// ---------------------------------------------------------------------------

struct Construction {
  std::string description;                // resolved, normalized descriptor
  std::shared_ptr<const Loop> loop;       // always set
  std::shared_ptr<const LoopTable> table; // set when materialized within cap
  std::vector<std::string> names;         // element names when available
  std::vector<Elt> kernel;                // abelian-part fiber, sorted, when present
  std::shared_ptr<const LoopTable> fiber_quotient;  // base table when the kernel
                                                    // is the fiber of the built-in
                                                    // first-coordinate projection
  std::vector<Elt> fiber_project;         // element -> fiber_quotient index
};

// Catalog names: "psl2-semidirect" (param q in {4,5}: norm-1 subgroup split
// loop folded by scalars), "paige-semidirect" (param q: the simple norm-1
// quotient loop with the perp module, 6-dimensional quotient module in
// characteristic 2), "m2-over-p" (param p = 3: the order-120 simple subloop
// found inside the order-1080 loop, with the 7-dimensional perp module).
Construction catalog(const std::string& name, const std::map<std::string, long>& params,
                     Elt table_cap = 4096);

// Descriptor grammar:
//   paige:q=<q>
//   gd:<ring>,all | gd:<ring>,<mat>[+<mat>...]      mat = [[a,b],[c,d]]
//   sd:<base>,<ring>,<module>                        base in {sl,psl,parabolic},
//                                                    module in {perp,perp6,full}
//   catalog:<name>,<k=v>[,<k=v>...]
//   wreath:<loop-table file>
//   wreathmod:<ring>,<rank>[,all]
Construction construction_parse(const std::string& descriptor, Elt table_cap = 4096,
                                std::size_t cache_cap = 65536);

}  // namespace mfl
