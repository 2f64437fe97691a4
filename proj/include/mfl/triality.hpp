#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mfl/loopcore.hpp"
#include "mfl/ring.hpp"
#include "mfl/rng.hpp"
#include "mfl/smallmat.hpp"

namespace mfl {

// Element of a coordinate-symmetric group: a triple of base-group indices
// plus, in the module construction, a dense coefficient vector over the
// rank^3 tensor basis (empty otherwise).
struct GrpElem {
  std::array<Elt, 3> t{0, 0, 0};
  VecN w;

  bool operator==(const GrpElem& o) const { return t == o.t && w == o.w; }
  bool operator!=(const GrpElem& o) const { return !(*this == o); }
  bool operator<(const GrpElem& o) const { return t != o.t ? t < o.t : w < o.w; }
};

// Flattened index of the tensor basis vector e_{i,j,k} (0-based coordinates).
inline int tensor_index(int rank, int i, int j, int k) { return (i * rank + j) * rank + k; }

// A group carrying two commuting coordinate symmetries: rho cycles the three
// coordinates (order 3) and sigma swaps the first two (order 2). Two shapes
// are supported:
//   * the plain cube of an associative base table, and
//   * its extension by a tensor-cube module over a matrix group, where the
//     symmetries also permute the tensor factors.
// Instances are immutable after construction; the derived element set of the
// associated loop is cached on first use (not safe to race that first call).
class WreathTriality {
 public:
  static WreathTriality cube(LoopTable base);
  static WreathTriality module_extension(const Ring& r, int rank, const std::vector<MatN>& gens,
                                         bool allow_failing);

  const LoopTable& base() const { return base_; }
  bool has_module() const { return mod_.has_value(); }
  const Ring& ring() const;
  int rank() const { return mod_ ? mod_->rank : 0; }
  int module_dim() const { return mod_ ? mod_->dim : 0; }
  // Group matrices by base-table index (module shape only).
  const std::vector<MatN>& matrices() const;
  std::uint64_t order() const;

  GrpElem identity() const;
  // Validating constructors for elements.
  GrpElem elem(Elt t0, Elt t1, Elt t2) const;
  GrpElem elem(Elt t0, Elt t1, Elt t2, VecN w) const;

  GrpElem mul(const GrpElem& a, const GrpElem& b) const;
  GrpElem inv(const GrpElem& a) const;
  GrpElem conj(const GrpElem& a, const GrpElem& b) const;  // b^{-1} a b
  GrpElem comm(const GrpElem& a, const GrpElem& b) const;  // a^{-1} b^{-1} a b
  GrpElem rho(const GrpElem& a) const;
  GrpElem rho2(const GrpElem& a) const;
  GrpElem sigma(const GrpElem& a) const;
  bool is_sigma_fixed(const GrpElem& a) const { return sigma(a) == a; }

  // Module vector acted on by a coordinate triple (module shape only).
  VecN act(const VecN& w, const std::array<Elt, 3>& t) const;

  std::vector<GrpElem> all_elements(std::uint64_t cap = 100000) const;
  // The sigma-centralizer {x : x^sigma = x}.
  std::vector<GrpElem> sigma_fixed(std::uint64_t cap = 100000) const;
  GrpElem random_element(Rng& rng) const;

  std::string format(const GrpElem& a) const;

 private:
  WreathTriality() = default;

  struct ModulePart {
    Ring r;
    int rank = 0;
    int dim = 0;
    std::vector<MatN> mats;          // by base index
    std::vector<int> rho_map;        // basis index images under rho
    std::vector<int> sigma_map;      // basis index images under sigma
  };

  friend const std::vector<GrpElem>& moufang_elements(const WreathTriality& g);
  friend Elt moufang_index(const WreathTriality& g, const GrpElem& m);

  const std::vector<GrpElem>& moufang_cache() const;

  LoopTable base_;
  std::optional<ModulePart> mod_;
  mutable std::vector<GrpElem> moufang_;
  mutable std::map<GrpElem, Elt> moufang_idx_;
};

// Entry points named for what they build.
WreathTriality wreath_make(LoopTable base);
WreathTriality wreath_module_make(const Ring& r, int rank, const std::vector<MatN>& gens,
                                  bool allow_failing = false);

// The element set {x^{-1} x^sigma}: a Moufang loop under
// m.n = m^{-rho} n m^{-rho^2}. Identity first, then deterministic ascending
// order; cached inside the group object.
const std::vector<GrpElem>& moufang_elements(const WreathTriality& g);
Elt moufang_index(const WreathTriality& g, const GrpElem& m);
bool in_moufang(const WreathTriality& g, const GrpElem& m);

GrpElem loop_mult(const WreathTriality& g, const GrpElem& m, const GrpElem& n);
LoopTable loop_materialize(const WreathTriality& g, Elt cap = 2000);

// phi(x) = x^{-rho} x^{rho^2}.
GrpElem phi(const WreathTriality& g, const GrpElem& x);
// chi(x): the permutation m -> x^{-1} m x^sigma of the element set.
Perm chi(const WreathTriality& g, const GrpElem& x);

struct TrialityVerdict {
  bool pass = true;
  bool exhaustive = false;  // defining law checked on every element
  bool symbolic = false;    // module criterion decided exactly on the basis
  std::uint64_t checked = 0;
  std::optional<GrpElem> witness;
  std::string detail;
};

// Verifies the symmetry orders (rho^3 = sigma^2 = (rho sigma)^2 = 1, throwing
// AutomorphismOrderViolation on failure) and then the defining law
// (x^{-1}x^sigma)(x^{-1}x^sigma)^rho(x^{-1}x^sigma)^{rho^2} = 1: exhaustively
// when the group has at most 10^4 elements, otherwise on `budget` seeded
// samples plus, for module shapes, an exact per-basis criterion.
TrialityVerdict check_triality(const WreathTriality& g, std::uint64_t budget = 100000,
                               std::uint64_t seed = 12345);

// x with (m.u).(n.w) = (m.n).x, evaluated as the group word
//   x = (u^{-rho})^{n^{-rho} m^{rho^2}} . w^{[n^{rho^2}, m^{-rho}]}
//       . (u^{-rho^2})^{n^{rho^2} m^{-rho}},
// where a^b = b^{-1} a b. All four arguments must lie in the element set.
GrpElem formula_general(const WreathTriality& g, const GrpElem& m, const GrpElem& n,
                        const GrpElem& u, const GrpElem& w);

// y with (m.u)^{-1} = m^{-1}.y, evaluated as y = (u^rho)^{m^{-1}} (u^{rho^2})^m.
GrpElem formula_inverse(const WreathTriality& g, const GrpElem& m, const GrpElem& u);

struct AbelianPair {
  VecN x;  // u*D + w*L
  VecN y;  // -u*T^{-1}
};

// Abelian-kernel specialization: the product correction and inversion
// correction as linear expressions in the supplied operator matrices.
AbelianPair formula_abelian(const Ring& r, const MatN& d_op, const MatN& l_op, const MatN& t_op,
                            const VecN& u, const VecN& w);

// Identity suite over the derived loop: commuting coordinate images, the
// two-sided product symmetry, commutator-form agreement, conjugation-induced
// pseudoautomorphisms, the translation realizations of the conjugation
// action, the associator word, and the homomorphism/kernel behaviour of chi.
SuiteReport triality_identity_suite(const WreathTriality& g, std::uint64_t budget = 200000,
                                    std::uint64_t seed = 12345);

// Formula suite: the general product and inversion corrections reproduce the
// loop operation on 4-tuples/pairs (exhaustive within budget), and on module
// shapes the abelian specialization and its matrix form agree with them.
SuiteReport triality_formula_suite(const WreathTriality& g, std::uint64_t budget = 400000,
                                   std::uint64_t seed = 12345);

}  // namespace mfl
