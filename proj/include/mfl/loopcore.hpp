#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mfl/error.hpp"
#include "mfl/rng.hpp"

namespace mfl {

using Elt = std::int64_t;

// Finite loop with identity at index 0. Implementations are either dense
// validated Cayley tables or lazy handles whose products are computed on
// demand (large semidirect constructions).
class Loop {
 public:
  virtual ~Loop() = default;
  virtual Elt size() const = 0;
  virtual Elt mul(Elt x, Elt y) const = 0;
  virtual Elt ldiv(Elt x, Elt y) const = 0;  // unique z with x*z = y
  virtual Elt rdiv(Elt x, Elt y) const = 0;  // unique z with z*y = x
  virtual Elt inv(Elt x) const = 0;          // unique z with x*z = 0
};

// Inner mapping images; these generate the inner mapping group when x, y run
// over the whole loop.
Elt apply_Txy(const Loop& l, Elt x, Elt s);          // T_x = L_x^{-1} R_x
Elt apply_Lxy(const Loop& l, Elt x, Elt y, Elt s);   // L_{x,y} = L_x L_y L_{yx}^{-1}
Elt apply_Rxy(const Loop& l, Elt x, Elt y, Elt s);   // R_{x,y} = R_x R_y R_{xy}^{-1}

Elt associator(const Loop& l, Elt x, Elt y, Elt z);  // (x.yz)^{-1} (xy.z)
Elt commutator(const Loop& l, Elt x, Elt y);         // x^{-1}.y^{-1}.x.y, left-normed
Elt loop_pow(const Loop& l, Elt x, std::int64_t e);  // left-normed powers; e may be negative
Elt loop_order(const Loop& l, Elt x);

struct Perm {
  std::vector<Elt> im;

  static Perm identity(Elt n);
  Elt operator()(Elt x) const { return im[static_cast<std::size_t>(x)]; }
  Elt size() const { return static_cast<Elt>(im.size()); }
  bool operator==(const Perm& o) const { return im == o.im; }
};

Perm perm_compose(const Perm& p, const Perm& q);  // apply p, then q
Perm perm_inverse(const Perm& p);
bool perm_is_bijection(const Perm& p);

struct PsAutPair {
  Perm A;
  Elt a = 0;  // companion
};

enum class TransKind { L, R, P, T, Lxy, Rxy, Dxy };

enum class EvalOp { Mul, Ldiv, Rdiv, Inv };

class LoopTable final : public Loop {
 public:
  Elt size() const override { return n_; }
  Elt mul(Elt x, Elt y) const override { return t_[idx(x, y)]; }
  Elt ldiv(Elt x, Elt y) const override { return ld_[idx(x, y)]; }
  Elt rdiv(Elt x, Elt y) const override { return rd_[idx(y, x)]; }
  Elt inv(Elt x) const override { return inv_[check(x)]; }

  const std::vector<std::string>& names() const { return names_; }
  void set_names(std::vector<std::string> names);
  bool is_associative() const;
  bool is_commutative() const;

  friend LoopTable build_table(Elt n, const std::function<Elt(Elt, Elt)>& mul,
                               std::vector<std::string> names);

 private:
  std::size_t idx(Elt x, Elt y) const { return static_cast<std::size_t>(check(x)) * n_ + check(y); }
  Elt check(Elt x) const {
    if (x < 0 || x >= n_) fail(Err::IndexOutOfRange, "element " + std::to_string(x));
    return x;
  }

  Elt n_ = 0;
  std::vector<std::uint16_t> t_;    // row x, column y = x*y
  std::vector<std::uint16_t> ld_;   // ld_[x][y] = x \ y
  std::vector<std::uint16_t> rd_;   // rd_[y][x] = x / y
  std::vector<std::uint16_t> inv_;
  std::vector<std::string> names_;
};

// Validates the Latin-square and identity invariants; if the two-sided
// identity sits at some index e != 0 the table is relabeled to move it to 0.
LoopTable build_table(Elt n, const std::function<Elt(Elt, Elt)>& mul,
                      std::vector<std::string> names = {});

Elt loop_eval(const LoopTable& t, EvalOp op, Elt x, Elt y = 0);

Perm translation(const LoopTable& t, TransKind kind, Elt x, std::optional<Elt> y = std::nullopt);

enum class AcKind { Associator, Commutator };
Elt assoc_comm(const LoopTable& t, AcKind kind, Elt x, Elt y, std::optional<Elt> z = std::nullopt);

// All permutations T_x, L_{x,y}, R_{x,y}, deduplicated; together they generate
// the inner mapping group of a Moufang loop.
std::vector<Perm> inner_mappings(const LoopTable& t);

struct MoufangVerdict {
  bool pass = true;
  std::array<Elt, 3> witness{0, 0, 0};
  std::uint64_t checked = 0;
  bool exhaustive = false;
};

// Exhaustive over all n^3 triples when n <= threshold, otherwise `budget`
// seeded random triples. The witness is the first failing triple in
// lexicographic order for exhaustive scans.
MoufangVerdict is_moufang(const Loop& l, std::uint64_t budget = 1000000,
                          std::uint64_t seed = 12345, Elt threshold = 256);

std::vector<Elt> subloop_generate(const Loop& l, const std::vector<Elt>& gens);
bool is_subloop(const Loop& l, const std::vector<Elt>& s);

// Normal = invariant under every inner-mapping generator T_x, L_{x,y}, R_{x,y}
// with x, y running over the whole loop.
bool is_normal(const LoopTable& t, const std::vector<Elt>& s);

LoopTable quotient(const LoopTable& t, const std::vector<Elt>& s);

bool is_pseudoautomorphism(const LoopTable& t, const PsAutPair& p);
PsAutPair psaut_compose(const PsAutPair& p, const PsAutPair& q, const LoopTable& t);

// Outcome of a named identity suite. `checks` counts individual equalities
// evaluated; `detail` renders the first failure and is empty on success.
// Suites run exhaustively when the instance fits the budget and fall back to
// seeded sampling otherwise.
struct SuiteReport {
  bool pass = true;
  bool exhaustive = true;
  std::uint64_t checks = 0;
  std::string detail;
};

// Two-sided conjugation operators on a Moufang table: the four equivalent
// forms of m -> x^{-1}.(xy^{-1}.m)y agree, the operator equals L_x R_y
// L_{xy}^{-1}, R_{x,y} = L_{x^{-1},y^{-1}} = R_x L_y^{-1} R_x^{-1} L_y, and
// the one-sided cancellation laws m^{-1}(mx.y) = xm^{-1}.my = (x.ym^{-1})m.
// Budget counts (x,y,m) triples.
SuiteReport dxy_suite(const LoopTable& t, std::uint64_t budget = 200000,
                      std::uint64_t seed = 12345);

// Pseudoautomorphism certificates on a Moufang table: (T_x, x^{-3}) and
// (R_{x,y}, [[x,y]]) satisfy the defining law, and the two-sided operator
// pair factors as (L_{x,y^{-1}}, [[x^{-1},y]]) (T_y, y^{-3}) (L_{y,x},
// [[y^{-1},x^{-1}]]). Budget counts (x,y) pairs; each pair costs a full
// n^2 certificate check.
SuiteReport psaut_suite(const LoopTable& t, std::uint64_t budget = 64,
                        std::uint64_t seed = 12345);

struct IsoVerdict {
  bool yes = false;
  Perm bijection;  // maps t1 indices to t2 indices when yes
};

// Backtracking on generator images with invariant pruning; sound and complete
// while the work budget holds, Timeout error once it is exhausted.
IsoVerdict isomorphic(const LoopTable& t1, const LoopTable& t2,
                      std::uint64_t node_budget = 400000000);

LoopTable materialize(const Loop& l, Elt cap = 2000,
                      std::vector<std::string> names = {});

// Index packing (a, b) -> a*|B| + b, so the {0} x B fiber occupies indices
// 0..|B|-1.
LoopTable direct_product(const LoopTable& a, const LoopTable& b);

LoopTable cyclic_table(Elt n);

// Cayley-table file format "loop-table v1". The loader re-validates every
// invariant. Names containing commas are kept intact by splitting only at
// parenthesis depth zero.
void loop_save(const LoopTable& t, const std::string& path);
LoopTable loop_load(const std::string& path);

}  // namespace mfl
