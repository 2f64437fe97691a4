#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mfl/loopcore.hpp"
#include "mfl/products.hpp"

namespace mfl {

// ---------------------------------------------------------------------------
// Short exact sequences 1 -> U -> E -> Q -> 1 with abelian kernel U.
// ---------------------------------------------------------------------------

struct Extension {
  std::shared_ptr<const Loop> e;           // the middle loop, always set
  std::shared_ptr<const LoopTable> table;  // set when E is materialized
  std::vector<Elt> kernel;                 // sorted element indices of U
  std::shared_ptr<const LoopTable> quot;   // the quotient loop E/U
  std::vector<Elt> project;                // element -> quotient index
  std::string description;
};

// Table path: verifies that the kernel contains the identity, is closed under
// products and inverses (KernelNotClosed), commutes and associates internally
// (KernelNotAbelian), and is invariant under every inner mapping
// (KernelNotNormal); then builds the coset quotient and projection, cosets
// ordered by their least element.
Extension extension_make(const LoopTable& t, const std::vector<Elt>& kernel,
                         std::string description = "");

// Construction path: when the construction carries a table, delegates to the
// table path on its kernel. Otherwise the kernel must be the fiber of the
// construction's built-in projection, which is a homomorphism by the shape of
// the product rule; the fiber match is checked exactly and the homomorphism,
// kernel group laws and normality are re-checked on `samples` seeded samples
// (exact instead when the kernel has at most 512 elements).
Extension extension_make(const Construction& c, std::uint64_t samples = 4000,
                         std::uint64_t seed = 12345);

// True iff E is nonassociative and not isomorphic to the direct product of U
// with E/U. Tables are decided by associativity prechecks, a center-size
// comparison and finally isomorphism search. Fiber-backed handles are decided
// through the central fixed space F = {u in U : every inner mapping fixes u}:
// the restrictions to the kernel fiber are linear and depend only on the
// quotient cosets of the conjugating elements, so F is computed exactly from
// transversal pairs; F = U forces the product rule to be literally
// componentwise (trivial), while |F| < |U| with a centerless quotient caps
// the center of E below |U|, which any direct product would exceed.
// Throws TooLargeToDecide when neither route applies.
bool is_nontrivial(const Extension& x, std::uint64_t budget = 200000,
                   std::uint64_t seed = 12345);

enum class MinimalMethod { Auto, Spinning, Enumeration };

struct MinimalVerdict {
  bool minimal = true;
  std::vector<Elt> witness;  // a proper nontrivial subgroup of U normal in E
  std::string method;        // "spinning" or "enumeration"
};

// Minimality = U contains no proper nontrivial subgroup that is normal in E.
// Elementary abelian kernels with linear inner action are decided by spinning
// every nonzero coordinate vector under the restricted inner mappings
// (irreducible iff every spin fills the module), certified by the same scan
// over the transposed matrices; other abelian kernels of at most 256 elements
// are decided by enumerating the whole subgroup lattice and testing each
// member for normality. Witnesses are re-verified: exactly against tables,
// by seeded sampling of inner mappings against large handles.
MinimalVerdict is_minimal(const Extension& x, MinimalMethod method = MinimalMethod::Auto,
                          std::uint64_t seed = 12345);

// Associators with two kernel arguments collapse: (x, u, w) = identity for
// x in E and u, w in U. Exhaustive when |E| |U|^2 fits the budget.
SuiteReport extension_associator_suite(const Extension& x, std::uint64_t budget = 200000,
                                       std::uint64_t seed = 12345);

// Runs extension_make / is_nontrivial / is_minimal over the built-in
// construction catalog, keeping instances with |E| <= bound and base fields
// among qs. One line per instance:
//   <construction> <|E|> <|U|> nontrivial=<y/n> minimal=<y/n> witness=<...>
// with witness "-" on minimal rows and the sorted subgroup otherwise; the
// report is byte-stable for a fixed seed.
std::string survey_small(Elt bound, const std::vector<long>& qs = {2, 3},
                         std::uint64_t seed = 12345);

}  // namespace mfl
