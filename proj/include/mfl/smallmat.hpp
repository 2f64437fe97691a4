#pragma once

// Internal dense linear algebra over a Ring, sized for this project's needs:
// operator matrices up to 8x8 (27x27 for the negative tensor-module tests) and
// the short coefficient vectors they act on. Vectors are rows and act on the
// right, matching the global convention.

#include <cstdint>
#include <vector>

#include "mfl/error.hpp"
#include "mfl/ring.hpp"

namespace mfl {

using VecN = std::vector<RingElem>;

inline VecN vec_add(const Ring& r, const VecN& a, const VecN& b) {
  VecN out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = r.add(a[i], b[i]);
  return out;
}

inline VecN vec_neg(const Ring& r, const VecN& a) {
  VecN out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = r.neg(a[i]);
  return out;
}

inline VecN vec_scale(const Ring& r, RingElem c, const VecN& a) {
  VecN out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = r.mul(c, a[i]);
  return out;
}

inline bool vec_is_zero(const VecN& a) {
  for (auto x : a)
    if (x != 0) return false;
  return true;
}

class MatN {
 public:
  MatN() : n_(0) {}
  MatN(int n, RingElem fill = 0) : n_(n), e_(static_cast<std::size_t>(n) * n, fill) {}

  static MatN identity(int n) {
    MatN m(n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
  }

  int dim() const { return n_; }
  RingElem& at(int i, int j) { return e_[static_cast<std::size_t>(i) * n_ + j]; }
  RingElem at(int i, int j) const { return e_[static_cast<std::size_t>(i) * n_ + j]; }
  const std::vector<RingElem>& raw() const { return e_; }

  bool operator==(const MatN& o) const { return n_ == o.n_ && e_ == o.e_; }

 private:
  int n_;
  std::vector<RingElem> e_;
};

// a*b with the row-vector composition order: applying a then b is a*b.
MatN mat_mul(const Ring& r, const MatN& a, const MatN& b);
MatN mat_add(const Ring& r, const MatN& a, const MatN& b);
VecN vec_apply(const Ring& r, const VecN& v, const MatN& m);

// Gaussian inversion. Pivots must be units; that always succeeds over fields
// and is sufficient for every ring this project inverts over.
MatN mat_inverse(const Ring& r, const MatN& m);

MatN mat_transpose(const MatN& m);

// Row-echelon basis maintenance over a field: reduce v against basis, append
// if independent. Returns true when v enlarged the span.
class RowSpan {
 public:
  explicit RowSpan(const Ring& field) : r_(field) {}
  bool add(VecN v);
  bool contains(VecN v) const;
  int dim() const { return static_cast<int>(rows_.size()); }
  const std::vector<VecN>& rows() const { return rows_; }

 private:
  VecN reduce(VecN v) const;
  Ring r_;
  std::vector<VecN> rows_;  // kept in echelon form, pivots normalized to 1
  std::vector<int> pivots_;
};

}  // namespace mfl
