#include "mfl/products.hpp"

#include <algorithm>
#include <set>

#include "mfl/triality.hpp"

namespace mfl {

namespace {

// Right-action operator of the first product component on the row-pair module:
// (det h) g h^{-2} g^{-1}.
Mat2 gd_first_op(const Ring& r, const Mat2& g, const Mat2& h) {
  Mat2 hi = mat_inv(r, h);
  Mat2 gihi2 = mat_mul(r, mat_mul(r, g, mat_mul(r, hi, hi)), mat_inv(r, g));
  return mat_scale(r, mat_det(r, h), gihi2);
}

// Right-action operator of the second component: [h^{-1}, g^{-1}].
Mat2 gd_second_op(const Ring& r, const Mat2& g, const Mat2& h) {
  return commutator_mat(r, mat_inv(r, h), mat_inv(r, g));
}

}  // namespace

GdPair gd_product(const Ring& r, const GdPair& p, const GdPair& q) {
  if (!r.is_unit(mat_det(r, p.g)) || !r.is_unit(mat_det(r, q.g)))
    fail(Err::SingularMatrix, "split pair components must be invertible");
  GdPair out;
  out.g = mat_mul(r, p.g, q.g);
  out.u = vec2_add(r, vec_act(r, p.u, gd_first_op(r, p.g, q.g)),
                   vec_act(r, q.u, gd_second_op(r, p.g, q.g)));
  return out;
}

GdPair gd_inverse(const Ring& r, const GdPair& p) {
  RingElem det = mat_det(r, p.g);
  if (!r.is_unit(det)) fail(Err::SingularMatrix, "split pair component must be invertible");
  GdPair out;
  out.g = mat_inv(r, p.g);
  Mat2 op = mat_scale(r, r.inv(det), mat_mul(r, p.g, p.g));
  out.u = vec2_neg(r, vec_act(r, p.u, op));
  return out;
}

namespace {

Elt vcode(const Ring& r, const Vec2& u) {
  return static_cast<Elt>(u[0]) * static_cast<Elt>(r.order()) + static_cast<Elt>(u[1]);
}

Vec2 vdecode(const Ring& r, Elt code) {
  std::uint32_t q = r.order();
  return Vec2{static_cast<RingElem>(code / q), static_cast<RingElem>(code % q)};
}

std::string gd_name(const Ring& r, const Mat2& g, const Vec2& u) {
  return "(" + mat2_format(g) + ",(" + r.to_string(u[0]) + "," + r.to_string(u[1]) + "))";
}

// Deterministic pair table over an explicit matrix list (identity first):
// index = group index * |R|^2 + row-pair code.
LoopTable gd_table_over(const Ring& r, const std::vector<Mat2>& mats) {
  Elt q2 = static_cast<Elt>(r.order()) * static_cast<Elt>(r.order());
  std::map<Mat2, Elt> where;
  for (std::size_t i = 0; i < mats.size(); ++i) where.emplace(mats[i], static_cast<Elt>(i));
  Elt n = static_cast<Elt>(mats.size()) * q2;
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(n));
  for (const Mat2& g : mats)
    for (Elt c = 0; c < q2; ++c) names.push_back(gd_name(r, g, vdecode(r, c)));
  return build_table(
      n,
      [&](Elt x, Elt y) {
        GdPair p{mats[static_cast<std::size_t>(x / q2)], vdecode(r, x % q2)};
        GdPair s{mats[static_cast<std::size_t>(y / q2)], vdecode(r, y % q2)};
        GdPair prod = gd_product(r, p, s);
        auto it = where.find(prod.g);
        if (it == where.end()) fail(Err::NotAGroup, "matrix list is not closed under products");
        return it->second * q2 + vcode(r, prod.u);
      },
      std::move(names));
}

}  // namespace

Elt GdLoop::index_of(const GdPair& p) const {
  Elt q2 = static_cast<Elt>(ring.order()) * static_cast<Elt>(ring.order());
  for (std::size_t i = 0; i < group.size(); ++i)
    if (group[i] == p.g) return static_cast<Elt>(i) * q2 + vcode(ring, p.u);
  fail(Err::IndexOutOfRange, "matrix " + mat2_format(p.g) + " is not in the group");
}

GdPair GdLoop::pair_of(Elt x) const {
  Elt q2 = static_cast<Elt>(ring.order()) * static_cast<Elt>(ring.order());
  if (x < 0 || x >= table.size()) fail(Err::IndexOutOfRange, "element " + std::to_string(x));
  return GdPair{group[static_cast<std::size_t>(x / q2)], vdecode(ring, x % q2)};
}

GdLoop gd_loop(const Ring& r, const std::vector<Mat2>& generators, Elt cap) {
  std::vector<Mat2> gens = generators;
  if (gens.empty()) gens = gl2_enumerate(r);
  for (const Mat2& g : gens)
    if (!r.is_unit(mat_det(r, g)))
      fail(Err::NotAGroup, "generator " + mat2_format(g) + " is not invertible");

  // Closure under products; inverses exist automatically in a finite closure.
  std::vector<Mat2> closure{Mat2::identity()};
  std::set<Mat2> seen{Mat2::identity()};
  for (std::size_t i = 0; i < closure.size(); ++i)
    for (const Mat2& g : gens) {
      Mat2 p = mat_mul(r, closure[i], g);
      if (seen.insert(p).second) closure.push_back(p);
      if (static_cast<Elt>(seen.size()) * static_cast<Elt>(r.order()) *
              static_cast<Elt>(r.order()) >
          cap)
        fail(Err::TooLarge, "group closure exceeds the table cap");
    }
  std::sort(closure.begin() + 1, closure.end());

  GdLoop out{r, closure, LoopTable{}, {}, LoopTable{}};
  out.table = gd_table_over(r, closure);

  // Scalar matrices in the closure form a central subloop at the zero vector.
  Elt q2 = static_cast<Elt>(r.order()) * static_cast<Elt>(r.order());
  for (std::size_t i = 0; i < closure.size(); ++i)
    if (mat_is_scalar(closure[i])) out.scalar_subloop.push_back(static_cast<Elt>(i) * q2);

  // Quotient on scalar cosets: both product operators are constant on them,
  // so the same formula applies to least coset representatives.
  std::vector<RingElem> units;
  for (const Elt idx : out.scalar_subloop)
    units.push_back(closure[static_cast<std::size_t>(idx / q2)].e[0]);
  auto fold = [&](const Mat2& g) {
    Mat2 best = g;
    for (RingElem c : units) best = std::min(best, mat_scale(r, c, g));
    return best;
  };
  std::set<Mat2> reps_set;
  for (const Mat2& g : closure) reps_set.insert(fold(g));
  std::vector<Mat2> reps{Mat2::identity()};
  for (const Mat2& g : reps_set)
    if (!(g == Mat2::identity())) reps.push_back(g);
  std::map<Mat2, Elt> rep_where;
  for (std::size_t i = 0; i < reps.size(); ++i) rep_where.emplace(reps[i], static_cast<Elt>(i));
  std::vector<std::string> qnames;
  for (const Mat2& g : reps)
    for (Elt c = 0; c < q2; ++c) qnames.push_back(gd_name(r, g, vdecode(r, c)));
  out.quotient = build_table(
      static_cast<Elt>(reps.size()) * q2,
      [&](Elt x, Elt y) {
        GdPair p{reps[static_cast<std::size_t>(x / q2)], vdecode(r, x % q2)};
        GdPair s{reps[static_cast<std::size_t>(y / q2)], vdecode(r, y % q2)};
        GdPair prod = gd_product(r, p, s);
        return rep_where.at(fold(prod.g)) * q2 + vcode(r, prod.u);
      },
      std::move(qnames));
  return out;
}

ZornElem parabolic_image(const Ring& r, const GdPair& p) {
  if (!r.is_unit(mat_det(r, p.g)))
    fail(Err::SingularMatrix, "split pair component must be invertible");
  Vec2 rr = vec_act(r, p.u, p.g);
  return zorn_make(r, p.g.e[0], {0, p.g.e[1], rr[0]}, {rr[1], p.g.e[2], 0}, p.g.e[3]);
}

// ---------------------------------------------------------------------------
// Module coordinate frame
// ---------------------------------------------------------------------------

USpace::USpace(Ring ring, std::vector<VecN> basis, std::vector<VecN> modline)
    : ring_(std::move(ring)), basis_(std::move(basis)), modline_(std::move(modline)) {
  if (!ring_.is_field()) fail(Err::BadDescriptor, "module coordinates require a field");
  std::size_t width = basis_.empty() ? (modline_.empty() ? 0 : modline_[0].size())
                                     : basis_[0].size();
  auto add_row = [&](const VecN& v, std::size_t input_index, const char* what) {
    if (v.size() != width) fail(Err::OperatorDomainMismatch, "module rows have mixed lengths");
    VecN row = v;
    VecN tf(basis_.size() + modline_.size(), 0);
    tf[input_index] = 1;
    for (std::size_t i = 0; i < solver_rows_.size(); ++i) {
      RingElem c = row[static_cast<std::size_t>(solver_pivots_[i])];
      if (c == 0) continue;
      for (std::size_t j = 0; j < width; ++j)
        row[j] = ring_.sub(row[j], ring_.mul(c, solver_rows_[i][j]));
      for (std::size_t j = 0; j < tf.size(); ++j)
        tf[j] = ring_.sub(tf[j], ring_.mul(c, solver_tf_[i][j]));
    }
    int pivot = -1;
    for (std::size_t j = 0; j < width; ++j)
      if (row[j] != 0) {
        pivot = static_cast<int>(j);
        break;
      }
    if (pivot < 0) fail(Err::IllDefined, std::string(what) + " rows are linearly dependent");
    RingElem inv = ring_.inv(row[static_cast<std::size_t>(pivot)]);
    for (auto& x : row) x = ring_.mul(inv, x);
    for (auto& x : tf) x = ring_.mul(inv, x);
    // Keep pivots ascending so coordinate extraction is forward substitution.
    std::size_t at = 0;
    while (at < solver_rows_.size() && solver_pivots_[at] < pivot) ++at;
    if (at < solver_pivots_.size() && solver_pivots_[at] == pivot)
      fail(Err::IllDefined, "echelon invariant violated");
    solver_rows_.insert(solver_rows_.begin() + static_cast<std::ptrdiff_t>(at), row);
    solver_tf_.insert(solver_tf_.begin() + static_cast<std::ptrdiff_t>(at), tf);
    solver_pivots_.insert(solver_pivots_.begin() + static_cast<std::ptrdiff_t>(at), pivot);
  };
  for (std::size_t i = 0; i < basis_.size(); ++i) add_row(basis_[i], i, "module basis");
  for (std::size_t i = 0; i < modline_.size(); ++i)
    add_row(modline_[i], basis_.size() + i, "mod-out line");
}

std::uint64_t USpace::size() const {
  std::uint64_t s = 1;
  for (int i = 0; i < dim(); ++i) s *= ring_.order();
  return s;
}

VecN USpace::to_ambient(const VecN& coords) const {
  if (coords.size() != basis_.size())
    fail(Err::OperatorDomainMismatch, "coordinate vector has the wrong length");
  VecN out(basis_.empty() ? 0 : basis_[0].size(), 0);
  for (std::size_t i = 0; i < basis_.size(); ++i)
    out = vec_add(ring_, out, vec_scale(ring_, coords[i], basis_[i]));
  return out;
}

std::optional<VecN> USpace::coords_of(const VecN& ambient) const {
  VecN residual = ambient;
  VecN combo(basis_.size() + modline_.size(), 0);
  for (std::size_t i = 0; i < solver_rows_.size(); ++i) {
    RingElem c = residual[static_cast<std::size_t>(solver_pivots_[i])];
    if (c == 0) continue;
    for (std::size_t j = 0; j < residual.size(); ++j)
      residual[j] = ring_.sub(residual[j], ring_.mul(c, solver_rows_[i][j]));
    for (std::size_t j = 0; j < combo.size(); ++j)
      combo[j] = ring_.add(combo[j], ring_.mul(c, solver_tf_[i][j]));
  }
  if (!vec_is_zero(residual)) return std::nullopt;
  return VecN(combo.begin(), combo.begin() + static_cast<std::ptrdiff_t>(basis_.size()));
}

bool USpace::contains(const VecN& ambient) const { return coords_of(ambient).has_value(); }

USpace uspace_standard(const Ring& r, UModule kind) {
  switch (kind) {
    case UModule::Perp: {
      PerpBasis pb = one_perp(r);
      return USpace(r, pb.basis);
    }
    case UModule::Perp6: {
      if (r.characteristic() != 2)
        fail(Err::BadDescriptor, "the 6-dimensional quotient module needs characteristic 2");
      PerpBasis pb = one_perp(r);
      return USpace(r, pb.quotient, pb.line);
    }
    case UModule::Full: {
      std::vector<VecN> basis;
      for (int i = 0; i < 8; ++i) {
        VecN e(8, 0);
        e[static_cast<std::size_t>(i)] = 1;
        basis.push_back(e);
      }
      return USpace(r, basis);
    }
  }
  fail(Err::BadDescriptor, "unknown module kind");
}

InvarianceVerdict sd_invariance_check(const Ring& r, const std::vector<ZornElem>& gens,
                                      const USpace& u) {
  InvarianceVerdict v;
  auto image_ok = [&](const LinOp8& op, const std::string& label) {
    for (const VecN& b : u.basis()) {
      VecN img = vec_apply(r, b, op);
      if (!u.contains(img)) {
        v.pass = false;
        v.detail = label + " maps a module basis vector outside the module";
        return false;
      }
    }
    for (const VecN& l : u.modline()) {
      VecN img = vec_apply(r, l, op);
      // The mod-out line must be preserved on its own, not just inside U.
      USpace line_only(r, u.modline());
      if (!line_only.contains(img)) {
        v.pass = false;
        v.detail = label + " does not preserve the mod-out line";
        return false;
      }
    }
    return true;
  };
  for (const ZornElem& m : gens) {
    if (!zorn_is_invertible(m)) fail(Err::NotInvertible, "generator " + zorn_format(m));
    if (!image_ok(zorn_operator(ZOpKind::T, m), "conjugation by " + zorn_format(m))) return v;
  }
  for (const ZornElem& n : gens)
    for (const ZornElem& m : gens)
      if (!image_ok(zorn_operator(ZOpKind::Lxy, n, m),
                    "left pair operator at (" + zorn_format(n) + ", " + zorn_format(m) + ")"))
        return v;
  return v;
}

// ---------------------------------------------------------------------------
// Semidirect pair loop
// ---------------------------------------------------------------------------

SdLoop::SdLoop(ZornSetLoop base, USpace u, std::size_t cache_cap)
    : base_(std::move(base)), u_(std::move(u)), usize_(u_.size()), cache_cap_(cache_cap) {
  if (!base_.ring().same(u_.ring())) fail(Err::RingMismatch, "base and module rings differ");
  if (static_cast<std::uint64_t>(base_.size()) > (1ULL << 20))
    fail(Err::TooLarge, "base loop too large for pair indexing");
  unsigned __int128 total = static_cast<unsigned __int128>(base_.size()) * usize_;
  if (total > (static_cast<unsigned __int128>(1) << 62))
    fail(Err::TooLarge, "pair loop order overflows the element index");
  if (cache_cap_ == 0) cache_cap_ = 1;
}

Elt SdLoop::size() const { return base_.size() * static_cast<Elt>(usize_); }

SdPair SdLoop::pair_of(Elt x) const {
  if (x < 0 || x >= size()) fail(Err::IndexOutOfRange, "element " + std::to_string(x));
  SdPair p;
  p.m = x / static_cast<Elt>(usize_);
  std::uint64_t code = static_cast<std::uint64_t>(x) % usize_;
  std::uint32_t q = u_.ring().order();
  p.u.assign(static_cast<std::size_t>(u_.dim()), 0);
  for (int i = 0; i < u_.dim(); ++i) {
    p.u[static_cast<std::size_t>(i)] = static_cast<RingElem>(code % q);
    code /= q;
  }
  return p;
}

Elt SdLoop::index_of(const SdPair& p) const {
  if (p.m < 0 || p.m >= base_.size()) fail(Err::IndexOutOfRange, "base element " + std::to_string(p.m));
  if (p.u.size() != static_cast<std::size_t>(u_.dim()))
    fail(Err::OperatorDomainMismatch, "coordinate vector has the wrong length");
  std::uint64_t code = 0;
  std::uint32_t q = u_.ring().order();
  for (int i = u_.dim() - 1; i >= 0; --i) {
    RingElem c = p.u[static_cast<std::size_t>(i)];
    if (c >= q) fail(Err::ElementOutOfRing, "coordinate value " + std::to_string(c));
    code = code * q + c;
  }
  return p.m * static_cast<Elt>(usize_) + static_cast<Elt>(code);
}

MatN SdLoop::project(const LinOp8& op) const {
  const Ring& r = u_.ring();
  for (const VecN& l : u_.modline()) {
    USpace line_only(r, u_.modline());
    if (!line_only.contains(vec_apply(r, l, op)))
      fail(Err::InvarianceNotEstablished, "operator does not preserve the mod-out line");
  }
  MatN out(u_.dim());
  for (int i = 0; i < u_.dim(); ++i) {
    auto coords = u_.coords_of(vec_apply(r, u_.basis()[static_cast<std::size_t>(i)], op));
    if (!coords) fail(Err::InvarianceNotEstablished, "operator image leaves the module");
    for (int j = 0; j < u_.dim(); ++j) out.at(i, j) = (*coords)[static_cast<std::size_t>(j)];
  }
  return out;
}

MatN SdLoop::op_matrix(ZOpKind kind, Elt m, Elt n) const {
  std::uint64_t key = (static_cast<std::uint64_t>(kind) << 42) |
                      (static_cast<std::uint64_t>(m) << 21) | static_cast<std::uint64_t>(n);
  {
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto it = cache_->map.find(key);
    if (it != cache_->map.end()) {
      cache_->order.splice(cache_->order.begin(), cache_->order, it->second.where);
      return it->second.mat;
    }
  }
  std::optional<ZornElem> second;
  if (kind == ZOpKind::Lxy || kind == ZOpKind::Dxy) second = base_.elem(n);
  MatN mat = project(zorn_operator(kind, base_.elem(m), second));
  std::lock_guard<std::mutex> lock(cache_->mu);
  auto it = cache_->map.find(key);
  if (it != cache_->map.end()) return it->second.mat;
  cache_->order.push_front(key);
  cache_->map.emplace(key, CacheEntry{mat, cache_->order.begin()});
  while (cache_->map.size() > cache_cap_) {
    cache_->map.erase(cache_->order.back());
    cache_->order.pop_back();
  }
  return mat;
}

SdPair SdLoop::product(const SdPair& p, const SdPair& q) const {
  const Ring& r = u_.ring();
  SdPair out;
  out.m = base_.mul(p.m, q.m);
  VecN a = vec_apply(r, p.u, op_matrix(ZOpKind::Dxy, p.m, q.m));
  VecN b = vec_apply(r, q.u, op_matrix(ZOpKind::Lxy, q.m, p.m));
  out.u = vec_add(r, a, b);
  return out;
}

SdPair SdLoop::inverse(const SdPair& p) const {
  const Ring& r = u_.ring();
  SdPair out;
  out.m = base_.inv(p.m);
  // T_m^{-1} equals the conjugation operator of the inverse element.
  out.u = vec_neg(r, vec_apply(r, p.u, op_matrix(ZOpKind::T, out.m)));
  return out;
}

Elt SdLoop::mul(Elt x, Elt y) const { return index_of(product(pair_of(x), pair_of(y))); }

Elt SdLoop::inv(Elt x) const { return index_of(inverse(pair_of(x))); }

std::string SdLoop::name_of(Elt x) const {
  SdPair p = pair_of(x);
  const Ring& r = u_.ring();
  std::string s = "sd(" + zorn_format(base_.elem(p.m)) + "|";
  for (std::size_t i = 0; i < p.u.size(); ++i) s += (i ? "," : "") + r.to_string(p.u[i]);
  return s + ")";
}

namespace {

// Small deterministic generating set plus a fixed prefix, used to exercise the
// invariance precondition without scanning every pair of a large base.
std::vector<ZornElem> base_generator_sample(const ZornSetLoop& base) {
  std::vector<ZornElem> out;
  Elt n = base.size();
  if (n <= 150) {
    for (Elt i = 0; i < n; ++i) out.push_back(base.elem(i));
    return out;
  }
  std::vector<Elt> gens;
  std::vector<Elt> closure{0};
  std::set<Elt> seen{0};
  for (Elt cand = 1; cand < n && static_cast<Elt>(seen.size()) < n; ++cand) {
    if (seen.count(cand)) continue;
    gens.push_back(cand);
    for (std::size_t i = 0; i < closure.size(); ++i)
      for (Elt g : gens) {
        Elt p = base.mul(closure[i], g);
        if (seen.insert(p).second) closure.push_back(p);
        p = base.mul(g, closure[i]);
        if (seen.insert(p).second) closure.push_back(p);
      }
  }
  for (Elt g : gens) out.push_back(base.elem(g));
  for (Elt i = 0; i < std::min<Elt>(n, 12); ++i) out.push_back(base.elem(i));
  return out;
}

}  // namespace

SdLoop sd_loop(const ZornSetLoop& base, const USpace& u, std::size_t cache_cap) {
  InvarianceVerdict v = sd_invariance_check(base.ring(), base_generator_sample(base), u);
  if (!v.pass) fail(Err::InvarianceNotEstablished, v.detail);
  return SdLoop(base, u, cache_cap);
}

SdLoop sd_quotient_scalars(const SdLoop& l, std::size_t cache_cap) {
  std::vector<ZornElem> elems;
  for (Elt i = 0; i < l.base().size(); ++i) elems.push_back(l.base().elem(i));
  ZornSetLoop folded(l.base().ring(), std::move(elems), ZornSetLoop::Fold::ScalarOrbit);
  return SdLoop(std::move(folded), l.uspace(), cache_cap);
}

SdLoop sd_quotient_module(const SdLoop& l, const std::vector<VecN>& invariant_rows,
                          std::size_t cache_cap) {
  const Ring& r = l.uspace().ring();
  const USpace& u = l.uspace();
  // The new mod-out subspace is the old line together with the given rows.
  std::vector<VecN> line = u.modline();
  for (const VecN& row : invariant_rows) {
    if (!u.contains(row))
      fail(Err::InvarianceNotEstablished, "quotient row does not lie in the module");
    line.push_back(row);
  }
  // Remaining coordinates: basis vectors independent from the enlarged line.
  RowSpan span(r);
  for (const VecN& row : line) span.add(row);
  std::vector<VecN> basis;
  for (const VecN& b : u.basis())
    if (span.add(b)) basis.push_back(b);
  USpace quo(r, basis, line);
  // Invariance of the enlarged line under the generator sample.
  for (const ZornElem& m : base_generator_sample(l.base())) {
    LinOp8 t = zorn_operator(ZOpKind::T, m);
    USpace line_only(r, line);
    for (const VecN& row : invariant_rows)
      if (!line_only.contains(vec_apply(r, row, t)))
        fail(Err::InvarianceNotEstablished, "quotient rows are not operator-invariant");
  }
  return SdLoop(l.base(), quo, cache_cap);
}

// ---------------------------------------------------------------------------
// Catalog and descriptor dispatch
// ---------------------------------------------------------------------------

namespace {

long param_of(const std::map<std::string, long>& params, const std::string& key) {
  auto it = params.find(key);
  if (it == params.end()) fail(Err::BadDescriptor, "missing parameter " + key);
  return it->second;
}

Ring field_of_order(long q) {
  if (q < 2 || q > 512) fail(Err::OutOfCatalog, "field order " + std::to_string(q));
  return Ring::parse("F" + std::to_string(q));
}

Construction from_sd(SdLoop&& sd, std::string description, Elt table_cap) {
  Construction out;
  out.description = std::move(description);
  auto loop = std::make_shared<SdLoop>(std::move(sd));
  out.loop = loop;
  std::uint64_t usize = loop->uspace().size();
  for (std::uint64_t c = 0; c < usize; ++c) out.kernel.push_back(static_cast<Elt>(c));
  if (loop->base().size() <= 2048 && loop->size() <= (Elt{1} << 24)) {
    out.fiber_quotient = std::make_shared<LoopTable>(
        materialize(loop->base(), loop->base().size(), loop->base().names()));
    out.fiber_project.resize(static_cast<std::size_t>(loop->size()));
    for (Elt x = 0; x < loop->size(); ++x)
      out.fiber_project[static_cast<std::size_t>(x)] = x / static_cast<Elt>(usize);
  }
  if (loop->size() <= table_cap) {
    std::vector<std::string> names;
    for (Elt x = 0; x < loop->size(); ++x) names.push_back(loop->name_of(x));
    out.names = names;
    out.table = std::make_shared<LoopTable>(materialize(*loop, table_cap, std::move(names)));
  }
  return out;
}

Construction from_gd(GdLoop&& gd, std::string description, bool use_quotient) {
  Construction out;
  out.description = std::move(description);
  const Ring& r = gd.ring;
  Elt q2 = static_cast<Elt>(r.order()) * static_cast<Elt>(r.order());
  const LoopTable& t = use_quotient ? gd.quotient : gd.table;
  auto table = std::make_shared<LoopTable>(t);
  out.table = table;
  out.loop = table;
  out.names = table->names();
  for (Elt c = 0; c < q2; ++c) out.kernel.push_back(c);
  Elt groups = table->size() / q2;
  out.fiber_quotient = std::make_shared<LoopTable>(build_table(groups, [&](Elt x, Elt y) {
    return table->mul(x * q2, y * q2) / q2;
  }));
  out.fiber_project.resize(static_cast<std::size_t>(table->size()));
  for (Elt x = 0; x < table->size(); ++x)
    out.fiber_project[static_cast<std::size_t>(x)] = x / q2;
  return out;
}

std::vector<Mat2> sl2_matrices(const Ring& r) {
  std::vector<Mat2> out;
  for (const Mat2& g : gl2_enumerate(r))
    if (mat_det(r, g) == 1) out.push_back(g);
  return out;
}

// Search for an order-120 subloop of the order-1080 simple loop isomorphic to
// the order-120 simple loop, by seeded random generator triples.
std::vector<ZornElem> find_m2_copy(const ZornSetLoop& big, const LoopTable& m2, std::uint64_t seed) {
  Rng rng(seed);
  Elt n = big.size();
  for (int tries = 0; tries < 20000; ++tries) {
    std::vector<Elt> gens = {static_cast<Elt>(rng.below(static_cast<std::uint64_t>(n))),
                             static_cast<Elt>(rng.below(static_cast<std::uint64_t>(n))),
                             static_cast<Elt>(rng.below(static_cast<std::uint64_t>(n)))};
    std::vector<Elt> sub = subloop_generate(big, gens);
    if (static_cast<Elt>(sub.size()) != m2.size()) continue;
    std::map<Elt, Elt> where;
    for (std::size_t i = 0; i < sub.size(); ++i) where.emplace(sub[i], static_cast<Elt>(i));
    LoopTable st = build_table(static_cast<Elt>(sub.size()), [&](Elt x, Elt y) {
      return where.at(big.mul(sub[static_cast<std::size_t>(x)], sub[static_cast<std::size_t>(y)]));
    });
    if (!isomorphic(st, m2).yes) continue;
    std::vector<ZornElem> out;
    for (Elt idx : sub) out.push_back(big.elem(idx));
    return out;
  }
  fail(Err::OutOfCatalog, "no order-120 simple subloop found within the search budget");
}

}  // namespace

Construction catalog(const std::string& name, const std::map<std::string, long>& params,
                     Elt table_cap) {
  if (name == "psl2-semidirect") {
    long q = param_of(params, "q");
    if (q < 4) fail(Err::OutOfCatalog, "psl2-semidirect needs q >= 4");
    if (q > 5) fail(Err::TooLarge, "psl2-semidirect table exceeds desk scale for q > 5");
    Ring r = field_of_order(q);
    GdLoop gd = gd_loop(r, sl2_matrices(r), table_cap);
    return from_gd(std::move(gd), "catalog:psl2-semidirect,q=" + std::to_string(q), true);
  }
  if (name == "paige-semidirect") {
    long q = param_of(params, "q");
    Ring r = field_of_order(q);
    if (q > 3) fail(Err::TooLarge, "paige-semidirect base exceeds desk scale for q > 3");
    UModule kind = r.characteristic() == 2 ? UModule::Perp6 : UModule::Perp;
    SdLoop sd = sd_loop(psl_set_loop(r), uspace_standard(r, kind));
    return from_sd(std::move(sd), "catalog:paige-semidirect,q=" + std::to_string(q), table_cap);
  }
  if (name == "m2-over-p") {
    long p = param_of(params, "p");
    if (p != 3) fail(Err::OutOfCatalog, "m2-over-p is provided for p = 3 only");
    Ring r = field_of_order(p);
    LoopTable m2 = psl_loop(Ring::fp(2));
    std::vector<ZornElem> copy = find_m2_copy(psl_set_loop(r), m2, 20240311);
    ZornSetLoop base(r, std::move(copy), ZornSetLoop::Fold::ScalarOrbit);
    SdLoop sd = sd_loop(base, uspace_standard(r, UModule::Perp));
    return from_sd(std::move(sd), "catalog:m2-over-p,p=" + std::to_string(p), table_cap);
  }
  fail(Err::OutOfCatalog, "unknown catalog name " + name);
}

namespace {

std::map<std::string, long> parse_params(const std::string& text) {
  std::map<std::string, long> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    std::string item = text.substr(pos, comma - pos);
    std::size_t eq = item.find('=');
    if (eq == std::string::npos) fail(Err::BadDescriptor, "parameter " + item + " needs k=v form");
    try {
      out[item.substr(0, eq)] = std::stol(item.substr(eq + 1));
    } catch (const std::exception&) {
      fail(Err::BadDescriptor, "parameter value in " + item + " is not an integer");
    }
    pos = comma + 1;
  }
  return out;
}

Construction from_table(LoopTable table, std::string description) {
  Construction out;
  out.description = std::move(description);
  out.names = table.names();
  auto t = std::make_shared<LoopTable>(std::move(table));
  out.table = t;
  out.loop = t;
  return out;
}

Construction from_wreath(const WreathTriality& g, std::string description, Elt table_cap) {
  LoopTable t = loop_materialize(g, table_cap);
  Construction out = from_table(std::move(t), std::move(description));
  // Kernel: derived elements with the identity coordinate triple (module part
  // only); the projection onto the coordinate triple's middle entry is the
  // quotient onto the base group.
  if (g.has_module()) {
    const auto& elems = moufang_elements(g);
    for (std::size_t i = 0; i < elems.size(); ++i)
      if (elems[i].t == std::array<Elt, 3>{0, 0, 0}) out.kernel.push_back(static_cast<Elt>(i));
    out.fiber_quotient = std::make_shared<LoopTable>(g.base());
    out.fiber_project.resize(elems.size());
    for (std::size_t i = 0; i < elems.size(); ++i)
      out.fiber_project[i] = elems[i].t[1];
  }
  return out;
}

}  // namespace

Construction construction_parse(const std::string& descriptor, Elt table_cap,
                                std::size_t cache_cap) {
  std::size_t colon = descriptor.find(':');
  if (colon == std::string::npos)
    fail(Err::BadDescriptor, "descriptor needs the form kind:arguments");
  std::string kind = descriptor.substr(0, colon);
  std::string rest = descriptor.substr(colon + 1);

  if (kind == "paige") {
    auto params = parse_params(rest);
    long q = param_of(params, "q");
    Ring r = field_of_order(q);
    ZornSetLoop lazy = psl_set_loop(r);
    if (lazy.size() <= table_cap) return from_table(psl_loop(r, table_cap), descriptor);
    Construction out;
    out.description = descriptor;
    out.names = lazy.names();
    out.loop = std::make_shared<ZornSetLoop>(std::move(lazy));
    return out;
  }
  if (kind == "gd") {
    std::size_t pos = 0;
    Ring r = Ring::parse_prefix(rest, pos);
    if (pos >= rest.size() || rest[pos] != ',')
      fail(Err::BadDescriptor, "gd descriptor needs a generator list after the ring");
    std::string gensrc = rest.substr(pos + 1);
    std::vector<Mat2> gens;
    if (gensrc != "all") {
      std::size_t at = 0;
      while (at < gensrc.size()) {
        std::size_t plus = gensrc.find('+', at);
        if (plus == std::string::npos) plus = gensrc.size();
        gens.push_back(mat2_parse(r, gensrc.substr(at, plus - at)));
        at = plus + 1;
      }
      if (gens.empty()) fail(Err::BadDescriptor, "empty generator list");
    }
    GdLoop gd = gd_loop(r, gens, table_cap);
    return from_gd(std::move(gd), descriptor, false);
  }
  if (kind == "sd") {
    std::size_t comma = rest.find(',');
    if (comma == std::string::npos) fail(Err::BadDescriptor, "sd descriptor needs base,ring,module");
    std::string base_name = rest.substr(0, comma);
    std::size_t pos = comma + 1;
    Ring r = Ring::parse_prefix(rest, pos);
    if (pos >= rest.size() || rest[pos] != ',')
      fail(Err::BadDescriptor, "sd descriptor needs a module after the ring");
    std::string module_name = rest.substr(pos + 1);
    UModule kindsel;
    if (module_name == "perp")
      kindsel = UModule::Perp;
    else if (module_name == "perp6")
      kindsel = UModule::Perp6;
    else if (module_name == "full")
      kindsel = UModule::Full;
    else
      fail(Err::BadDescriptor, "unknown module " + module_name);
    ZornSetLoop base = base_name == "sl"          ? sl_loop(r)
                       : base_name == "psl"       ? psl_set_loop(r)
                       : base_name == "parabolic" ? parabolic_subloop(r)
                                                  : (fail(Err::BadDescriptor,
                                                          "unknown base " + base_name),
                                                     sl_loop(r));
    SdLoop sd = sd_loop(base, uspace_standard(r, kindsel), cache_cap);
    return from_sd(std::move(sd), descriptor, table_cap);
  }
  if (kind == "catalog") {
    std::size_t comma = rest.find(',');
    std::string name = comma == std::string::npos ? rest : rest.substr(0, comma);
    auto params = comma == std::string::npos ? std::map<std::string, long>{}
                                             : parse_params(rest.substr(comma + 1));
    return catalog(name, params, table_cap);
  }
  if (kind == "wreath") {
    LoopTable base = loop_load(rest);
    WreathTriality g = wreath_make(std::move(base));
    return from_wreath(g, descriptor, table_cap);
  }
  if (kind == "wreathmod") {
    std::size_t pos = 0;
    Ring r = Ring::parse_prefix(rest, pos);
    if (pos >= rest.size() || rest[pos] != ',')
      fail(Err::BadDescriptor, "wreathmod descriptor needs a rank after the ring");
    std::string ranksrc = rest.substr(pos + 1);
    std::size_t comma = ranksrc.find(',');
    std::string tail;
    if (comma != std::string::npos) {
      tail = ranksrc.substr(comma + 1);
      ranksrc = ranksrc.substr(0, comma);
    }
    if (!tail.empty() && tail != "all") fail(Err::BadDescriptor, "unknown option " + tail);
    int rank = 0;
    try {
      rank = std::stoi(ranksrc);
    } catch (const std::exception&) {
      fail(Err::BadDescriptor, "rank " + ranksrc + " is not an integer");
    }
    std::vector<MatN> gens;
    if (rank == 1) {
      for (std::uint32_t c = 1; c < r.order(); ++c)
        if (r.is_unit(static_cast<RingElem>(c))) {
          MatN m(1);
          m.at(0, 0) = static_cast<RingElem>(c);
          gens.push_back(m);
        }
    } else if (rank == 2) {
      for (const Mat2& m : gl2_enumerate(r)) gens.push_back(matn_from_mat2(m));
    }
    // Other ranks pass an empty generator list; the constructor rejects the
    // shape itself where the symmetry law cannot hold.
    WreathTriality g = wreath_module_make(r, rank, gens);
    return from_wreath(g, descriptor, table_cap);
  }
  fail(Err::BadDescriptor, "unknown construction kind " + kind);
}

}  // namespace mfl
