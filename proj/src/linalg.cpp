#include "mfl/linalg.hpp"

#include <algorithm>
#include <charconv>

namespace mfl {

// ---- dense helpers ----------------------------------------------------------

MatN mat_mul(const Ring& r, const MatN& a, const MatN& b) {
  int n = a.dim();
  if (n != b.dim()) fail(Err::OperatorDomainMismatch, "matrix dimension mismatch");
  MatN out(n);
  if (r.kind() != RingKind::ExtField) {
    // Accumulate in plain integers, reduce once per entry. Values are < 2^16
    // and n <= 32, so the sum fits comfortably in 64 bits.
    std::uint64_t mod = r.order();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        std::uint64_t acc = 0;
        for (int k = 0; k < n; ++k)
          acc += static_cast<std::uint64_t>(a.at(i, k)) * b.at(k, j);
        out.at(i, j) = static_cast<RingElem>(acc % mod);
      }
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        RingElem acc = 0;
        for (int k = 0; k < n; ++k) acc = r.add(acc, r.mul(a.at(i, k), b.at(k, j)));
        out.at(i, j) = acc;
      }
  }
  return out;
}

MatN mat_add(const Ring& r, const MatN& a, const MatN& b) {
  int n = a.dim();
  if (n != b.dim()) fail(Err::OperatorDomainMismatch, "matrix dimension mismatch");
  MatN out(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.at(i, j) = r.add(a.at(i, j), b.at(i, j));
  return out;
}

VecN vec_apply(const Ring& r, const VecN& v, const MatN& m) {
  int n = m.dim();
  if (static_cast<int>(v.size()) != n) fail(Err::OperatorDomainMismatch, "vector length mismatch");
  VecN out(n);
  if (r.kind() != RingKind::ExtField) {
    std::uint64_t mod = r.order();
    for (int j = 0; j < n; ++j) {
      std::uint64_t acc = 0;
      for (int i = 0; i < n; ++i) acc += static_cast<std::uint64_t>(v[i]) * m.at(i, j);
      out[j] = static_cast<RingElem>(acc % mod);
    }
  } else {
    for (int j = 0; j < n; ++j) {
      RingElem acc = 0;
      for (int i = 0; i < n; ++i) acc = r.add(acc, r.mul(v[i], m.at(i, j)));
      out[j] = acc;
    }
  }
  return out;
}

MatN mat_inverse(const Ring& r, const MatN& m) {
  int n = m.dim();
  MatN a = m;
  MatN inv = MatN::identity(n);
  for (int col = 0; col < n; ++col) {
    int pivot = -1;
    for (int row = col; row < n; ++row)
      if (r.is_unit(a.at(row, col))) {
        pivot = row;
        break;
      }
    if (pivot < 0) fail(Err::NotInvertible, "no unit pivot in column " + std::to_string(col));
    if (pivot != col)
      for (int j = 0; j < n; ++j) {
        std::swap(a.at(pivot, j), a.at(col, j));
        std::swap(inv.at(pivot, j), inv.at(col, j));
      }
    RingElem s = r.inv(a.at(col, col));
    for (int j = 0; j < n; ++j) {
      a.at(col, j) = r.mul(s, a.at(col, j));
      inv.at(col, j) = r.mul(s, inv.at(col, j));
    }
    for (int row = 0; row < n; ++row) {
      if (row == col) continue;
      RingElem f = a.at(row, col);
      if (f == 0) continue;
      for (int j = 0; j < n; ++j) {
        a.at(row, j) = r.sub(a.at(row, j), r.mul(f, a.at(col, j)));
        inv.at(row, j) = r.sub(inv.at(row, j), r.mul(f, inv.at(col, j)));
      }
    }
  }
  return inv;
}

MatN mat_transpose(const MatN& m) {
  MatN out(m.dim());
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) out.at(j, i) = m.at(i, j);
  return out;
}

VecN RowSpan::reduce(VecN v) const {
  for (std::size_t k = 0; k < rows_.size(); ++k) {
    RingElem c = v[pivots_[k]];
    if (c == 0) continue;
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = r_.sub(v[j], r_.mul(c, rows_[k][j]));
  }
  return v;
}

bool RowSpan::add(VecN v) {
  v = reduce(std::move(v));
  int pivot = -1;
  for (std::size_t j = 0; j < v.size(); ++j)
    if (v[j] != 0) {
      pivot = static_cast<int>(j);
      break;
    }
  if (pivot < 0) return false;
  RingElem s = r_.inv(v[pivot]);
  for (auto& x : v) x = r_.mul(s, x);
  // Back-substitute into existing rows to keep reduced echelon form.
  for (std::size_t k = 0; k < rows_.size(); ++k) {
    RingElem c = rows_[k][pivot];
    if (c == 0) continue;
    for (std::size_t j = 0; j < v.size(); ++j)
      rows_[k][j] = r_.sub(rows_[k][j], r_.mul(c, v[j]));
  }
  rows_.push_back(std::move(v));
  pivots_.push_back(pivot);
  return true;
}

bool RowSpan::contains(VecN v) const { return vec_is_zero(reduce(std::move(v))); }

// ---- 2x2 --------------------------------------------------------------------

Mat2 mat_mul(const Ring& r, const Mat2& a, const Mat2& b) {
  Mat2 out;
  out.e[0] = r.add(r.mul(a.e[0], b.e[0]), r.mul(a.e[1], b.e[2]));
  out.e[1] = r.add(r.mul(a.e[0], b.e[1]), r.mul(a.e[1], b.e[3]));
  out.e[2] = r.add(r.mul(a.e[2], b.e[0]), r.mul(a.e[3], b.e[2]));
  out.e[3] = r.add(r.mul(a.e[2], b.e[1]), r.mul(a.e[3], b.e[3]));
  return out;
}

RingElem mat_det(const Ring& r, const Mat2& a) {
  return r.sub(r.mul(a.e[0], a.e[3]), r.mul(a.e[1], a.e[2]));
}

Mat2 mat_adjoint(const Ring& r, const Mat2& a) {
  return Mat2{{a.e[3], r.neg(a.e[1]), r.neg(a.e[2]), a.e[0]}};
}

Mat2 mat_inv(const Ring& r, const Mat2& a) {
  RingElem d = mat_det(r, a);
  if (!r.is_unit(d)) fail(Err::SingularMatrix, "det " + std::to_string(d) + " is not a unit");
  return mat_scale(r, r.inv(d), mat_adjoint(r, a));
}

Mat2 mat_scale(const Ring& r, RingElem c, const Mat2& a) {
  Mat2 out;
  for (int i = 0; i < 4; ++i) out.e[i] = r.mul(c, a.e[i]);
  return out;
}

bool mat_is_scalar(const Mat2& a) { return a.e[1] == 0 && a.e[2] == 0 && a.e[0] == a.e[3]; }

Vec2 vec_act(const Ring& r, const Vec2& v, const Mat2& a) {
  return Vec2{r.add(r.mul(v[0], a.e[0]), r.mul(v[1], a.e[2])),
              r.add(r.mul(v[0], a.e[1]), r.mul(v[1], a.e[3]))};
}

Vec2 vec2_add(const Ring& r, const Vec2& a, const Vec2& b) {
  return Vec2{r.add(a[0], b[0]), r.add(a[1], b[1])};
}

Vec2 vec2_neg(const Ring& r, const Vec2& a) { return Vec2{r.neg(a[0]), r.neg(a[1])}; }

Vec3 vec3_add(const Ring& r, const Vec3& a, const Vec3& b) {
  return Vec3{r.add(a[0], b[0]), r.add(a[1], b[1]), r.add(a[2], b[2])};
}

Vec3 vec3_neg(const Ring& r, const Vec3& a) { return Vec3{r.neg(a[0]), r.neg(a[1]), r.neg(a[2])}; }

RingElem dot(const Ring& r, const Vec3& a, const Vec3& b) {
  return r.add(r.add(r.mul(a[0], b[0]), r.mul(a[1], b[1])), r.mul(a[2], b[2]));
}

Vec3 cross(const Ring& r, const Vec3& a, const Vec3& b) {
  return Vec3{r.sub(r.mul(a[1], b[2]), r.mul(a[2], b[1])),
              r.sub(r.mul(a[2], b[0]), r.mul(a[0], b[2])),
              r.sub(r.mul(a[0], b[1]), r.mul(a[1], b[0]))};
}

std::vector<Mat2> gl2_enumerate(const Ring& r) {
  std::uint64_t n = r.order();
  std::uint64_t total = n * n * n * n;
  if (total > (1u << 12)) fail(Err::TooLarge, "GL_2 enumeration over order " + std::to_string(n));
  std::vector<Mat2> out;
  out.push_back(Mat2::identity());
  for (std::uint64_t packed = 0; packed < total; ++packed) {
    Mat2 m;
    std::uint64_t rest = packed;
    for (int i = 3; i >= 0; --i) {
      m.e[i] = static_cast<RingElem>(rest % n);
      rest /= n;
    }
    if (m == Mat2::identity()) continue;
    if (r.is_unit(mat_det(r, m))) out.push_back(m);
  }
  return out;
}

Mat2 commutator_mat(const Ring& r, const Mat2& g, const Mat2& h) {
  return mat_mul(r, mat_mul(r, mat_inv(r, g), mat_inv(r, h)), mat_mul(r, g, h));
}

MatN matn_from_mat2(const Mat2& a) {
  MatN out(2);
  out.at(0, 0) = a.e[0];
  out.at(0, 1) = a.e[1];
  out.at(1, 0) = a.e[2];
  out.at(1, 1) = a.e[3];
  return out;
}

Mat2 mat2_from_matn(const MatN& a) {
  if (a.dim() != 2) fail(Err::OperatorDomainMismatch, "matrix is not 2x2");
  return Mat2{{a.at(0, 0), a.at(0, 1), a.at(1, 0), a.at(1, 1)}};
}

namespace {

RingElem parse_entry(const Ring& r, const std::string& s, std::size_t& pos) {
  std::uint32_t value = 0;
  const char* begin = s.data() + pos;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr == begin) fail(Err::BadDescriptor, "expected entry in '" + s + "'");
  pos += static_cast<std::size_t>(ptr - begin);
  return r.check(value);
}

void expect(const std::string& s, std::size_t& pos, char c) {
  if (pos >= s.size() || s[pos] != c)
    fail(Err::BadDescriptor, std::string("expected '") + c + "' in '" + s + "'");
  ++pos;
}

}  // namespace

Mat2 mat2_parse(const Ring& r, const std::string& text) {
  std::size_t pos = 0;
  Mat2 m;
  expect(text, pos, '[');
  expect(text, pos, '[');
  m.e[0] = parse_entry(r, text, pos);
  expect(text, pos, ',');
  m.e[1] = parse_entry(r, text, pos);
  expect(text, pos, ']');
  expect(text, pos, ',');
  expect(text, pos, '[');
  m.e[2] = parse_entry(r, text, pos);
  expect(text, pos, ',');
  m.e[3] = parse_entry(r, text, pos);
  expect(text, pos, ']');
  expect(text, pos, ']');
  if (pos != text.size()) fail(Err::BadDescriptor, "trailing input in '" + text + "'");
  return m;
}

std::string mat2_format(const Mat2& a) {
  return "[[" + std::to_string(a.e[0]) + "," + std::to_string(a.e[1]) + "],[" +
         std::to_string(a.e[2]) + "," + std::to_string(a.e[3]) + "]]";
}

}  // namespace mfl
