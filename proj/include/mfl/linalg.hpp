#pragma once

#include <array>
#include <string>
#include <vector>

#include "mfl/ring.hpp"
#include "mfl/smallmat.hpp"

namespace mfl {

// Row vectors, acted on the right: (v*a)_j = sum_i v_i a_{ij}.
using Vec2 = std::array<RingElem, 2>;
using Vec3 = std::array<RingElem, 3>;

struct Mat2 {
  // Row-major entries a00 a01 a10 a11.
  std::array<RingElem, 4> e{0, 0, 0, 0};

  static Mat2 identity() { return Mat2{{1, 0, 0, 1}}; }
  bool operator==(const Mat2& o) const { return e == o.e; }
  bool operator<(const Mat2& o) const { return e < o.e; }
};

Mat2 mat_mul(const Ring& r, const Mat2& a, const Mat2& b);
RingElem mat_det(const Ring& r, const Mat2& a);
Mat2 mat_adjoint(const Ring& r, const Mat2& a);
// Requires det a unit; a * mat_inv(a) = I.
Mat2 mat_inv(const Ring& r, const Mat2& a);
Mat2 mat_scale(const Ring& r, RingElem c, const Mat2& a);
bool mat_is_scalar(const Mat2& a);

Vec2 vec_act(const Ring& r, const Vec2& v, const Mat2& a);
Vec2 vec2_add(const Ring& r, const Vec2& a, const Vec2& b);
Vec2 vec2_neg(const Ring& r, const Vec2& a);

Vec3 vec3_add(const Ring& r, const Vec3& a, const Vec3& b);
Vec3 vec3_neg(const Ring& r, const Vec3& a);
RingElem dot(const Ring& r, const Vec3& a, const Vec3& b);
Vec3 cross(const Ring& r, const Vec3& a, const Vec3& b);

// All invertible 2x2 matrices (det a unit), identity first, then ascending by
// entry tuple. Guarded so at most 2^12 candidates are scanned.
std::vector<Mat2> gl2_enumerate(const Ring& r);

// Conversions between the fixed-size and dense representations.
MatN matn_from_mat2(const Mat2& a);
Mat2 mat2_from_matn(const MatN& a);

// [g,h] = g^{-1} h^{-1} g h.
Mat2 commutator_mat(const Ring& r, const Mat2& g, const Mat2& h);

// Literal syntax [[a,b],[c,d]] with coefficient-packed integer entries.
Mat2 mat2_parse(const Ring& r, const std::string& text);
std::string mat2_format(const Mat2& a);

}  // namespace mfl
