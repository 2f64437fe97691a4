#include <set>

#include "doctest.h"
#include "mfl/linalg.hpp"

using namespace mfl;

TEST_CASE("mat2 adjoint and inverse") {
  Ring f3 = Ring::fp(3);
  Mat2 a{{1, 1, 0, 1}};
  Mat2 ai = mat_inv(f3, a);
  CHECK(ai == Mat2{{1, 2, 0, 1}});
  CHECK(mat_mul(f3, a, ai) == Mat2::identity());
  CHECK(mat_adjoint(f3, Mat2{{0, 1, 2, 1}}) == Mat2{{1, 2, 1, 0}});

  // a * adjoint(a) = det(a) * I, including singular matrices.
  for (RingElem a0 = 0; a0 < 3; ++a0)
    for (RingElem a1 = 0; a1 < 3; ++a1)
      for (RingElem a2 = 0; a2 < 3; ++a2)
        for (RingElem a3 = 0; a3 < 3; ++a3) {
          Mat2 m{{a0, a1, a2, a3}};
          Mat2 prod = mat_mul(f3, m, mat_adjoint(f3, m));
          RingElem d = mat_det(f3, m);
          CHECK(prod == Mat2{{d, 0, 0, d}});
        }
}

TEST_CASE("det over F2 swap matrix") {
  Ring f2 = Ring::fp(2);
  CHECK(mat_det(f2, Mat2{{0, 1, 1, 0}}) == 1);
}

TEST_CASE("row vector right action") {
  Ring f2 = Ring::fp(2);
  CHECK(vec_act(f2, Vec2{1, 0}, Mat2::identity()) == Vec2{1, 0});
  CHECK(vec_act(f2, Vec2{1, 0}, Mat2{{0, 1, 1, 0}}) == Vec2{0, 1});
  CHECK(vec_act(f2, Vec2{1, 1}, Mat2{{1, 1, 0, 1}}) == Vec2{1, 0});
}

TEST_CASE("gl2 enumeration counts") {
  CHECK(gl2_enumerate(Ring::fp(2)).size() == 6);
  CHECK(gl2_enumerate(Ring::fp(3)).size() == 48);
  CHECK(gl2_enumerate(Ring::zn(4)).size() == 96);
  CHECK(gl2_enumerate(Ring::fpk(2, 2, {1, 1})).size() == 180);  // (16-1)(16-4)
  CHECK_THROWS_AS(gl2_enumerate(Ring::fp(11)), Error);
  // Identity first, all invertible, closed under product and inverse.
  Ring f3 = Ring::fp(3);
  auto gl = gl2_enumerate(f3);
  CHECK(gl[0] == Mat2::identity());
  std::set<Mat2> all(gl.begin(), gl.end());
  CHECK(all.size() == gl.size());
  for (const auto& m : gl) {
    CHECK(f3.is_unit(mat_det(f3, m)));
    CHECK(all.count(mat_inv(f3, m)) == 1);
  }
  for (size_t i = 0; i < gl.size(); i += 7)
    for (size_t j = 0; j < gl.size(); j += 5) {
      CHECK(all.count(mat_mul(f3, gl[i], gl[j])) == 1);
      CHECK(mat_det(f3, mat_mul(f3, gl[i], gl[j])) ==
            f3.mul(mat_det(f3, gl[i]), mat_det(f3, gl[j])));
    }
}

TEST_CASE("matrix commutator") {
  Ring f2 = Ring::fp(2);
  Mat2 g{{1, 1, 0, 1}};
  Mat2 h{{0, 1, 1, 0}};
  CHECK(commutator_mat(f2, g, g) == Mat2::identity());
  CHECK(commutator_mat(f2, Mat2::identity(), h) == Mat2::identity());
  // [h^{-1}, g^{-1}] frozen from a hand computation: hg = [[0,1],[1,1]], (hg)^2 = [[1,1],[1,0]].
  CHECK(commutator_mat(f2, mat_inv(f2, h), mat_inv(f2, g)) == Mat2{{1, 1, 1, 0}});
}

TEST_CASE("vec3 cross and dot") {
  Ring f5 = Ring::fp(5);
  Vec3 e1{1, 0, 0}, e2{0, 1, 0}, e3{0, 0, 1};
  CHECK(cross(f5, e1, e2) == e3);
  CHECK(cross(f5, e2, e1) == vec3_neg(f5, e3));
  CHECK(dot(f5, Vec3{1, 2, 3}, Vec3{2, 3, 4}) == (2 + 6 + 12) % 5);
}

TEST_CASE("dense matrices and row spans") {
  Ring f3 = Ring::fp(3);
  MatN m(3);
  m.at(0, 1) = 1;
  m.at(1, 2) = 1;
  m.at(2, 0) = 1;  // cyclic permutation matrix
  MatN m3 = mat_mul(f3, m, mat_mul(f3, m, m));
  CHECK(m3 == MatN::identity(3));
  MatN mi = mat_inverse(f3, m);
  CHECK(mat_mul(f3, m, mi) == MatN::identity(3));
  CHECK(vec_apply(f3, VecN{1, 2, 0}, MatN::identity(3)) == VecN{1, 2, 0});

  RowSpan span(f3);
  CHECK(span.add(VecN{1, 1, 0}));
  CHECK(span.add(VecN{0, 1, 1}));
  CHECK(!span.add(VecN{1, 2, 1}));  // dependent: sum of the two
  CHECK(span.dim() == 2);
  CHECK(span.contains(VecN{2, 0, 1}));
  CHECK(!span.contains(VecN{0, 0, 1}));
}

TEST_CASE("matrix literal parsing") {
  Ring f3 = Ring::fp(3);
  Mat2 m = mat2_parse(f3, "[[1,2],[0,1]]");
  CHECK(m == Mat2{{1, 2, 0, 1}});
  CHECK(mat2_format(m) == "[[1,2],[0,1]]");
  CHECK_THROWS_AS(mat2_parse(f3, "[[1,2],[0,5]]"), Error);
  CHECK_THROWS_AS(mat2_parse(f3, "[[1,2],[0,1]]x"), Error);
}
