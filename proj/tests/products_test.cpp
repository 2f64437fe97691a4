#include "mfl/products.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "doctest.h"
#include "mfl/linalg.hpp"
#include "mfl/loopcore.hpp"
#include "mfl/rng.hpp"
#include "mfl/triality.hpp"
#include "mfl/zorn.hpp"

using namespace mfl;

namespace {

GdPair rand_pair(const Ring& r, Rng& rng) {
  for (;;) {
    Mat2 g;
    for (auto& e : g.e) e = static_cast<RingElem>(rng.below(r.order()));
    if (!r.is_unit(mat_det(r, g))) continue;
    Vec2 u{static_cast<RingElem>(rng.below(r.order())),
           static_cast<RingElem>(rng.below(r.order()))};
    return GdPair{g, u};
  }
}

}  // namespace

TEST_CASE("split pair arithmetic has identity, inverses and the frozen product") {
  Ring f2 = Ring::fp(2);
  Ring f5 = Ring::fp(5);

  // Worked example over F_2 with both vector parts nonzero.
  GdPair p{Mat2{{1, 1, 0, 1}}, {1, 0}};
  GdPair q{Mat2{{0, 1, 1, 0}}, {0, 1}};
  GdPair pq = gd_product(f2, p, q);
  CHECK(pq.g == Mat2{{1, 1, 1, 0}});
  CHECK(pq.u == Vec2{0, 0});

  GdPair e;  // (I, 0)
  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    GdPair a = rand_pair(f5, rng);
    CHECK(gd_product(f5, e, a) == a);
    CHECK(gd_product(f5, a, e) == a);
    GdPair ai = gd_inverse(f5, a);
    CHECK(gd_product(f5, a, ai) == e);
    CHECK(gd_product(f5, ai, a) == e);
  }

  // Pairs over a common matrix part compose additively; pure matrices
  // multiply as matrices.
  for (int i = 0; i < 100; ++i) {
    GdPair a = rand_pair(f5, rng);
    GdPair b = rand_pair(f5, rng);
    GdPair uu{Mat2::identity(), a.u};
    GdPair ww{Mat2::identity(), b.u};
    CHECK(gd_product(f5, uu, ww) == GdPair{Mat2::identity(), vec2_add(f5, a.u, b.u)});
    GdPair ga{a.g, {0, 0}};
    GdPair gb{b.g, {0, 0}};
    CHECK(gd_product(f5, ga, gb) == GdPair{mat_mul(f5, a.g, b.g), {0, 0}});
  }

  CHECK_THROWS_AS(gd_product(f2, GdPair{Mat2{{1, 1, 1, 1}}, {0, 0}}, e), Error);
  CHECK_THROWS_AS(gd_inverse(f2, GdPair{Mat2{{0, 0, 0, 1}}, {0, 0}}), Error);
}

TEST_CASE("split pair loops materialize with the expected structure") {
  Ring f2 = Ring::fp(2);
  Ring f3 = Ring::fp(3);

  GdLoop g2 = gd_loop(f2, {});
  CHECK(g2.table.size() == 24);
  CHECK(g2.scalar_subloop == std::vector<Elt>{0});
  CHECK(g2.quotient.size() == 24);
  MoufangVerdict mv = is_moufang(g2.table);
  CHECK(mv.pass);
  CHECK(mv.exhaustive);
  CHECK_FALSE(g2.table.is_associative());
  // Index round trips and the stated packing.
  for (Elt x = 0; x < g2.table.size(); ++x) CHECK(g2.index_of(g2.pair_of(x)) == x);
  CHECK(g2.pair_of(0) == GdPair{});
  CHECK(g2.table.names()[0] == "([[1,0],[0,1]],(0,0))");

  // Same loop as the matrix-group module extension of the symmetry cube.
  WreathTriality wt = wreath_module_make(f2, 2, [&] {
    std::vector<MatN> gens;
    for (const Mat2& m : gl2_enumerate(f2)) gens.push_back(matn_from_mat2(m));
    return gens;
  }());
  CHECK(isomorphic(loop_materialize(wt), g2.table).yes);

  GdLoop g3 = gd_loop(f3, {});
  CHECK(g3.table.size() == 432);
  CHECK(g3.scalar_subloop.size() == 2);
  CHECK(is_moufang(g3.table, 40000, 11).pass);
  CHECK_FALSE(g3.table.is_associative());

  // The scalar pairs are central: they commute and associate with everything.
  for (Elt s : g3.scalar_subloop)
    for (Elt x = 0; x < g3.table.size(); x += 7) {
      CHECK(g3.table.mul(s, x) == g3.table.mul(x, s));
      for (Elt y = 0; y < g3.table.size(); y += 13)
        CHECK(g3.table.mul(g3.table.mul(x, s), y) == g3.table.mul(x, g3.table.mul(s, y)));
    }

  // Direct coset-representative quotient vs the generic congruence quotient.
  CHECK(g3.quotient.size() == 216);
  LoopTable generic = quotient(g3.table, g3.scalar_subloop);
  CHECK(isomorphic(g3.quotient, generic).yes);

  // A commuting matrix group yields an associative pair loop.
  GdLoop diag = gd_loop(f3, {Mat2{{2, 0, 0, 1}}, Mat2{{1, 0, 0, 2}}});
  CHECK(diag.table.size() == 36);
  CHECK(diag.table.is_associative());

  CHECK_THROWS_AS(gd_loop(f2, {Mat2{{1, 1, 1, 1}}}), Error);
  CHECK_THROWS_AS(gd_loop(f3, {}, 100), Error);
  CHECK_THROWS_AS(g2.index_of(GdPair{Mat2{{1, 1, 1, 1}}, {0, 0}}), Error);
}

TEST_CASE("parabolic images embed the pair loop in the matrix loop") {
  for (std::uint32_t pch : {2u, 3u}) {
    Ring r = Ring::fp(pch);
    GdLoop gd = gd_loop(r, {});
    ZornSetLoop para = parabolic_subloop(r);
    REQUIRE(para.size() == gd.table.size());

    // Bijective: distinct pairs land on distinct parabolic indices.
    std::set<Elt> seen;
    std::vector<Elt> image(static_cast<std::size_t>(gd.table.size()));
    for (Elt x = 0; x < gd.table.size(); ++x) {
      GdPair p = gd.pair_of(x);
      ZornElem z = parabolic_image(r, p);
      // Diagonal and vector constraints of the parabolic shape.
      CHECK(zorn_norm(z) == mat_det(r, p.g));
      Elt ix = para.index_of(z);
      CHECK(seen.insert(ix).second);
      image[static_cast<std::size_t>(x)] = ix;
    }

    // Multiplicative on every pair of elements.
    bool homo = true;
    for (Elt x = 0; x < gd.table.size() && homo; ++x)
      for (Elt y = 0; y < gd.table.size(); ++y) {
        Elt lhs = para.mul(image[static_cast<std::size_t>(x)],
                           image[static_cast<std::size_t>(y)]);
        Elt rhs = image[static_cast<std::size_t>(gd.table.mul(x, y))];
        if (lhs != rhs) {
          homo = false;
          break;
        }
      }
    CHECK(homo);
  }

  Ring f2 = Ring::fp(2);
  CHECK_THROWS_AS(parabolic_image(f2, GdPair{Mat2{{1, 1, 1, 1}}, {0, 0}}), Error);
}

TEST_CASE("module coordinate frames solve and reject as documented") {
  Ring f3 = Ring::fp(3);
  Ring f2 = Ring::fp(2);
  Ring f4 = Ring::parse("F4");

  USpace perp3 = uspace_standard(f3, UModule::Perp);
  CHECK(perp3.dim() == 7);
  CHECK(perp3.size() == 2187);
  Rng rng(77);
  for (int i = 0; i < 200; ++i) {
    VecN c(7);
    for (auto& x : c) x = static_cast<RingElem>(rng.below(3));
    auto back = perp3.coords_of(perp3.to_ambient(c));
    REQUIRE(back.has_value());
    CHECK(*back == c);
  }
  // A single diagonal corner pairs nontrivially with the identity, so it
  // falls outside the orthogonal complement; the full frame takes everything.
  VecN corner(8, 0);
  corner[0] = 1;
  CHECK_FALSE(perp3.contains(corner));

  USpace full3 = uspace_standard(f3, UModule::Full);
  CHECK(full3.dim() == 8);
  CHECK(full3.contains(corner));

  // Characteristic 2: the unit line lies inside the orthogonal complement and
  // the quotient frame identifies vectors that differ by it.
  USpace perp6 = uspace_standard(f2, UModule::Perp6);
  CHECK(perp6.dim() == 6);
  REQUIRE(perp6.modline().size() == 1);
  for (int i = 0; i < 50; ++i) {
    VecN c(6);
    for (auto& x : c) x = static_cast<RingElem>(rng.below(2));
    VecN amb = perp6.to_ambient(c);
    auto a = perp6.coords_of(amb);
    auto b = perp6.coords_of(vec_add(f2, amb, perp6.modline()[0]));
    REQUIRE(a.has_value());
    REQUIRE(b.has_value());
    CHECK(*a == *b);
    CHECK(*a == c);
  }
  CHECK(uspace_standard(f4, UModule::Perp6).dim() == 6);
  CHECK_THROWS_AS(uspace_standard(f3, UModule::Perp6), Error);

  // Dependent rows are rejected.
  VecN e1(8, 0);
  e1[1] = 1;
  CHECK_THROWS_AS(USpace(f3, {e1, vec_scale(f3, 2, e1)}), Error);
}

TEST_CASE("invariance verdicts separate preserved modules from broken ones") {
  Ring f3 = Ring::fp(3);
  ZornSetLoop base = psl_set_loop(f3);
  std::vector<ZornElem> gens;
  for (Elt i = 0; i < 40; ++i) gens.push_back(base.elem(i));

  InvarianceVerdict good = sd_invariance_check(f3, gens, uspace_standard(f3, UModule::Perp));
  CHECK(good.pass);
  CHECK(good.detail.empty());

  // A single coordinate line is not preserved by conjugation.
  VecN e1(8, 0);
  e1[1] = 1;
  InvarianceVerdict bad = sd_invariance_check(f3, gens, USpace(f3, {e1}));
  CHECK_FALSE(bad.pass);
  CHECK(bad.detail.find("module") != std::string::npos);

  CHECK_THROWS_AS(sd_loop(base, USpace(f3, {e1})), Error);
  CHECK_THROWS_WITH_AS(sd_loop(base, USpace(f3, {e1})),
                       doctest::Contains("module"), Error);
}

TEST_CASE("semidirect pair loops multiply, invert and stay Moufang") {
  Ring f2 = Ring::fp(2);
  SdLoop l = sd_loop(psl_set_loop(f2), uspace_standard(f2, UModule::Perp6));
  CHECK(l.size() == 7680);
  CHECK(l.base().size() == 120);
  CHECK(l.uspace().dim() == 6);

  // Identity, inverses, and index round trips.
  CHECK(l.pair_of(0) == SdPair{0, VecN(6, 0)});
  Rng rng(5);
  for (int i = 0; i < 400; ++i) {
    Elt x = static_cast<Elt>(rng.below(static_cast<std::uint64_t>(l.size())));
    CHECK(l.index_of(l.pair_of(x)) == x);
    CHECK(l.mul(0, x) == x);
    CHECK(l.mul(x, 0) == x);
    CHECK(l.mul(x, l.inv(x)) == 0);
    CHECK(l.mul(l.inv(x), x) == 0);
    CHECK(l.ldiv(x, l.mul(x, x)) == x);
    CHECK(l.rdiv(l.mul(x, x), x) == x);
  }

  // Pure module elements add; pure base elements multiply in the base.
  for (int i = 0; i < 200; ++i) {
    VecN u(6), w(6);
    for (auto& c : u) c = static_cast<RingElem>(rng.below(2));
    for (auto& c : w) c = static_cast<RingElem>(rng.below(2));
    SdPair a{0, u}, b{0, w};
    CHECK(l.product(a, b) == SdPair{0, vec_add(f2, u, w)});
    Elt m = static_cast<Elt>(rng.below(120));
    Elt n = static_cast<Elt>(rng.below(120));
    CHECK(l.product(SdPair{m, VecN(6, 0)}, SdPair{n, VecN(6, 0)}) ==
          SdPair{l.base().mul(m, n), VecN(6, 0)});
  }

  MoufangVerdict mv = is_moufang(l, 30000, 17, 64);
  CHECK(mv.pass);
  CHECK(mv.checked >= 30000);

  // Left pair translations fix the module fiber and act there by the
  // projected operator of the base elements.
  for (int i = 0; i < 60; ++i) {
    Elt m = static_cast<Elt>(rng.below(120));
    Elt n = static_cast<Elt>(rng.below(120));
    VecN u(6);
    for (auto& c : u) c = static_cast<RingElem>(rng.below(2));
    Elt fiber = l.index_of(SdPair{0, u});
    Elt moved = apply_Lxy(l, l.index_of(SdPair{m, VecN(6, 0)}),
                          l.index_of(SdPair{n, VecN(6, 0)}), fiber);
    VecN expect = vec_apply(f2, u, l.op_matrix(ZOpKind::Lxy, m, n));
    CHECK(l.pair_of(moved) == SdPair{0, expect});
  }

  CHECK(l.name_of(0) == "sd(" + zorn_format(l.base().elem(0)) + "|0,0,0,0,0,0)");
}

TEST_CASE("scalar and module quotients of pair loops behave like projections") {
  Ring f3 = Ring::fp(3);
  SdLoop big = sd_loop(sl_loop(f3), uspace_standard(f3, UModule::Perp));
  CHECK(big.base().size() == 2160);
  CHECK(big.size() == 2160 * Elt{2187});

  SdLoop quo = sd_quotient_scalars(big);
  CHECK(quo.base().size() == 1080);
  CHECK(quo.size() == 1080 * Elt{2187});
  // The folded base is exactly the scalar-orbit loop.
  ZornSetLoop ref = psl_set_loop(f3);
  REQUIRE(quo.base().size() == ref.size());
  for (Elt i = 0; i < ref.size(); i += 97) CHECK(quo.base().elem(i) == ref.elem(i));

  // Folding the first coordinate is a homomorphism of pair loops.
  Rng rng(23);
  for (int i = 0; i < 500; ++i) {
    SdPair a{static_cast<Elt>(rng.below(2160)), VecN(7)};
    SdPair b{static_cast<Elt>(rng.below(2160)), VecN(7)};
    for (auto& c : a.u) c = static_cast<RingElem>(rng.below(3));
    for (auto& c : b.u) c = static_cast<RingElem>(rng.below(3));
    SdPair ab = big.product(a, b);
    auto fold = [&](const SdPair& p) {
      return SdPair{quo.base().index_of(big.base().elem(p.m)), p.u};
    };
    CHECK(quo.product(fold(a), fold(b)) == fold(ab));
  }

  // Characteristic 2: modding the 7-dim complement by the unit line matches
  // the built-in 6-dim quotient frame at the pair level.
  Ring f2 = Ring::fp(2);
  SdLoop a7 = sd_loop(psl_set_loop(f2), uspace_standard(f2, UModule::Perp));
  CHECK(a7.size() == 120 * Elt{128});
  USpace perp2 = a7.uspace();
  SdLoop a6 = sd_quotient_module(a7, {one_perp(f2).line[0]});
  CHECK(a6.size() == 120 * Elt{64});
  for (int i = 0; i < 300; ++i) {
    SdPair a{static_cast<Elt>(rng.below(120)), VecN(7)};
    SdPair b{static_cast<Elt>(rng.below(120)), VecN(7)};
    for (auto& c : a.u) c = static_cast<RingElem>(rng.below(2));
    for (auto& c : b.u) c = static_cast<RingElem>(rng.below(2));
    SdPair ab = a7.product(a, b);
    auto project = [&](const SdPair& p) {
      auto c = a6.uspace().coords_of(perp2.to_ambient(p.u));
      REQUIRE(c.has_value());
      return SdPair{p.m, *c};
    };
    CHECK(a6.product(project(a), project(b)) == project(ab));
  }

  // Rows outside the module and non-invariant rows are rejected.
  VecN corner(8, 0);
  corner[0] = 1;  // diagonal corner alone is not orthogonal to the identity
  CHECK_THROWS_AS(sd_quotient_module(a7, {corner}), Error);
  VecN offdiag = a7.uspace().basis()[1];  // a coordinate line conjugation moves
  CHECK_THROWS_AS(sd_quotient_module(a7, {offdiag}), Error);
}

TEST_CASE("catalog constructions come out at their advertised orders") {
  Construction c4 = catalog("psl2-semidirect", {{"q", 4}});
  REQUIRE(c4.table);
  CHECK(c4.table->size() == 960);
  CHECK(c4.kernel.size() == 16);
  REQUIRE(c4.fiber_quotient);
  CHECK(c4.fiber_quotient->size() == 60);
  CHECK(c4.fiber_quotient->is_associative());
  CHECK(is_moufang(*c4.table, 30000, 3).pass);

  Construction c5 = catalog("psl2-semidirect", {{"q", 5}});
  REQUIRE(c5.table);
  CHECK(c5.table->size() == 1500);
  CHECK(c5.kernel.size() == 25);
  REQUIRE(c5.fiber_quotient);
  CHECK(c5.fiber_quotient->size() == 60);
  // Both matrix quotients are the simple group of order 60.
  CHECK(isomorphic(*c4.fiber_quotient, *c5.fiber_quotient).yes);

  Construction cp = catalog("paige-semidirect", {{"q", 2}});
  CHECK(cp.loop->size() == 7680);
  CHECK(cp.kernel.size() == 64);
  REQUIRE(cp.fiber_quotient);
  CHECK(cp.fiber_quotient->size() == 120);
  CHECK_FALSE(cp.fiber_quotient->is_associative());
  for (std::size_t i = 0; i < cp.kernel.size(); ++i)
    CHECK(cp.fiber_project[static_cast<std::size_t>(cp.kernel[i])] == 0);

  Construction cm = catalog("m2-over-p", {{"p", 3}});
  CHECK(cm.loop->size() == 262440);
  REQUIRE(cm.fiber_quotient);
  CHECK(cm.fiber_quotient->size() == 120);
  CHECK_FALSE(cm.fiber_quotient->is_associative());
  // The base found inside the big loop is the small simple loop itself.
  CHECK(isomorphic(*cm.fiber_quotient, psl_loop(Ring::fp(2))).yes);
  // Its pair loop is Moufang where sampled.
  CHECK(is_moufang(*cm.loop, 20000, 29, 64).pass);

  CHECK_THROWS_AS(catalog("psl2-semidirect", {{"q", 3}}), Error);
  CHECK_THROWS_AS(catalog("psl2-semidirect", {{"q", 7}}), Error);
  CHECK_THROWS_AS(catalog("paige-semidirect", {{"q", 5}}), Error);
  CHECK_THROWS_AS(catalog("m2-over-p", {{"p", 5}}), Error);
  CHECK_THROWS_AS(catalog("nonesuch", {}), Error);
  CHECK_THROWS_AS(catalog("paige-semidirect", {{"p", 2}}), Error);
}

TEST_CASE("construction descriptors parse, dispatch and reject bad input") {
  Construction paige = construction_parse("paige:q=2");
  REQUIRE(paige.table);
  CHECK(paige.table->size() == 120);
  CHECK(paige.description == "paige:q=2");

  Construction paige3 = construction_parse("paige:q=3", 500);
  CHECK_FALSE(paige3.table);  // order 1080 exceeds the requested cap
  CHECK(paige3.loop->size() == 1080);
  Construction paige3t = construction_parse("paige:q=3");
  REQUIRE(paige3t.table);
  CHECK(paige3t.table->size() == 1080);

  Construction gd2 = construction_parse("gd:F2,all");
  REQUIRE(gd2.table);
  CHECK(gd2.table->size() == 24);
  CHECK(gd2.kernel.size() == 4);
  REQUIRE(gd2.fiber_quotient);
  CHECK(gd2.fiber_quotient->size() == 6);

  Construction diag = construction_parse("gd:F3,[[2,0],[0,1]]+[[1,0],[0,2]]");
  REQUIRE(diag.table);
  CHECK(diag.table->size() == 36);

  Construction sd = construction_parse("sd:psl,F2,perp6");
  CHECK(sd.loop->size() == 7680);
  CHECK(sd.kernel.size() == 64);

  Construction wm = construction_parse("wreathmod:F2,2");
  REQUIRE(wm.table);
  CHECK(wm.table->size() == 24);
  CHECK(wm.kernel.size() == 4);
  REQUIRE(wm.fiber_quotient);
  CHECK(wm.fiber_quotient->size() == 6);
  // Projection onto the matrix part is multiplicative.
  for (Elt x = 0; x < wm.table->size(); ++x)
    for (Elt y = 0; y < wm.table->size(); ++y)
      CHECK(wm.fiber_project[static_cast<std::size_t>(wm.table->mul(x, y))] ==
            wm.fiber_quotient->mul(wm.fiber_project[static_cast<std::size_t>(x)],
                                   wm.fiber_project[static_cast<std::size_t>(y)]));

  // Rank 1: the derived element set carries no module freedom, so the loop
  // recovers the unit group and the fiber kernel is trivial.
  Construction w1 = construction_parse("wreathmod:F3,1");
  REQUIRE(w1.table);
  CHECK(w1.table->size() == 2);
  CHECK(w1.kernel.size() == 1);

  CHECK_THROWS_WITH_AS(construction_parse("wreathmod:F2,3"),
                       doctest::Contains("rank-3"), Error);

  Construction cat = construction_parse("catalog:psl2-semidirect,q=4");
  CHECK(cat.table->size() == 960);

  CHECK_THROWS_AS(construction_parse("nonsense"), Error);
  CHECK_THROWS_AS(construction_parse("gd:F2"), Error);
  CHECK_THROWS_AS(construction_parse("gd:F2,"), Error);
  CHECK_THROWS_AS(construction_parse("sd:psl,F2,weird"), Error);
  CHECK_THROWS_AS(construction_parse("sd:weird,F2,perp"), Error);
  CHECK_THROWS_AS(construction_parse("paige:k=2"), Error);
  CHECK_THROWS_AS(construction_parse("paige:q=banana"), Error);
  CHECK_THROWS_AS(construction_parse("catalog:psl2-semidirect"), Error);
  CHECK_THROWS_AS(construction_parse("wreathmod:F2"), Error);
  CHECK_THROWS_AS(construction_parse("wreathmod:F2,2,oops"), Error);
  CHECK_THROWS_AS(construction_parse("wreath:/nonexistent/path"), Error);
}

TEST_CASE("operator identity suite passes over fields and rejects nothing") {
  Ring f2 = Ring::fp(2);
  SuiteReport r2 = altop_suite(f2, 20000, 5, true);
  CHECK(r2.pass);
  CHECK(r2.detail.empty());
  CHECK(r2.checks >= 4 * 20000);

  SuiteReport r3 = altop_suite(Ring::fp(3), 2500, 9, false);
  CHECK(r3.pass);
  CHECK(r3.checks >= 4 * 2500);

  SuiteReport r5 = altop_suite(Ring::fp(5), 800, 13, false);
  CHECK(r5.pass);

  SuiteReport rz = altop_suite(Ring::parse("Z6"), 300, 21, false);
  CHECK(rz.pass);

  // Sampled runs label themselves as such.
  CHECK_FALSE(r2.exhaustive);
  CHECK_FALSE(r3.exhaustive);
}
