// Unit tests: Lie structure constants, wedge/Schouten calculus, PBW layer,
// Hopf operations, symmetrization, PBW star-product.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dyt/env.hpp"

using namespace dyt;

namespace {

JetContext lambda_ctx(int d, int Nh = 2) {
  std::vector<Rational> bp(size_t(d), Rational(2));
  return JetContext::make(d, 0, 2 * Nh + 2, Nh, bp);
}

WedgePoly wv(const JetContext& ctx, const LieAlgebraData& L, std::vector<int> idx,
             Rational c = Rational(1)) {
  WedgePoly w(&ctx, &L, int(idx.size()));
  w.add_term(std::move(idx), JetScalar(&ctx, c));
  return w;
}

}  // namespace

TEST_CASE("jacobi_check accepts so3 and sl2, rejects corrupted constants") {
  CHECK(LieAlgebraData::so3().jacobi_check().ok);
  CHECK(LieAlgebraData::sl2().jacobi_check().ok);

  LieAlgebraData bad = LieAlgebraData::make(3, {});
  bad.c[size_t((2 * 3 + 0) * 3 + 1)] = Rational(1);  // c^3_{12}=1, c^3_{21} left 0
  auto rep = bad.jacobi_check();
  CHECK_FALSE(rep.ok);
  CHECK_FALSE(rep.antisymmetry);
  CHECK(rep.witness[0] == 0);
  CHECK(rep.witness[1] == 1);

  // [[e1,e2],e3] + [[e2,e3],e1] + [[e3,e1],e2] = e3 - e1 + e2 here
  LieAlgebraData nj = LieAlgebraData::make(3, {});
  nj.set_bracket(0, 1, 0, Rational(1));
  nj.set_bracket(1, 2, 1, Rational(1));
  nj.set_bracket(0, 2, 2, Rational(1));
  auto rep2 = nj.jacobi_check();
  CHECK_FALSE(rep2.ok);
  CHECK(rep2.antisymmetry);
}

TEST_CASE("schouten bracket: pinned convention examples") {
  JetContext ctx = lambda_ctx(1);
  LieAlgebraData so3 = LieAlgebraData::so3();
  // degree-1 case reduces to the Lie bracket
  WedgePoly e1 = wv(ctx, so3, {0}), e2 = wv(ctx, so3, {1});
  WedgePoly br = WedgePoly::schouten(e1, e2);
  CHECK(br.equals_upto(wv(ctx, so3, {2})));
  // [e1^e2, e1^e2] = 2 e1^e2^e3
  WedgePoly b12 = wv(ctx, so3, {0, 1});
  CHECK(WedgePoly::schouten(b12, b12).equals_upto(wv(ctx, so3, {0, 1, 2}, Rational(2))));
  // [e^f, e^f] = 2 e^f^h in sl2
  LieAlgebraData sl2 = LieAlgebraData::sl2();
  WedgePoly ef = wv(ctx, sl2, {1, 2});
  CHECK(WedgePoly::schouten(ef, ef).equals_upto(wv(ctx, sl2, {0, 1, 2}, Rational(2))));
}

TEST_CASE("schouten: graded antisymmetry and Jacobi on random polyvectors") {
  JetContext ctx = lambda_ctx(1);
  LieAlgebraData L = LieAlgebraData::sl2();
  Rng rng(77);
  auto random_wedge = [&](int deg) {
    WedgePoly w(&ctx, &L, deg);
    for (int t = 0; t < 3; ++t) {
      std::vector<int> idx;
      for (int i = 0; i < deg; ++i) idx.push_back(int(rng.range(0, L.n - 1)));
      SPoly coeff = SPoly(rng.rational(4, 2)) +
                    SPoly(rng.rational(4, 2)) * SPoly::variable(0);
      w.add_term(idx, JetScalar(&ctx, coeff));
    }
    return w;
  };
  for (int trial = 0; trial < 8; ++trial) {
    for (int p = 1; p <= 2; ++p) {
      for (int q = 1; q <= 2; ++q) {
        WedgePoly P = random_wedge(p), Q = random_wedge(q);
        WedgePoly lhs = WedgePoly::schouten(P, Q);
        WedgePoly rhs = WedgePoly::schouten(Q, P);
        int sign = (((p - 1) * (q - 1)) % 2 == 0) ? -1 : 1;  // [P,Q] = -(-1)^.. [Q,P]
        CHECK(lhs.equals_upto(sign < 0 ? -rhs : rhs));
      }
    }
  }
  // graded Jacobi on vectors/bivectors:
  // [P,[Q,R]] = [[P,Q],R] + (-1)^{(p-1)(q-1)}[Q,[P,R]]
  for (int trial = 0; trial < 6; ++trial) {
    for (int p = 1; p <= 2; ++p) {
      for (int q = 1; q <= 2; ++q) {
        WedgePoly P = random_wedge(p), Q = random_wedge(q), R = random_wedge(2);
        WedgePoly lhs = WedgePoly::schouten(P, WedgePoly::schouten(Q, R));
        WedgePoly r1 = WedgePoly::schouten(WedgePoly::schouten(P, Q), R);
        WedgePoly r2 = WedgePoly::schouten(Q, WedgePoly::schouten(P, R));
        int sign = (((p - 1) * (q - 1)) % 2 == 0) ? 1 : -1;
        CHECK(lhs.equals_upto(r1 + (sign < 0 ? -r2 : r2)));
      }
    }
  }
}

TEST_CASE("invariance_check on volume elements") {
  JetContext ctx = lambda_ctx(1);
  LieAlgebraData so3 = LieAlgebraData::so3();
  CHECK(invariance_check(wv(ctx, so3, {0, 1, 2})));
  WedgePoly zero(&ctx, &so3, 3);
  CHECK(invariance_check(zero));
  LieAlgebraData sl2 = LieAlgebraData::sl2();
  CHECK(invariance_check(wv(ctx, sl2, {0, 1, 2})));
  // e1^e2 alone is not ad-invariant in so3
  CHECK_FALSE(invariance_check(wv(ctx, so3, {0, 1})));
}

TEST_CASE("pbw_normalize: sl2 rewriting with hbar-scaled bracket") {
  LieAlgebraData sl2 = LieAlgebraData::sl2();  // order h < e < f
  PbwAlgebra alg(&sl2);
  // word (e,h) -> h e - 2 hbar e
  auto t1 = alg.normalize({1, 0});
  REQUIRE(t1.size() == 2);
  bool saw_he = false, saw_e = false;
  for (auto& t : t1) {
    if (t.m == Mono::var(0) * Mono::var(1)) {
      CHECK(t.c.to_string() == "1");
      CHECK(t.hpow == 0);
      saw_he = true;
    }
    if (t.m == Mono::var(1)) {
      CHECK(t.c.to_string() == "-2");
      CHECK(t.hpow == 1);
      saw_e = true;
    }
  }
  CHECK(saw_he);
  CHECK(saw_e);
  // word (h,h) -> h^2
  auto t2 = alg.normalize({0, 0});
  REQUIRE(t2.size() == 1);
  CHECK(t2[0].m == Mono::var(0, 2));
  // word (f,e) -> e f - hbar h
  auto t3 = alg.normalize({2, 1});
  REQUIRE(t3.size() == 2);
  for (auto& t : t3) {
    if (t.hpow == 0) CHECK(t.m == Mono::var(1) * Mono::var(2));
    if (t.hpow == 1) {
      CHECK(t.m == Mono::var(0));
      CHECK(t.c.to_string() == "-1");
    }
  }
}

TEST_CASE("pbw_normalize is confluent on random 4-letter words") {
  LieAlgebraData so3 = LieAlgebraData::so3();
  PbwAlgebra alg(&so3);
  JetContext ctx = lambda_ctx(3, 3);
  SymMap base{&alg, {0, 1, 2}};
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<int> w;
    for (int i = 0; i < 4; ++i) w.push_back(int(rng.range(0, 2)));
    // Normalize the word directly and via a split at a random position:
    // the two-stage normalization must agree (product of normal forms).
    auto direct = alg.normalize(w);
    size_t cut = size_t(rng.range(1, 3));
    std::vector<int> left(w.begin(), w.begin() + long(cut));
    std::vector<int> right(w.begin() + long(cut), w.end());
    auto lt = alg.normalize(left);
    auto rt = alg.normalize(right);
    EnvTensor via(&ctx, &alg, 1), dir(&ctx, &alg, 1);
    for (auto& t : direct)
      dir.add(EnvTensor::Key{t.m, Mono::one(), Mono::one()},
              JetScalar(&ctx, SPoly(t.c)).mul_hbar(t.hpow));
    for (auto& a : lt)
      for (auto& b : rt)
        for (auto& t : alg.mono_product(a.m, b.m))
          via.add(EnvTensor::Key{t.m, Mono::one(), Mono::one()},
                  JetScalar(&ctx, SPoly(a.c * b.c * t.c)).mul_hbar(a.hpow + b.hpow + t.hpow));
    CHECK(dir.equals_mod(via, ctx.Nh));
  }
}

TEST_CASE("hopf: coproduct examples and antipode") {
  LieAlgebraData sl2 = LieAlgebraData::sl2();
  PbwAlgebra alg(&sl2);
  JetContext ctx = lambda_ctx(3, 2);
  SymMap base{&alg, {0, 1, 2}};

  EnvTensor h(&ctx, &alg, 1);
  h.add(EnvTensor::Key{Mono::var(0), Mono::one(), Mono::one()}, JetScalar::one(&ctx));
  EnvTensor dh = h.coproduct_on_slot(0);
  EnvTensor expect(&ctx, &alg, 2);
  expect.add(EnvTensor::Key{Mono::var(0), Mono::one(), Mono::one()}, JetScalar::one(&ctx));
  expect.add(EnvTensor::Key{Mono::one(), Mono::var(0), Mono::one()}, JetScalar::one(&ctx));
  CHECK(dh.equals_mod(expect, ctx.Nh));

  EnvTensor h2(&ctx, &alg, 1);
  h2.add(EnvTensor::Key{Mono::var(0, 2), Mono::one(), Mono::one()}, JetScalar::one(&ctx));
  EnvTensor dh2 = h2.coproduct_on_slot(0);
  EnvTensor expect2(&ctx, &alg, 2);
  expect2.add(EnvTensor::Key{Mono::var(0, 2), Mono::one(), Mono::one()}, JetScalar::one(&ctx));
  expect2.add(EnvTensor::Key{Mono::var(0), Mono::var(0), Mono::one()},
              JetScalar(&ctx, SPoly(Rational(2))));
  expect2.add(EnvTensor::Key{Mono::one(), Mono::var(0, 2), Mono::one()}, JetScalar::one(&ctx));
  CHECK(dh2.equals_mod(expect2, ctx.Nh));

  // S(e f) = f e = e f - hbar h
  EnvTensor ef(&ctx, &alg, 1);
  ef.add(EnvTensor::Key{Mono::var(1) * Mono::var(2), Mono::one(), Mono::one()},
         JetScalar::one(&ctx));
  EnvTensor s = ef.antipode_all();
  EnvTensor expect3(&ctx, &alg, 1);
  expect3.add(EnvTensor::Key{Mono::var(1) * Mono::var(2), Mono::one(), Mono::one()},
              JetScalar::one(&ctx));
  expect3.add(EnvTensor::Key{Mono::var(0), Mono::one(), Mono::one()},
              -JetScalar::hbar(&ctx));
  CHECK(s.equals_mod(expect3, ctx.Nh));
}

TEST_CASE("coproduct is coassociative and a morphism for the PBW product") {
  LieAlgebraData so3 = LieAlgebraData::so3();
  PbwAlgebra alg(&so3);
  JetContext ctx = lambda_ctx(3, 2);
  SymMap base{&alg, {0, 1, 2}};
  Rng rng(15);
  auto random_t1 = [&]() {
    EnvTensor t(&ctx, &alg, 1);
    for (int k = 0; k < 3; ++k) {
      Mono m;
      m.e[size_t(rng.range(0, 2))] = uint8_t(rng.range(0, 2));
      m.e[size_t(rng.range(0, 2))] += uint8_t(rng.range(0, 1));
      t.add(EnvTensor::Key{m, Mono::one(), Mono::one()},
            JetScalar(&ctx, SPoly(rng.rational(4, 2))));
    }
    return t;
  };
  for (int trial = 0; trial < 10; ++trial) {
    EnvTensor a = random_t1(), b = random_t1();
    // coassociativity
    EnvTensor l = a.coproduct_on_slot(0).coproduct_on_slot(0);
    EnvTensor r = a.coproduct_on_slot(0).coproduct_on_slot(1);
    CHECK(l.equals_mod(r, ctx.Nh));
    // morphism: Delta(ab) = Delta(a) Delta(b)
    EnvTensor ab = EnvTensor::product(a, b, base);
    EnvTensor lhs = ab.coproduct_on_slot(0);
    EnvTensor rhs = EnvTensor::product(a.coproduct_on_slot(0), b.coproduct_on_slot(0), base);
    CHECK(lhs.equals_mod(rhs, ctx.Nh));
  }
}

TEST_CASE("sym: powers, mixed words, round trips") {
  LieAlgebraData sl2 = LieAlgebraData::sl2();
  PbwAlgebra alg(&sl2);
  JetContext ctx = lambda_ctx(3, 2);
  SymMap base{&alg, {0, 1, 2}};

  // sym(h^3) = h.h.h
  JetScalar u(&ctx, SPoly::variable(0) * SPoly::variable(0) * SPoly::variable(0));
  EnvTensor s = sym_map(u, &ctx, base);
  REQUIRE(s.terms().size() == 1);
  CHECK(s.terms().begin()->first[0] == Mono::var(0, 3));

  // sym(h e) = (he + eh)/2 = he - hbar e
  JetScalar he(&ctx, SPoly::variable(0) * SPoly::variable(1));
  EnvTensor s2 = sym_map(he, &ctx, base);
  EnvTensor expect(&ctx, &alg, 1);
  expect.add(EnvTensor::Key{Mono::var(0) * Mono::var(1), Mono::one(), Mono::one()},
             JetScalar::one(&ctx));
  expect.add(EnvTensor::Key{Mono::var(1), Mono::one(), Mono::one()}, -JetScalar::hbar(&ctx));
  CHECK(s2.equals_mod(expect, ctx.Nh));

  // sym_inverse(sym(u)) = u on random cubics
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    SPoly p;
    for (int t = 0; t < 4; ++t) {
      Mono m;
      for (int step = 0; step < 3; ++step) m.e[size_t(rng.range(0, 2))] += 1;
      p += SPoly(rng.rational(5, 3)).mul_mono(m, Rational(1));
    }
    JetScalar cubic(&ctx, p);
    CHECK(sym_inverse(sym_map(cubic, &ctx, base), base).equals_upto(cubic));
  }
  // and degree <= 5 round trip the other way on a PBW basis sample
  for (int trial = 0; trial < 6; ++trial) {
    Mono m;
    for (int step = 0; step < 5; ++step) m.e[size_t(rng.range(0, 2))] += 1;
    EnvTensor t(&ctx, &alg, 1);
    t.add(EnvTensor::Key{m, Mono::one(), Mono::one()}, JetScalar::one(&ctx));
    CHECK(sym_map(sym_inverse(t, base), &ctx, base).equals_mod(t, ctx.Nh));
  }
}

TEST_CASE("pbw_star: sl2 examples and the h-power property") {
  LieAlgebraData sl2 = LieAlgebraData::sl2();
  PbwAlgebra alg(&sl2);
  JetContext ctx = lambda_ctx(3, 3);
  SymMap base{&alg, {0, 1, 2}};
  JetScalar h = JetScalar::variable(&ctx, 0);
  JetScalar e = JetScalar::variable(&ctx, 1);
  JetScalar hb = JetScalar::hbar(&ctx);

  // h * e - e * h = 2 hbar e
  JetScalar comm = pbw_star(h, e, base) - pbw_star(e, h, base);
  CHECK(comm.equals_upto(hb.scaled(Rational(2)) * e));
  // h * e = he + hbar e
  CHECK(pbw_star(h, e, base).equals_upto(h * e + hb * e));
  // h^{*n} = h^n for n = 1..4
  JetScalar acc = h;
  JetScalar pow = h;
  for (int n = 2; n <= 4; ++n) {
    acc = pbw_star(acc, h, base);
    pow = pow * h;
    CHECK(acc.equals_upto(pow));
  }
}

TEST_CASE("pbw_star associativity on random quadratics at Nh = 3") {
  LieAlgebraData so3 = LieAlgebraData::so3();
  PbwAlgebra alg(&so3);
  JetContext ctx = lambda_ctx(3, 3);
  SymMap base{&alg, {0, 1, 2}};
  Rng rng(99);
  auto random_quad = [&]() {
    SPoly p;
    for (int t = 0; t < 3; ++t) {
      Mono m;
      m.e[size_t(rng.range(0, 2))] += 1;
      m.e[size_t(rng.range(0, 2))] += 1;
      p += SPoly(rng.rational(4, 2)).mul_mono(m, Rational(1));
    }
    return JetScalar(&ctx, p);
  };
  for (int trial = 0; trial < 8; ++trial) {
    JetScalar a = random_quad(), b = random_quad(), c = random_quad();
    JetScalar l = pbw_star(pbw_star(a, b, base), c, base);
    JetScalar r = pbw_star(a, pbw_star(b, c, base), base);
    CHECK(l.equals_upto(r));
  }
}
