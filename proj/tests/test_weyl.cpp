// Unit tests: Weyl algebra (fiber product, homotopy triple, covariant
// derivative), the Fedosov recursion, flat lifts, the star product and its
// operator form, strong invariance, and the two-star comparison.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dyt/weyl.hpp"

using namespace dyt;

namespace {

struct So3Quant {
  LieAlgebraData L;
  JetContext ctx;
  JetModel M;
  WeylAlgebra W;
  So3Quant(int Dx = 6, int Nh = 2)
      : L([] {
          auto l = LieAlgebraData::so3();
          l.sub_h = {2};
          l.comp_m = {0, 1};
          return l;
        }()),
        ctx(JetContext::make(1, 3, Dx, Nh, {Rational(1)})),
        M(build_jet_model(&ctx, &L, splitting_r_matrix(&ctx, L))),
        W(&M, Nh) {}
};

So3Quant& golden() {
  static So3Quant g;
  return g;
}

// Random element with Fedosov degree at most max_deg. The inner-derivation
// cross-checks are only faithful on elements that keep the capped
// intermediates inside the degree budget, so callers pass cap()-2 etc.
WeylElement random_element(const WeylAlgebra& W, Rng& rng, int nterms = 6,
                           int max_deg = 1 << 20) {
  const JetContext* c = W.ctx();
  WeylElement e(c, W.cap());
  int n = W.model()->n_coords();
  for (int t = 0; t < nterms; ++t) {
    WeylKey k;
    k.hpow = uint8_t(rng.range(0, 1));
    for (int step = 0; step < 3; ++step)
      if (rng.range(0, 1)) k.y.e[size_t(rng.range(0, n - 1))] += 1;
    if (rng.range(0, 2) == 0) k.dxmask |= uint16_t(1u << rng.range(0, n - 1));
    if (rng.range(0, 3) == 0) k.dxmask |= uint16_t(1u << rng.range(0, n - 1));
    if (k.fdeg() > max_deg) continue;
    SPoly coeff = SPoly(rng.rational(3, 2));
    if (rng.range(0, 1))
      coeff = coeff * SPoly::variable(int(rng.range(0, n - 1)));
    e.add(k, JetScalar(c, coeff));
  }
  return e;
}

}  // namespace

TEST_CASE("fiber product: unit, basic contractions, associativity") {
  auto& g = golden();
  const JetContext* c = &g.ctx;
  Rng rng(7);
  WeylElement one(c, g.W.cap());
  one.add(WeylKey{}, JetScalar::one(c));
  for (int t = 0; t < 4; ++t) {
    WeylElement a = random_element(g.W, rng);
    CHECK(g.W.product(a, one).equals_upto(a));
    CHECK(g.W.product(one, a).equals_upto(a));
  }
  // y^i o y^j = y^i y^j + (hb/2) pi^{ij}; [y^i, y^j] = hb pi^{ij}
  int n = g.M.n_coords();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      WeylElement yi(c, g.W.cap()), yj(c, g.W.cap());
      WeylKey ki, kj;
      ki.y = Mono::var(i);
      kj.y = Mono::var(j);
      yi.add(ki, JetScalar::one(c));
      yj.add(kj, JetScalar::one(c));
      WeylElement comm = g.W.commutator(yi, yj);
      WeylElement expect(c, g.W.cap());
      WeylKey kc;
      kc.hpow = 1;
      expect.add(kc, g.M.pi_mat[size_t(i)][size_t(j)]);
      CHECK(comm.equals_upto(expect));
      // and the symmetric part: y^i o y^j - y^i y^j - (hb/2) pi^{ij} = 0
      WeylElement prod = g.W.product(yi, yj);
      WeylElement both(c, g.W.cap());
      WeylKey km;
      km.y = Mono::var(i) * Mono::var(j);
      both.add(km, JetScalar::one(c));
      both.add(kc, g.M.pi_mat[size_t(i)][size_t(j)].scaled(Rational(BigInt(1), BigInt(2))));
      CHECK(prod.equals_upto(both));
    }
  }
  // associativity on random elements
  for (int t = 0; t < 3; ++t) {
    WeylElement a = random_element(g.W, rng, 4);
    WeylElement b = random_element(g.W, rng, 4);
    WeylElement cc = random_element(g.W, rng, 4);
    CHECK(g.W.product(g.W.product(a, b), cc)
              .equals_upto(g.W.product(a, g.W.product(b, cc))));
  }
  // serial/parallel agreement
  WeylElement a = random_element(g.W, rng, 12);
  WeylElement b = random_element(g.W, rng, 12);
  CHECK(g.W.product_serial(a, b).equals_upto(g.W.product(a, b)));
  // the center: y-free elements commute with everything
  WeylElement central(c, g.W.cap());
  WeylKey kc2;
  kc2.dxmask = 0;
  central.add(kc2, JetScalar::variable(c, 0));
  CHECK(g.W.commutator(central, a).is_zero_upto());
}

TEST_CASE("homotopy triple: kappa^2 = 0, delta^2 = 0, delta kappa + kappa delta + sigma = id") {
  auto& g = golden();
  Rng rng(11);
  for (int t = 0; t < 8; ++t) {
    WeylElement a = random_element(g.W, rng);
    CHECK(g.W.kappa(g.W.kappa(a)).is_zero_upto());
    CHECK(g.W.delta(g.W.delta(a)).is_zero_upto());
    WeylElement hk = g.W.delta(g.W.kappa(a)) + g.W.kappa(g.W.delta(a));
    WeylElement sig = WeylElement::from_function(g.W.ctx(), g.W.cap(), g.W.sigma(a));
    CHECK((hk + sig).equals_upto(a));
  }
  // kappa(y^1 dx^2) = 1/2 y^1 y^2
  const JetContext* c = &g.ctx;
  WeylElement a(c, g.W.cap());
  WeylKey k;
  k.y = Mono::var(1);
  k.dxmask = uint16_t(1u << 2);
  a.add(k, JetScalar::one(c));
  WeylElement ka = g.W.kappa(a);
  REQUIRE(ka.terms().size() == 1);
  CHECK(ka.terms().begin()->first.y == Mono::var(1) * Mono::var(2));
  CHECK(ka.terms().begin()->second.num().constant_value().to_string() == "1/2");
  // (delta kappa + kappa delta)(y^1 dx^2) = y^1 dx^2
  CHECK((g.W.delta(ka) + g.W.kappa(g.W.delta(a))).equals_upto(a));
}

TEST_CASE("delta agrees with its inner-derivation form (orientation pinned)") {
  auto& g = golden();
  Rng rng(13);
  WeylElement gen = g.W.delta_generator();
  for (int t = 0; t < 5; ++t) {
    WeylElement a = random_element(g.W, rng, 6, g.W.cap() - 1);
    WeylElement inner = g.W.commutator(gen, a).div_hbar();
    CHECK((g.W.delta(a) + inner).is_zero_upto());  // delta = -(1/hb)[w y dx, -]
  }
}

TEST_CASE("covariant derivative: anti-commutes with delta, squares to curvature") {
  auto& g = golden();
  Rng rng(17);
  for (int t = 0; t < 5; ++t) {
    WeylElement a = random_element(g.W, rng, 6, g.W.cap() - 2);
    WeylElement anti = g.W.delta(g.W.covariant_d(a)) + g.W.covariant_d(g.W.delta(a));
    CHECK(anti.is_zero_upto());
    WeylElement dd = g.W.covariant_d(g.W.covariant_d(a));
    WeylElement rhs = g.W.commutator(g.W.curvature_element(), a).div_hbar();
    CHECK((dd + rhs).is_zero_upto());  // d^2 = -(1/hb)[R_W, -]
  }
  // d is a derivation of the fiber product
  for (int t = 0; t < 3; ++t) {
    WeylElement a = random_element(g.W, rng, 4);
    WeylElement b = random_element(g.W, rng, 4);
    // sign: d(a o b) = da o b + (-1)^{|a|} a o db; use even-form a
    WeylElement a_even(g.W.ctx(), g.W.cap());
    for (auto& kv : a.terms())
      if (kv.first.form_deg() % 2 == 0) a_even.add(kv.first, kv.second);
    WeylElement lhs = g.W.covariant_d(g.W.product(a_even, b));
    WeylElement rhs = g.W.product(g.W.covariant_d(a_even), b) +
                      g.W.product(a_even, g.W.covariant_d(b));
    CHECK(lhs.equals_upto(rhs));
  }
}

TEST_CASE("darboux cross-check: d = d_plain + (1/hb)[gamma_generator, -]") {
  // Hand-built model: constant Darboux omega on 2 coordinates with a random
  // constant fully-symmetric lowered connection.
  JetContext ctx = JetContext::make(0, 2, 4, 1, {});
  JetModel M;
  M.ctx = &ctx;
  M.pi_mat = jet_matrix_identity(&ctx, 2);
  M.pi_mat[0][0] = JetScalar::zero(&ctx);
  M.pi_mat[1][1] = JetScalar::zero(&ctx);
  M.pi_mat[0][1] = JetScalar::one(&ctx);
  M.pi_mat[1][0] = -JetScalar::one(&ctx);
  M.omega_mat = invert_bivector(M.pi_mat);
  M.pi = bivector_from_matrix(&ctx, M.pi_mat);
  M.omega = form_from_matrix(&ctx, M.omega_mat);
  // fully symmetric lowered Gamma_{ijk}: raise first index with pi
  Rng rng(23);
  std::vector<JetScalar> low(8, JetScalar::zero(&ctx));
  auto idx = [](int i, int j, int k) { return size_t(((i * 2) + j) * 2 + k); };
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j)
      for (int k = j; k < 2; ++k) {
        JetScalar v(&ctx, SPoly(rng.rational(3, 2)));
        low[idx(i, j, k)] = v;
        low[idx(i, k, j)] = v;
        low[idx(j, i, k)] = v;
        low[idx(j, k, i)] = v;
        low[idx(k, i, j)] = v;
        low[idx(k, j, i)] = v;
      }
  M.conn.ctx = &ctx;
  M.conn.Gamma.assign(2, JetMatrix(2, std::vector<JetScalar>(2, JetScalar::zero(&ctx))));
  for (int m = 0; m < 2; ++m)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        JetScalar s = JetScalar::zero(&ctx);
        for (int i = 0; i < 2; ++i) s += M.pi_mat[size_t(m)][size_t(i)] * low[idx(i, j, k)];
        M.conn.Gamma[size_t(m)][size_t(j)][size_t(k)] = s;
      }
  REQUIRE(connection_torsion_free(M.conn));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        REQUIRE(covariant_derivative_form(M.conn, M.omega_mat, i, j, k).is_zero_upto());
  M.curv = curvature(M.conn, M.omega_mat);
  WeylAlgebra W(&M, 1);
  WeylElement G = W.gamma_generator();
  Rng rng2(29);
  for (int t = 0; t < 5; ++t) {
    WeylElement a = random_element(W, rng2, 6, W.cap() - 2);
    // plain d: only the coefficient derivatives
    WeylElement dplain(W.ctx(), W.cap());
    for (auto& kv : a.terms()) {
      for (int i = 0; i < 2; ++i) {
        if (kv.first.dxmask & (1u << i)) continue;
        JetScalar d = kv.second.derivative(i);
        if (d.is_zero()) continue;
        WeylKey key = kv.first;
        key.dxmask = uint16_t(key.dxmask | (1u << i));
        int below = __builtin_popcount(kv.first.dxmask & ((1u << i) - 1));
        if (below & 1) d = -d;
        dplain.add(key, d);
      }
    }
    WeylElement rhs_plus = dplain + W.commutator(G, a).div_hbar();
    CHECK(W.covariant_d(a).equals_upto(rhs_plus));
  }
}

TEST_CASE("fedosov recursion: golden instance") {
  auto& g = golden();
  WeylElement r = g.W.solve_connection({});
  // kappa(r) = 0
  CHECK(g.W.kappa(r).is_zero_upto());
  // r lives in W_3, 1-forms
  CHECK(r.min_degree() >= 3);
  for (auto& kv : r.terms()) CHECK(kv.first.form_deg() == 1);
  // degree-3 part = kappa(-R_W)
  CHECK(r.component(3).equals_upto(g.W.kappa(-g.W.curvature_element())));
  // fixed point: r = kappa(-R + d r + (1/hb) r^2)
  WeylElement rhs = g.W.kappa(-g.W.curvature_element() + g.W.covariant_d(r) +
                              g.W.product(r, r).div_hbar());
  CHECK(r.equals_upto(rhs));
  // D^2 = 0 on random elements (sound through degree cap-4 in the capped
  // arithmetic: each D application guards two degrees)
  Rng rng(31);
  for (int t = 0; t < 3; ++t) {
    WeylElement a = random_element(g.W, rng, 4, g.W.cap() - 4);
    CHECK(g.W.fedosov_D(r, g.W.fedosov_D(r, a)).up_to_degree(g.W.cap() - 4).is_zero_upto());
  }
  // uniqueness clause: the iterated map reproduces the graded solution
  WeylElement it = g.W.make();
  for (int n = 0; n <= g.W.cap(); ++n)
    it = g.W.kappa(-g.W.curvature_element() + g.W.covariant_d(it) +
                   g.W.product(it, it).div_hbar());
  CHECK(it.equals_upto(r));
}

TEST_CASE("flat lifts: trivial, abelian Taylor, golden D-closedness") {
  auto& g = golden();
  WeylElement r = g.W.solve_connection({});
  // f = 1 lifts to 1
  WeylElement one = g.W.flat_lift(JetScalar::one(g.W.ctx()), r);
  WeylElement expect(g.W.ctx(), g.W.cap());
  expect.add(WeylKey{}, JetScalar::one(g.W.ctx()));
  CHECK(one.equals_upto(expect));
  // sigma(lift(f)) = f and D(lift(f)) = 0
  for (int v = 0; v < 4; ++v) {
    JetScalar f = JetScalar::variable(g.W.ctx(), v);
    WeylElement lift = g.W.flat_lift(f, r);
    CHECK(g.W.sigma(lift).equals_upto(f));
    CHECK(g.W.fedosov_D(r, lift).up_to_degree(g.W.cap() - 2).is_zero_upto());
  }
  JetScalar mixed = JetScalar::variable(g.W.ctx(), 0) * JetScalar::variable(g.W.ctx(), 2) +
                    JetScalar::variable(g.W.ctx(), 1);
  WeylElement lift = g.W.flat_lift(mixed, r);
  CHECK(g.W.sigma(lift).equals_upto(mixed));
  CHECK(g.W.fedosov_D(r, lift).up_to_degree(g.W.cap() - 2).is_zero_upto());

  // abelian flat model: lift(x1) = x1 + y_{x1}
  LieAlgebraData A = LieAlgebraData::abelian(2);
  A.sub_h = {0, 1};
  JetContext actx = JetContext::make(2, 2, 4, 1, {Rational(0), Rational(0)});
  DynamicalRMatrix Ra{&actx, &A, {0, 1}, WedgePoly(&actx, &A, 2), WedgePoly(&actx, &A, 3), {}};
  Ra.r.add_term({0, 1}, JetScalar::one(&actx));
  JetModel MA = build_jet_model(&actx, &A, Ra);
  WeylAlgebra WA(&MA, 1);
  WeylElement ra = WA.solve_connection({});
  CHECK(ra.is_zero_upto());  // flat case: the recursion vanishes
  JetScalar x1 = JetScalar::variable(&actx, 2);
  WeylElement lx1 = WA.flat_lift(x1, ra);
  WeylElement ex(WA.ctx(), WA.cap());
  WeylKey k0;
  ex.add(k0, x1);
  WeylKey k1;
  k1.y = Mono::var(2);
  ex.add(k1, JetScalar::one(&actx));
  CHECK(lx1.equals_upto(ex));
  // Moyal commutator: x1 * x2 - x2 * x1 = hb * pi^{x1,x2} = hb * 1
  JetScalar x2 = JetScalar::variable(&actx, 3);
  JetScalar comm = WA.star(x1, x2, ra) - WA.star(x2, x1, ra);
  CHECK(comm.equals_upto(JetScalar::hbar(&actx)));
}

TEST_CASE("star product: unit, semiclassical commutator, associativity") {
  auto& g = golden();
  WeylElement r = g.W.solve_connection({});
  MultiDiffOp star = g.W.star_operator(r);
  const JetContext* c = g.W.ctx();
  Rng rng(37);
  // 1 * f = f * 1 = f
  for (int t = 0; t < 3; ++t) {
    Mono m;
    m.e[size_t(rng.range(0, 3))] += 1;
    m.e[size_t(rng.range(0, 3))] += 1;
    JetScalar f = mono_jet(c, m);
    CHECK(star.apply2(JetScalar::one(c), f).equals_upto(f));
    CHECK(star.apply2(f, JetScalar::one(c)).equals_upto(f));
  }
  // f*g - g*f = hb {f,g} + O(hb^2)
  for (int t = 0; t < 4; ++t) {
    Mono m1, m2;
    m1.e[size_t(rng.range(0, 3))] += 1;
    m1.e[size_t(rng.range(0, 3))] += 1;
    m2.e[size_t(rng.range(0, 3))] += 1;
    JetScalar f = mono_jet(c, m1), gg = mono_jet(c, m2);
    JetScalar comm = star.apply2(f, gg) - star.apply2(gg, f);
    JetScalar pb = poisson_bracket(g.M.pi_mat, f, gg);
    CHECK((comm - pb.mul_hbar(1)).truncate_hbar(1).is_zero_upto());
  }
  // star matches the direct sigma(lift o lift) route
  JetScalar f = JetScalar::variable(c, 0) * JetScalar::variable(c, 2);
  JetScalar gg = JetScalar::variable(c, 1);
  CHECK(star.apply2(f, gg).equals_upto(g.W.star(f, gg, r)));
  // associativity on monomial triples of degree <= 2
  auto monos = coordinate_monomials(c, 2);
  for (auto& ma : monos) {
    for (auto& mb : monos) {
      if (rng.range(0, 3)) continue;  // sample in the unit test; full in acceptance
      for (auto& mc : monos) {
        if (rng.range(0, 3)) continue;
        JetScalar A = mono_jet(c, ma), B = mono_jet(c, mb), C = mono_jet(c, mc);
        JetScalar lhs = star.apply2(star.apply2(A, B), C);
        JetScalar rhs = star.apply2(A, star.apply2(B, C));
        CHECK((lhs - rhs).truncate_hbar(g.W.nh()).is_zero_upto());
      }
    }
  }
}

TEST_CASE("strong invariance and its negative control") {
  auto& g = golden();
  WeylElement r0 = g.W.solve_connection({});
  MultiDiffOp star0 = g.W.star_operator(r0);
  CHECK(strong_invariance_check(g.W, star0, 0, 3).ok);

  // omega_h = d(lambda theta^3): iota_chi omega_h = -d lambda != 0 -> must fail
  FormJet beta = g.M.coframe[2].scaled(JetScalar::variable(g.W.ctx(), 0));
  FormJet dbeta = beta.exterior_d();
  REQUIRE_FALSE(dbeta.contract(g.M.chi[0]).is_zero_upto(g.ctx.Dx - 2));
  WeylElement r1 = g.W.solve_connection({dbeta});
  MultiDiffOp star1 = g.W.star_operator(r1);
  CHECK_FALSE(strong_invariance_check(g.W, star1, 0, 3).ok);
}

TEST_CASE("two-star comparison: leading difference equals pi#(char difference)") {
  auto& g = golden();
  // beta = theta^3: d beta is invariant with iota_chi d beta = 0
  FormJet beta = g.M.coframe[2];
  FormJet dbeta = beta.exterior_d();
  REQUIRE(dbeta.contract(g.M.chi[0]).is_zero_upto(g.ctx.Dx - 2));
  REQUIRE_FALSE(dbeta.is_zero_upto(g.ctx.Dx - 2));
  WeylElement r0 = g.W.solve_connection({});
  WeylElement r1 = g.W.solve_connection({dbeta});
  MultiDiffOp s0 = g.W.star_operator(r0);
  MultiDiffOp s1 = g.W.star_operator(r1);
  // identical forms -> identical stars
  auto same = star_difference_compare(g.W, s0, s0, {}, {});
  CHECK(same.ok);
  // difference at stratum 0 -> stars differ first at hb^2 by pi#(d beta)
  auto rep = star_difference_compare(g.W, s1, s0, {dbeta}, {});
  INFO(rep.message);
  CHECK(rep.ok);
  CHECK(rep.leading_order == 2);
  // difference pushed one stratum up -> leading order hb^3 (beyond Nh = 2)
  WeylElement r2 = g.W.solve_connection({FormJet(g.W.ctx(), 2), dbeta});
  MultiDiffOp s2 = g.W.star_operator(r2);
  auto rep2 = star_difference_compare(g.W, s2, s0, {FormJet(g.W.ctx(), 2), dbeta}, {});
  INFO(rep2.message);
  CHECK(rep2.ok);
  CHECK(rep2.leading_order == 3);
}
