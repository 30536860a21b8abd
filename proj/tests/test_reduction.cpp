// Unit tests: the composition product model, classical momentum checks,
// the reduced-bracket route on the product model, and the quantum momentum maps.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dyt/reduction.hpp"

using namespace dyt;

namespace {

LieAlgebraData sl2_composition() {
  LieAlgebraData L = LieAlgebraData::sl2();
  L.sub_h = {0, 1, 2};   // h = g
  L.sub_t = {0};         // t = Cartan
  L.comp_mp = {1, 2};    // m' = span(e, f)
  return L;
}

CompositionModel& C() {
  static std::unique_ptr<CompositionModel> c =
      build_composition_model(sl2_composition(), 6, 2, Rational(2));
  return *c;
}

}  // namespace

TEST_CASE("product model: theta, block bivector, quasi-Poisson") {
  auto& c = C();
  // theta = -(1/tau) e ^ f with zero residual
  WedgePoly expect(&c.ctx_M, &c.L, 2);
  expect.add_term({1, 2},
                  JetScalar::fraction(&c.ctx_M, SPoly(Rational(-1)), SPoly::variable(0)));
  CHECK(c.theta.r.equals_upto(expect));
  CHECK(cdybe_residual(c.theta).is_zero_upto());
  // block bivector: [pi_X, pi_X] = 0 up to watermark (Z = 0)
  MultiVecJet piX = bivector_from_matrix(&c.ctx_X, c.pi_X);
  CHECK(MultiVecJet::schouten(piX, piX).is_zero_upto(c.ctx_X.Dx - 1));
  // mu at x_H = 0 equals lambda - p* tau
  std::vector<const JetScalar*> kill(size_t(c.ctx_X.n_vars()), nullptr);
  JetScalar zero = JetScalar::zero(&c.ctx_X);
  for (int a = 0; a < c.dim_h; ++a) kill[size_t(c.ctx_X.group_lo() + a)] = &zero;
  for (int j = 0; j < c.dim_h; ++j) {
    JetScalar at0 = c.mu[size_t(j)].substitute(kill);
    JetScalar expect_mu = JetScalar::variable(&c.ctx_X, c.dim_t + j);
    if (j == 0) expect_mu -= JetScalar::variable(&c.ctx_X, 0);  // p* tau on the t letter
    CHECK(at0.equals_upto(expect_mu));
  }
  // nu at x_H = 0 equals -p* tau
  std::vector<const JetScalar*> killvh(size_t(c.ctx_vh.n_vars()), nullptr);
  JetScalar zvh = JetScalar::zero(&c.ctx_vh);
  for (int a = 0; a < c.dim_h; ++a) killvh[size_t(c.ctx_vh.group_lo() + a)] = &zvh;
  for (int j = 0; j < c.dim_h; ++j) {
    JetScalar at0 = c.nu[size_t(j)].substitute(killvh);
    JetScalar expect_nu = JetScalar::zero(&c.ctx_vh);
    if (j == 0) expect_nu = -JetScalar::variable(&c.ctx_vh, 0);
    CHECK(at0.equals_upto(expect_nu));
  }
}

TEST_CASE("abelian h: mu = lambda - p*tau exactly") {
  LieAlgebraData A = LieAlgebraData::abelian(2);
  A.sub_h = {0, 1};
  A.sub_t = {0};
  A.comp_mp = {1};
  // Inner splitting of an abelian h is degenerate (det W = 0): expect the
  // construction to reject it.
  CHECK_THROWS_AS(build_composition_model(A, 4, 1, Rational(1)), IdenticallyDegenerate);
}

TEST_CASE("momentum checks: mu, nu, base map, and a corrupted mu") {
  auto& c = C();
  CHECK(momentum_check_classical(c, MomentumKind::NuOnVH, 2).ok);
  CHECK(momentum_check_classical(c, MomentumKind::BaseOnUG, 2).ok);
  CHECK(momentum_check_classical(c, MomentumKind::MuOnX, 2).ok);
  // corrupted mu: dropping the Ad* factor (keep p* tau raw) breaks the
  // bracket morphism for the nonabelian h
  std::vector<JetScalar> bad_mu;
  for (int j = 0; j < c.dim_h; ++j) {
    JetScalar lam = JetScalar::variable(&c.ctx_X, c.dim_t + j);
    JetScalar ptau = (j == 0) ? JetScalar::variable(&c.ctx_X, 0) : JetScalar::zero(&c.ctx_X);
    bad_mu.push_back(lam - ptau);
  }
  CHECK_FALSE(momentum_check_classical(c, MomentumKind::MuOnX, 2, bad_mu).ok);
}

TEST_CASE("reduced bracket: the reduction route and its negative control") {
  auto& c = C();
  auto rep = reduced_bracket_check(c, 2);
  INFO(rep.witness);
  CHECK(rep.ok);
  auto neg = reduced_bracket_check(c, 2, true);
  CHECK_FALSE(neg.ok);
}

TEST_CASE("quantum momentum maps: all three properties and the no-Q control") {
  auto& c = C();
  auto rep = quantum_momentum_check(c, 2);
  INFO(rep.property, " / ", rep.witness);
  CHECK(rep.ok);
  auto neg = quantum_momentum_check(c, 2, true);
  CHECK_FALSE(neg.ok);
}
