// Classical layer: dynamical r-matrices, the CDYBE residual, r-matrices of
// nondegenerate reductive splittings, the d_r differential, the classical
// composition formula and the quasi-Poisson bivector on the jet model.
//
// Base variable j of the context corresponds to the subalgebra basis letter
// sub_h[j]; its pairing <lambda, [h_i, h_j]> is linear in the base variables.

#pragma once

#include "dyt/geom.hpp"

namespace dyt {

struct DynamicalRMatrix {
  const JetContext* ctx = nullptr;
  const LieAlgebraData* L = nullptr;       // ambient algebra g
  std::vector<int> base_letters;           // basis letters of the dynamical base
  WedgePoly r;                             // degree 2, base-rational coefficients
  WedgePoly Z;                             // degree 3, constant coefficients
  std::vector<SPoly> domain_certificate;   // denominators defining U
};

// 1/2 [r,r] - sum_i h_i ^ dr/dlambda^i - Z (degree 3; zero iff dynamical).
WedgePoly cdybe_residual(const DynamicalRMatrix& R);

// Equivariance defect of a cochain c: U -> wedge^k g along the basis element
// h = letters[base_var]:  sum_j <lambda,[h,h_j]> dc/dlambda^j - [h, c].
WedgePoly equivariance_defect(const LieAlgebraData& L, const std::vector<int>& letters,
                              const WedgePoly& c, int base_var);
bool is_equivariant(const LieAlgebraData& L, const std::vector<int>& letters,
                    const WedgePoly& c);

struct SplittingData {
  std::vector<std::vector<SPoly>> W;  // pairing matrix on m, linear in lambda
  SPoly detW;
};
SplittingData splitting_pairing(const JetContext* ctx, const LieAlgebraData& L);

// r = + W^{-1} under the pinned bivector identification (sign fixed by the
// requirement that the so(3) instance satisfies the CDYBE).
// Throws IdenticallyDegenerate when det W == 0.
DynamicalRMatrix splitting_r_matrix(const JetContext* ctx, const LieAlgebraData& L);

struct NondegeneracyCertificate {
  SPoly detW;
  std::vector<Rational> witness;
};
// Witness = context base point when det W does not vanish there, otherwise a
// small-integer search.
NondegeneracyCertificate nondegeneracy_certificate(const JetContext* ctx,
                                                   const LieAlgebraData& L);

// d_r(c) = h_i ^ dc/dlambda^i + [r, c]; checks equivariance of c.
WedgePoly dr_apply(const DynamicalRMatrix& R, const WedgePoly& c);

// theta_rho = r_t^m' + rho|_{t*} over the base t, with the same Z.
// `outer` lives over base h (sub_h of L); the inner splitting h = t + m' is
// given by L.sub_t / L.comp_mp (subsets of sub_h). `tctx` is the context of
// the composed matrix (n_base = dim t).
DynamicalRMatrix compose_classical(const JetContext* tctx, const LieAlgebraData& L,
                                   const DynamicalRMatrix& outer);

// Coefficients remapped along a linear substitution of base variables:
// base var j of from-ctx is replaced by images[j] (polynomial in to-ctx).
JetScalar remap_base(const JetScalar& v, const JetContext* to_ctx,
                     const std::vector<SPoly>& images);

// pi_r = pi_lin + sum_i d/dlambda^i ^ ->h_i + ->r on the model context
// (n_base = dim h, n_group = dim g). `left` are the left-invariant field jets.
MultiVecJet build_pi_r(const DynamicalRMatrix& R, const std::vector<VecJet>& left);
// The trivector ->Z (or <-Z for side = Right).
MultiVecJet invariant_trivector(const WedgePoly& Z, const std::vector<VecJet>& fields);

// Quasi-Poisson residual in the pinned conventions: with the Leibniz rules
// fixed by the CDYBE golden instance, the Schouten square of pi_r equals
// twice the invariant trivector of Z, so the executable identity is
// (1/2)[pi,pi] - rho(Z) = 0.
MultiVecJet quasi_poisson_residual(const MultiVecJet& pi, const MultiVecJet& rho_z);

// Random h-equivariant cochains for the d_r batteries: rational multiples of
// a basis of ad_h-invariants in wedge^k g (denominators: powers of det W).
std::vector<WedgePoly> random_equivariant_cochains(const JetContext* ctx,
                                                   const LieAlgebraData& L,
                                                   const std::vector<int>& letters,
                                                   int degree, int count, Rng& rng);

}  // namespace dyt
