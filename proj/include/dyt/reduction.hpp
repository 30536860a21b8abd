// The product jet model X = V x H x U x G for the composition formula:
// momentum maps mu and nu, the classical momentum/reduction checks of the
// reduction route, and the quantum momentum map checks for N and M.
//
// Coordinates on X: base block (tau, lambda_1..lambda_d), group block
// (x_H then x_G). The outer r-matrix rho lives over h*; the acceptance
// instances take rho = 0, for which the U x G factor carries the explicit
// compatible star of the trivial twist.

#pragma once

#include <memory>

#include "dyt/twist.hpp"

namespace dyt {

// Self-referential (the models point at the contexts held inside), so it
// must be built in place and never copied.
struct CompositionModel {
  CompositionModel() = default;
  CompositionModel(const CompositionModel&) = delete;
  CompositionModel& operator=(const CompositionModel&) = delete;
  CompositionModel(CompositionModel&&) = delete;

  // g with the inner splitting of h declared (sub_h, sub_t, comp_mp).
  LieAlgebraData L;
  LieAlgebraData Lh;   // h restricted, sub_h = positions of t, comp_m = m'
  int dim_t = 0, dim_h = 0, dim_g = 0;

  JetContext ctx_vh;     // (tau ; x_H)
  JetContext ctx_ug;     // (lambda ; x_G)
  JetContext ctx_X;      // (tau, lambda ; x_H, x_G)
  JetContext ctx_M;      // (tau ; x_M): the reduced model U/\V x G
  JetContext ctx_hstar;  // (lambda) only: the domain of N

  JetModel M_vh;  // inner golden model (V x H with r_t^m)
  JetModel M_ug;  // outer model (U x G with rho = 0)
  JetModel M_red; // reduced model carrying theta_rho

  DynamicalRMatrix theta;  // compose_classical output over t

  // variable maps into ctx_X
  std::vector<int> map_vh, map_ug;

  JetMatrix pi_X;                  // block bivector on X
  std::vector<JetScalar> mu;       // components of mu on ctx_X (indexed by h)
  std::vector<JetScalar> nu;       // components of nu on ctx_vh
  std::vector<JetScalar> bch_z;    // coordinates of y x on ctx_X (g-valued)
};

// Heap-allocated so the self-references stay valid for the model's lifetime.
std::unique_ptr<CompositionModel> build_composition_model(const LieAlgebraData& L, int Dx,
                                                          int Nh, const Rational& tau0);

struct MomentumReport {
  bool ok = true;
  std::string witness;
};

// Which momentum map to check on which model.
enum class MomentumKind { MuOnX, NuOnVH, BaseOnUG };
// Verifies {m*h_i, m*h_j} = m*[h_i,h_j] and that {m*h_i, -} generates the
// declared action fields, on a monomial battery. `mu_override`, when
// nonempty, replaces the model's mu (the corrupted-momentum control).
MomentumReport momentum_check_classical(const CompositionModel& C, MomentumKind kind,
                                        int battery_deg,
                                        const std::vector<JetScalar>& mu_override = {});

// The three bracket identities of the reduction computation on X, after
// substituting the constraint lambda := Ad*_{x^{-1}}(p* tau).
// `flip_theta_sign` corrupts the expected reduced bracket (negative control).
MomentumReport reduced_bracket_check(const CompositionModel& C, int battery_deg,
                                     bool flip_theta_sign = false);

struct QuantumMomentumReport {
  bool ok = true;
  std::string property;
  std::string witness;
};

// Builds the compatible star on V x H, N = Q^{-1} o U(nu*) o sym, and checks
// (i) the algebra-morphism property on quadratic generators,
// (ii) [N(h), f]_{*'} = hbar {nu* h, f},
// (iii) M = (N (x) inc) o Delta against mu on the product star.
// skip_gauge = true omits the Q-conjugation (the negative control).
QuantumMomentumReport quantum_momentum_check(const CompositionModel& C, int battery_deg,
                                             bool skip_gauge = false);

}  // namespace dyt
