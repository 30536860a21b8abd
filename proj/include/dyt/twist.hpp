// Gauge transform Q, the compatible star-product, the compatibility-axiom
// checks, extraction and reconstruction of the dynamical twist, the twist
// equation, twist gauge equivalence, and the obstruction-theory primitives.

#pragma once

#include "dyt/env.hpp"
#include "dyt/weyl.hpp"

namespace dyt {

// Letters of the dynamical base inside g, as a SymMap over the full algebra.
struct TwistSetup {
  const JetModel* model = nullptr;
  const PbwAlgebra* alg = nullptr;  // PBW engine of g
  SymMap base;                      // base variables <-> base_letters
  int Nh = 0;
};

// ->u for u a word of basis letters, applied to a function jet.
JetScalar apply_left_word(const JetModel& M, const std::vector<int>& word,
                          const JetScalar& f);

// Q(f u) = f * a(sym(u)); id + O(hbar), invertible, Q(h) = h.
// Throws NotStronglyInvariant if the star fails the invariance battery.
MultiDiffOp build_gauge_Q(const TwistSetup& S, const MultiDiffOp& star_op);

// *' = Q^{-1}(Q(f) * Q(g)) as an operator.
MultiDiffOp compatible_star(const TwistSetup& S, const MultiDiffOp& star_op,
                            const MultiDiffOp& Q);

struct CompatReport {
  bool ok = true;
  std::string axiom;    // which axiom failed
  std::string witness;
};
// The three compatibility axioms plus strong base-invariance, on the
// monomial battery of total degree <= battery_deg.
CompatReport compatibility_axioms_check(const TwistSetup& S, const MultiDiffOp& starP,
                                        int battery_deg);

// Reads J(lambda) from the G-invariant bidifferential operator at x = 0
// (triangular solve against the PBW dual basis); verifies the round trip
// through the reconstruction formula on a mixed battery and throws
// ExtractionInconsistent on mismatch.
EnvTensor extract_twist(const TwistSetup& S, const MultiDiffOp& starP);
// Same solve for any bilinear action (used to close the twist <-> star
// bijection in both directions).
EnvTensor extract_twist_from_action(
    const TwistSetup& S,
    const std::function<JetScalar(const JetScalar&, const JetScalar&)>& action,
    bool round_trip_check = true);

// The reconstruction formula (abelian dynamical base): action of the
// compatible star built from J on a pair of jets.
JetScalar reconstruct_star_apply(const TwistSetup& S, const EnvTensor& J,
                                 const JetScalar& g1, const JetScalar& g2);

// J^{12,3}(l) * J^{1,2}(l + hb h^(3)) - J^{1,23}(l) * J^{2,3}(l), Phi = 1.
EnvTensor twist_equation_residual(const TwistSetup& S, const EnvTensor& J);

// Equivariance defect of an arity-k twist tensor along base letter h.
EnvTensor twist_equivariance_defect(const TwistSetup& S, const EnvTensor& J, int base_var);
bool twist_is_equivariant(const TwistSetup& S, const EnvTensor& J);

// T^{12} * J1 - J2 * T^1(l + hb h^(2)) * T^2 == 0 mod hbar^{Nh+1}.
struct GaugeReport {
  bool ok = false;
  std::string message;
};
GaugeReport twist_gauge_check(const TwistSetup& S, const EnvTensor& J1, const EnvTensor& J2,
                              const EnvTensor& T);
// Inverse of a 1 + O(hbar) tensor, order by order mod hbar^{Nh+1}.
EnvTensor env_inverse(const TwistSetup& S, const EnvTensor& X);

// Obstruction step for two strongly invariant stars agreeing up to some
// order: returns the leading order, the skew bivector part B (with its side
// conditions [pi_r, B] = 0 and B(dh, -) = 0 checked) and the Hochschild
// potential E when the bounded-order linear solve succeeds.
struct ObstructionReport {
  int order = -1;             // first hbar order where the stars differ
  JetMatrix B;                // skew part as a bivector matrix
  bool B_closed = false;      // [pi_r, B] = 0
  bool B_base_flat = false;   // B(dh, -) = 0 for base directions
  bool E_solved = false;
  MultiDiffOp E;              // arity 1, E(h) = 0, order >= 2 part
  std::string message;
};
// Throws NotCocycle when the difference fails Hochschild closedness.
ObstructionReport obstruction_step(const TwistSetup& S, const MultiDiffOp& star1,
                                   const MultiDiffOp& star2);

}  // namespace dyt
