// Enveloping-algebra layer: PBW normal form in U(g_hbar) (relations
// xy - yx = hbar [x,y]), tensor powers with coefficient functions of the
// base variables, coproduct, antipode, symmetrization and the PBW
// star-product on polynomial functions of the base.
//
// PBW basis order = basis declaration order of the Lie algebra. A PBW
// monomial is stored as an exponent vector (Mono) over the basis letters.

#pragma once

#include <array>
#include <map>
#include <mutex>

#include "dyt/lie.hpp"

namespace dyt {

struct PbwTerm {
  Mono m;       // normal-ordered monomial
  Rational c;
  int hpow = 0; // power of hbar carried by the rewriting
};

// Normalization engine with caching, one per Lie algebra.
class PbwAlgebra {
public:
  explicit PbwAlgebra(const LieAlgebraData* L) : L_(L) {}
  const LieAlgebraData* lie() const { return L_; }

  // Rewrites an arbitrary word of basis letters into the PBW basis.
  std::vector<PbwTerm> normalize(const std::vector<int>& word) const;
  // Product of two normal monomials.
  std::vector<PbwTerm> mono_product(const Mono& a, const Mono& b) const;
  static std::vector<int> mono_to_word(const Mono& m);

private:
  const LieAlgebraData* L_;
  mutable std::mutex mu_;
  mutable std::map<std::vector<int>, std::vector<PbwTerm>> cache_;
};

// Rewriting mode for slot products: the PBW layer of the base uses the
// hbar-scaled relations of U(h_hbar) (xy - yx = hbar [x,y]); the twist
// tensors live in ordinary U(g)^(x)k [[hbar]], where the rewriting carries
// no hbar (the hbar series sits in the coefficients only).
enum class ProductMode { HbarScaled, Ordinary };

// Identification of base variables with letters of a subalgebra:
// base variable j <-> basis letter letters[j].
struct SymMap {
  const PbwAlgebra* alg = nullptr;
  std::vector<int> letters;
  bool abelian(const LieAlgebraData& L) const { return L.is_abelian_on(letters); }
};

class EnvTensor {
public:
  EnvTensor() = default;
  EnvTensor(const JetContext* ctx, const PbwAlgebra* alg, int arity)
      : ctx_(ctx), alg_(alg), arity_(arity) {}
  static EnvTensor unit(const JetContext* ctx, const PbwAlgebra* alg, int arity);

  using Key = std::array<Mono, 3>;  // slots beyond arity stay Mono::one()

  const JetContext* ctx() const { return ctx_; }
  const PbwAlgebra* alg() const { return alg_; }
  int arity() const { return arity_; }
  const std::map<Key, JetScalar>& terms() const { return terms_; }

  void add(const Key& k, const JetScalar& coeff);
  bool is_zero_mod(int hbar_order) const;  // zero mod hbar^(order+1)
  bool equals_mod(const EnvTensor& o, int hbar_order) const;

  friend EnvTensor operator+(const EnvTensor& a, const EnvTensor& b);
  friend EnvTensor operator-(const EnvTensor& a, const EnvTensor& b);
  EnvTensor operator-() const;
  EnvTensor scaled(const JetScalar& c) const;

  // Slotwise product; coefficients multiply through the PBW star over
  // `base` (pointwise when the base subalgebra is abelian).
  static EnvTensor product(const EnvTensor& a, const EnvTensor& b, const SymMap& base,
                           ProductMode mode = ProductMode::HbarScaled);

  EnvTensor coproduct_on_slot(int slot) const;  // arity + 1
  EnvTensor antipode_all() const;               // U(g_hbar) antipode
  EnvTensor swap_slots(int s1, int s2) const;
  // Inserts unit slots: `front` of them before, `back` after the payload.
  EnvTensor extend(int front, int back) const;
  // The hbar-Taylor shift lambda -> lambda + hbar h^(target): the displayed
  // finite sum of lambda-derivatives with symmetric h-insertions.
  EnvTensor hbar_shift(int target_slot, const SymMap& base,
                       ProductMode mode = ProductMode::HbarScaled) const;
  // ad_x as a derivation on every slot (the adjoint action of the mode's
  // algebra; Ordinary for twist tensors in U(g)).
  EnvTensor ad_action(int basis_index, ProductMode mode = ProductMode::HbarScaled) const;
  EnvTensor derivative_base(int var) const;
  EnvTensor truncate_hbar(int maxpow) const;
  // Total hbar degree: letters contribute 0; only coefficients carry hbar.
  std::string to_string() const;

private:
  const JetContext* ctx_ = nullptr;
  const PbwAlgebra* alg_ = nullptr;
  int arity_ = 0;
  std::map<Key, JetScalar> terms_;
};

// sym: S(h) -> U(h_hbar), sending h^n to h^n. Input: polynomial in the base
// variables (x-free JetScalar); output arity-1 tensor.
EnvTensor sym_map(const JetScalar& u, const JetContext* ctx, const SymMap& base);
// Inverse (triangular in the PBW degree): defined on tensors supported on
// U of the base subalgebra.
JetScalar sym_inverse(const EnvTensor& t, const SymMap& base);
// u *_PBW v = sym^{-1}(sym(u) sym(v)).
JetScalar pbw_star(const JetScalar& u, const JetScalar& v, const SymMap& base);
// Coefficient product used inside EnvTensor::product: pointwise for an
// abelian base; sym-route for polynomial coefficients over a nonabelian one.
JetScalar coefficient_star(const JetScalar& u, const JetScalar& v, const SymMap& base);

}  // namespace dyt
