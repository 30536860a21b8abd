// Multidifferential operators with jet coefficients, hbar-graded.
//
// An arity-k operator is sum_j hbar^j sum_{(a_1..a_k)} c_{a}(lambda,x)
// prod_s d^{a_s} f_s with hbar-free coefficients c_a. Exact symbol calculus:
// application, composition in a slot, postcomposition, tensoring over
// disjoint coordinate blocks, the Hochschild coboundary, and triangular
// extraction of an operator from its action on monomials.

#pragma once

#include <array>
#include <functional>
#include <map>

#include "dyt/jet.hpp"

namespace dyt {

class MultiDiffOp {
public:
  using Key = std::array<Mono, 3>;  // per-slot derivative multi-indices

  MultiDiffOp() = default;
  MultiDiffOp(const JetContext* ctx, int arity) : ctx_(ctx), arity_(arity) {}
  static MultiDiffOp identity(const JetContext* ctx);          // arity 1, id
  static MultiDiffOp multiplication(const JetContext* ctx);    // arity 2, f*g

  const JetContext* ctx() const { return ctx_; }
  int arity() const { return arity_; }
  int hbar_order() const { return int(strata_.size()) - 1; }
  const std::map<Key, JetScalar>& stratum(int k) const;
  void add(int hpow, const Key& k, const JetScalar& coeff);  // coeff hbar-free

  JetScalar apply(const std::vector<JetScalar>& args) const;
  JetScalar apply1(const JetScalar& f) const;
  JetScalar apply2(const JetScalar& f, const JetScalar& g) const;

  friend MultiDiffOp operator+(const MultiDiffOp& a, const MultiDiffOp& b);
  friend MultiDiffOp operator-(const MultiDiffOp& a, const MultiDiffOp& b);
  MultiDiffOp operator-() const;
  MultiDiffOp scaled(const Rational& c) const;
  MultiDiffOp mul_hbar(int k) const;
  MultiDiffOp truncate_hbar(int maxpow) const;
  bool is_zero_mod(int hbar_order, int watermark = 1 << 20) const;

  // P(B(f_1..f_k)) for arity-1 P.
  static MultiDiffOp post_compose(const MultiDiffOp& P, const MultiDiffOp& B, int max_h);
  // B(f_1, .., P(f_s), .., f_k).
  static MultiDiffOp pre_compose_slot(const MultiDiffOp& B, int slot, const MultiDiffOp& P,
                                      int max_h);
  // B(.., C(f_s, f_{s+1}), ..) for arity-2 B and C: the arity-3 composite.
  // Keys with any slot order above order_prune are dropped (sound when the
  // composite is only evaluated on monomials of degree <= order_prune).
  static MultiDiffOp compose_slot2(const MultiDiffOp& B, int slot, const MultiDiffOp& C,
                                   int max_h, int order_prune);
  // Operators acting on disjoint coordinate blocks combined into one
  // operator of the same arity: coefficients multiply, slot indices merge.
  static MultiDiffOp tensor_blocks(const MultiDiffOp& a, const MultiDiffOp& b, int max_h);
  // Inverse of id + O(hbar), order by order to max_h.
  static MultiDiffOp invert(const MultiDiffOp& Q, int max_h);

  // Hochschild coboundary with respect to pointwise multiplication.
  MultiDiffOp hochschild_b() const;

  // Move the operator to another context along an injective variable map.
  MultiDiffOp remap(const JetContext* to, const std::vector<int>& varmap) const;

  // First-order-(1,1) skew part as a bivector coefficient matrix entry
  // source: antisym part of the hbar^k (e_i, e_j) coefficients.
  JetMatrix skew_first_order(int hpow, int n_coords) const;

  // Triangular extraction of an arity-1 operator from its action: the
  // hbar^k stratum has per-slot order <= order_cap(k). `action` must be
  // linear with jet outputs.
  static MultiDiffOp extract_arity1(const JetContext* ctx,
                                    const std::function<JetScalar(const JetScalar&)>& action,
                                    int max_h, const std::function<int(int)>& order_cap);
  // Same for bilinear actions (arity 2).
  static MultiDiffOp extract_arity2(
      const JetContext* ctx,
      const std::function<JetScalar(const JetScalar&, const JetScalar&)>& action, int max_h,
      const std::function<int(int)>& order_cap);

  std::string to_string() const;

private:
  const JetContext* ctx_ = nullptr;
  int arity_ = 0;
  std::vector<std::map<Key, JetScalar>> strata_;
};

// All coordinate monomials of total degree <= deg (base+group vars only).
std::vector<Mono> coordinate_monomials(const JetContext* ctx, int deg);
JetScalar mono_jet(const JetContext* ctx, const Mono& m);
// d^a m as (coefficient, monomial) or zero.
bool mono_derivative(const Mono& m, const Mono& a, Mono& out, Rational& coeff);

}  // namespace dyt
