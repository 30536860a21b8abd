// Lie algebra by structure constants and the algebraic Schouten calculus on
// wedge powers with coefficient functions of the base variables.
//
// Sign conventions (pinned so the so(3) golden instance satisfies the CDYBE,
// see the dynr tests):
//   [x, u^v] = [x,u]^v + u^[x,v]
//   [x^y, Q] = x^[y,Q] - y^[x,Q]
// which for monomials X = x_1^...^x_p, Y = y_1^...^y_q expands to
//   [X, Y] = sum_{k,l} (-1)^{k+l} [x_k, y_l] ^ X_k-hat ^ Y_l-hat.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dyt/jet.hpp"

namespace dyt {

struct JacobiReport {
  bool ok = true;
  bool antisymmetry = true;      // false: antisymmetry violated
  std::array<int, 4> witness{};  // (i,j) for antisymmetry, (i,j,k,l) for Jacobi
  std::string message;
};

class LieAlgebraData {
public:
  int n = 0;
  std::vector<std::string> basis_names;
  std::vector<Rational> c;  // c^k_{ij}, flattened as ((k*n)+i)*n+j
  std::vector<int> sub_h;   // basis indices of the subalgebra h
  std::vector<int> comp_m;  // complement indices (reductive when declared)
  std::vector<int> sub_t;   // optional inner subalgebra t of h
  std::vector<int> comp_mp; // complement of t in h

  const Rational& c3(int k, int i, int j) const {
    return c[size_t((k * n + i) * n + j)];
  }
  void set_bracket(int i, int j, int k, Rational v) {
    c[size_t((k * n + i) * n + j)] = v;
    c[size_t((k * n + j) * n + i)] = -v;
  }

  static LieAlgebraData make(int n, std::vector<std::string> names);
  static LieAlgebraData so3();
  static LieAlgebraData sl2();  // basis order h < e < f
  static LieAlgebraData abelian(int n);

  JacobiReport jacobi_check() const;
  bool subalgebra_closed(const std::vector<int>& idx) const;
  // [h, m] subset m for the declared splitting.
  bool splitting_reductive() const;
  bool is_abelian_on(const std::vector<int>& idx) const;

  // Sub-Lie-algebra on a subset of the basis (re-indexed).
  LieAlgebraData restricted(const std::vector<int>& idx,
                            std::vector<int> new_sub_h = {},
                            std::vector<int> new_comp_m = {}) const;
};

// Element of C(U) (x) wedge^k g: a polyvector on the base-parametrized wedge
// algebra. Keys are strictly ascending index tuples of length degree().
class WedgePoly {
public:
  WedgePoly() = default;
  WedgePoly(const JetContext* ctx, const LieAlgebraData* L, int degree)
      : ctx_(ctx), L_(L), degree_(degree) {}

  const JetContext* ctx() const { return ctx_; }
  const LieAlgebraData* lie() const { return L_; }
  int degree() const { return degree_; }
  const std::map<std::vector<int>, JetScalar>& terms() const { return terms_; }

  // Adds coeff * e_{idx[0]} ^ ... ^ e_{idx[k-1]} (any order, signed sort).
  void add_term(std::vector<int> idx, JetScalar coeff);
  static WedgePoly basis_vector(const JetContext* ctx, const LieAlgebraData* L, int i);

  friend WedgePoly operator+(const WedgePoly& a, const WedgePoly& b);
  friend WedgePoly operator-(const WedgePoly& a, const WedgePoly& b);
  WedgePoly operator-() const;
  WedgePoly scaled(const JetScalar& c) const;
  WedgePoly& operator+=(const WedgePoly& o) { *this = *this + o; return *this; }

  static WedgePoly wedge(const WedgePoly& a, const WedgePoly& b);
  // Algebraic Schouten bracket (degree p+q-1) with the pinned signs.
  static WedgePoly schouten(const WedgePoly& a, const WedgePoly& b);
  // ad_x extended as a derivation of the wedge algebra; equals schouten with
  // the degree-1 element x.
  WedgePoly derivative_base(int var) const;

  bool is_zero_upto(int through = 1 << 20) const;
  bool equals_upto(const WedgePoly& o, int through = 1 << 20) const;
  std::string to_string() const;

private:
  const JetContext* ctx_ = nullptr;
  const LieAlgebraData* L_ = nullptr;
  int degree_ = 0;
  std::map<std::vector<int>, JetScalar> terms_;
};

// Adjoint invariance of a constant polyvector: [e_i, Z] = 0 for all i.
bool invariance_check(const WedgePoly& Z);

}  // namespace dyt
