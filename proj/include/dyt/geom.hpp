// Formal-jet geometry of the model U x G: coordinate polyvector fields and
// forms with JetScalar coefficients, invariant vector-field jets in
// exponential coordinates, group multiplication jets, the half-bracket
// connection, symplectization, curvature, and bivector inversion.
//
// Coordinates: 0..n_base-1 are the base directions, n_base..n_base+n_group-1
// the group directions (exponential chart at the identity).
//
// Pinned pairings: {f,g} = sum_{i<j} pi^{ij} (d_i f d_j g - d_j f d_i g),
// the inverse form satisfies sum_j pi^{ij} w_{jk} = delta^i_k, and the
// hamiltonian field of H is chi^j = sum_i (d_i H) pi^{ij}; then
// iota_chi w = dH exactly.

#pragma once

#include <map>

#include "dyt/lie.hpp"

namespace dyt {

using VecJet = std::vector<JetScalar>;  // coordinate components

// Degree-k polyvector field (keys: strictly ascending coordinate tuples).
class MultiVecJet {
public:
  MultiVecJet() = default;
  MultiVecJet(const JetContext* ctx, int degree) : ctx_(ctx), degree_(degree) {}

  const JetContext* ctx() const { return ctx_; }
  int degree() const { return degree_; }
  const std::map<std::vector<int>, JetScalar>& terms() const { return terms_; }
  void add_term(std::vector<int> idx, JetScalar coeff);
  JetScalar coefficient(const std::vector<int>& idx) const;  // ascending idx

  friend MultiVecJet operator+(const MultiVecJet& a, const MultiVecJet& b);
  friend MultiVecJet operator-(const MultiVecJet& a, const MultiVecJet& b);
  MultiVecJet operator-() const;
  MultiVecJet scaled(const JetScalar& c) const;
  MultiVecJet& operator+=(const MultiVecJet& o) { *this = *this + o; return *this; }

  static MultiVecJet from_vector(const JetContext* ctx, const VecJet& v);
  static MultiVecJet wedge(const MultiVecJet& a, const MultiVecJet& b);
  // Schouten bracket of coordinate polyvectors, normalized to the same
  // convention as the algebraic one (vector fields: commutator).
  static MultiVecJet schouten(const MultiVecJet& a, const MultiVecJet& b);

  bool is_zero_upto(int through = 1 << 20) const;
  bool equals_upto(const MultiVecJet& o, int through = 1 << 20) const;
  std::string to_string() const;

private:
  const JetContext* ctx_ = nullptr;
  int degree_ = 0;
  std::map<std::vector<int>, JetScalar> terms_;
};

class FormJet {
public:
  FormJet() = default;
  FormJet(const JetContext* ctx, int degree) : ctx_(ctx), degree_(degree) {}

  const JetContext* ctx() const { return ctx_; }
  int degree() const { return degree_; }
  const std::map<std::vector<int>, JetScalar>& terms() const { return terms_; }
  void add_term(std::vector<int> idx, JetScalar coeff);
  JetScalar coefficient(const std::vector<int>& idx) const;

  friend FormJet operator+(const FormJet& a, const FormJet& b);
  friend FormJet operator-(const FormJet& a, const FormJet& b);
  FormJet operator-() const;
  FormJet scaled(const JetScalar& c) const;

  FormJet exterior_d() const;
  FormJet contract(const VecJet& X) const;  // iota_X, first slot
  static FormJet wedge(const FormJet& a, const FormJet& b);

  bool is_zero_upto(int through = 1 << 20) const;
  bool equals_upto(const FormJet& o, int through = 1 << 20) const;
  std::string to_string() const;

private:
  const JetContext* ctx_ = nullptr;
  int degree_ = 0;
  std::map<std::vector<int>, JetScalar> terms_;
};

// ---- matrices of jets ----

JetMatrix jet_matrix_identity(const JetContext* ctx, int n);
JetMatrix jet_matrix_mul(const JetMatrix& a, const JetMatrix& b);
// Inverse via exact elimination of the base part plus a Neumann series in
// the nilpotent group-jet remainder. Throws DegenerateAtBasePoint.
JetMatrix jet_matrix_inverse(const JetMatrix& a);

// ---- invariant vector fields and group multiplication ----

enum class Side { Left, Right };

// Jets of the left (resp. right) invariant vector fields in exponential
// coordinates: ->e_a = sum_b psi(ad_x)^b_a d/dx^b with psi(z) = z/(1-e^-z)
// (right fields use psi(-z)). Returned as coordinate VecJets on the model.
std::vector<VecJet> invariant_vector_fields(const JetContext* ctx, const LieAlgebraData& L,
                                            Side side);
// Coefficient matrix of the series f(ad_x) for a rational coefficient
// sequence; used for frames and coframes.
JetMatrix ad_series_matrix(const JetContext* ctx, const LieAlgebraData& L,
                           const std::vector<Rational>& series_coeffs);
// Series coefficients of psi(z) = z/(1-e^{-z}) (Bernoulli-type, computed by
// exact series inversion) and of phi(z) = (1-e^{-z})/z, up to order k.
std::vector<Rational> psi_series(int k);
std::vector<Rational> phi_series(int k);
// Left-invariant coframe theta^a = sum_b phi(ad_x)^a_b dx^b (dual to ->e).
std::vector<FormJet> invariant_coframe(const JetContext* ctx, const LieAlgebraData& L);

// Components of log(exp(u) exp(v)) in exponential coordinates, where u is
// the g-vector of variables u_vars and v of v_vars (both group variables of
// ctx). Solved degree-by-degree from dz/dt = psi(ad_z)(v), z(0) = u.
std::vector<JetScalar> bch_product(const JetContext* ctx, const LieAlgebraData& L,
                                   const std::vector<int>& u_vars,
                                   const std::vector<int>& v_vars);

// ---- connection machinery ----

struct ConnectionJet {
  const JetContext* ctx = nullptr;
  // Gamma[k][i][j] = Gamma^k_{ij}, symmetric in (i,j).
  std::vector<JetMatrix> Gamma;
  int n() const { return int(Gamma.size()); }
};

// Connection defined on the frame by nabla_{b_I} b_J = 1/2 [b_I, b_J],
// converted to coordinate Christoffel symbols. `frame` holds the coordinate
// components of the frame fields; frame_c are the frame structure constants
// C^K_{IJ} (constant here), with [b_I, b_J] = sum_K C^K_{IJ} b_K.
ConnectionJet half_bracket_connection(const JetContext* ctx,
                                      const std::vector<VecJet>& frame,
                                      const std::vector<std::vector<std::vector<Rational>>>& frame_c);

// Torsion tensor components T^k_{ij} (should vanish identically).
bool connection_torsion_free(const ConnectionJet& G);

// nabla_i omega_{jk} as a 3-tensor.
JetScalar covariant_derivative_form(const ConnectionJet& G, const JetMatrix& omega,
                                    int i, int j, int k);

// Minimal-correction symplectization: Gamma' = Gamma + S with
// s_{ij;k} = (T_{ijk} + T_{jik})/3, T_{ijk} = nabla_i omega_{jk},
// S^m_{ij} = sum_k s_{ij;k} pi^{km}. Result is torsion free with
// nabla' omega = 0 (property-checked by the caller/tests).
ConnectionJet symplectize_connection(const ConnectionJet& G, const JetMatrix& omega,
                                     const JetMatrix& pi);

// Lowered curvature R_{ijkl} = omega_{im} R^m_{jkl} with
// R(d_k, d_l) d_j = R^m_{jkl} d_m.
struct CurvatureJet {
  const JetContext* ctx = nullptr;
  int n = 0;
  std::vector<JetScalar> R;  // flattened [i][j][k][l]
  const JetScalar& at(int i, int j, int k, int l) const {
    return R[size_t(((i * n + j) * n + k) * n + l)];
  }
  JetScalar& at(int i, int j, int k, int l) {
    return R[size_t(((i * n + j) * n + k) * n + l)];
  }
};
CurvatureJet curvature(const ConnectionJet& G, const JetMatrix& omega);

// Lie derivative of the connection along X: zero iff X preserves nabla.
// (L_X Gamma)^k_{ij} = X^m d_m G^k_ij - d_m X^k G^m_ij + d_i X^m G^k_mj
//                      + d_j X^m G^k_im + d_i d_j X^k.
JetScalar lie_derivative_connection(const ConnectionJet& G, const VecJet& X,
                                    int k, int i, int j);

// ---- bivector utilities ----

// Antisymmetric coefficient matrix pi^{ij} of a degree-2 polyvector.
JetMatrix bivector_matrix(const MultiVecJet& pi, int n);
MultiVecJet bivector_from_matrix(const JetContext* ctx, const JetMatrix& m);
FormJet form_from_matrix(const JetContext* ctx, const JetMatrix& m);
JetMatrix form_matrix(const FormJet& w, int n);

// omega with sum_j pi^{ij} omega_{jk} = delta^i_k; checks closedness is the
// caller's job. Throws DegenerateAtBasePoint if pi is singular at the point.
JetMatrix invert_bivector(const JetMatrix& pi);

// Hamiltonian vector field chi_H^j = sum_i (d_i H) pi^{ij}.
VecJet hamiltonian_field(const JetMatrix& pi, const JetScalar& H);

// {f,g} from the bivector matrix.
JetScalar poisson_bracket(const JetMatrix& pi, const JetScalar& f, const JetScalar& g);

}  // namespace dyt
