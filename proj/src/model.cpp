#include "dyt/model.hpp"

namespace dyt {

JetModel build_jet_model(const JetContext* ctx, const LieAlgebraData* L,
                         DynamicalRMatrix R) {
  JetModel M;
  M.ctx = ctx;
  M.L = L;
  M.R = std::move(R);
  M.left = invariant_vector_fields(ctx, *L, Side::Left);
  M.right = invariant_vector_fields(ctx, *L, Side::Right);
  M.coframe = invariant_coframe(ctx, *L);

  M.pi = build_pi_r(M.R, M.left);
  int n = M.n_coords();
  M.pi_mat = bivector_matrix(M.pi, n);
  M.omega_mat = invert_bivector(M.pi_mat);
  M.omega = form_from_matrix(ctx, M.omega_mat);

  // Frame (d_lambda, ->e): structure constants vanish except on the group
  // block, where they are the constants of g.
  std::vector<VecJet> frame;
  for (int i = 0; i < ctx->n_base; ++i) {
    VecJet f(size_t(n), JetScalar::zero(ctx));
    f[size_t(i)] = JetScalar::one(ctx);
    frame.push_back(std::move(f));
  }
  for (auto& e : M.left) frame.push_back(e);
  std::vector<std::vector<std::vector<Rational>>> C(
      size_t(n), std::vector<std::vector<Rational>>(size_t(n), std::vector<Rational>(size_t(n), Rational(0))));
  for (int k = 0; k < L->n; ++k)
    for (int a = 0; a < L->n; ++a)
      for (int b = 0; b < L->n; ++b)
        C[size_t(ctx->n_base + k)][size_t(ctx->n_base + a)][size_t(ctx->n_base + b)] =
            L->c3(k, a, b);
  ConnectionJet half = half_bracket_connection(ctx, frame, C);
  M.conn = symplectize_connection(half, M.omega_mat, M.pi_mat);
  M.curv = curvature(M.conn, M.omega_mat);

  for (int i = 0; i < ctx->n_base; ++i)
    M.chi.push_back(hamiltonian_field(M.pi_mat, JetScalar::variable(ctx, i)));

  // One-shot watermark trim of every stored tensor: drops jet orders that
  // are not trusted anyway and keeps the downstream arithmetic compact.
  auto trim_matrix = [](JetMatrix& mat) {
    for (auto& row : mat)
      for (auto& e : row) e.trim_to_watermark();
  };
  trim_matrix(M.pi_mat);
  trim_matrix(M.omega_mat);
  for (auto& g : M.conn.Gamma) trim_matrix(g);
  for (auto& e : M.curv.R) e.trim_to_watermark();
  for (auto& chi : M.chi)
    for (auto& e : chi) e.trim_to_watermark();
  M.pi = bivector_from_matrix(ctx, M.pi_mat);
  M.omega = form_from_matrix(ctx, M.omega_mat);
  return M;
}

}  // namespace dyt
