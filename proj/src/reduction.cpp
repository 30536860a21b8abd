#include "dyt/reduction.hpp"

#include <algorithm>

namespace dyt {

namespace {

int position_in(const std::vector<int>& v, int x) {
  for (size_t i = 0; i < v.size(); ++i)
    if (v[i] == x) return int(i);
  return -1;
}

// exp-series coefficients sum_k s^k z^k / k!
std::vector<Rational> exp_series(int k, int sign) {
  std::vector<Rational> c(size_t(k) + 1);
  Rational fact(1), s(1);
  c[0] = Rational(1);
  for (int j = 1; j <= k; ++j) {
    fact *= Rational(j);
    s *= Rational(sign);
    c[size_t(j)] = s / fact;
  }
  return c;
}

// <p* tau, Ad_{x^{-1}} h_j> on ctx_vh: tau times the t-row of e^{-ad_x}.
std::vector<JetScalar> coadjoint_pullback(const JetContext* ctx_vh,
                                          const LieAlgebraData& Lh) {
  JetMatrix Adinv = ad_series_matrix(ctx_vh, Lh, exp_series(ctx_vh->Dx, -1));
  std::vector<JetScalar> out;
  for (int j = 0; j < Lh.n; ++j) {
    JetScalar s = JetScalar::zero(ctx_vh);
    for (size_t p = 0; p < Lh.sub_h.size(); ++p) {
      // (p* tau)_k = tau_p for k the p-th t-letter
      int k = Lh.sub_h[p];
      if (!Adinv[size_t(k)][size_t(j)].is_zero())
        s += JetScalar::variable(ctx_vh, int(p)) * Adinv[size_t(k)][size_t(j)];
    }
    out.push_back(s);
  }
  return out;
}

JetScalar poisson_with(const JetMatrix& pi, const JetScalar& f, const JetScalar& g) {
  return poisson_bracket(pi, f, g);
}

}  // namespace

std::unique_ptr<CompositionModel> build_composition_model(const LieAlgebraData& L, int Dx,
                                                          int Nh, const Rational& tau0) {
  auto holder = std::make_unique<CompositionModel>();
  CompositionModel& C = *holder;
  C.L = L;
  C.dim_g = L.n;
  C.dim_h = int(L.sub_h.size());
  C.dim_t = int(L.sub_t.size());
  // h restricted, with the inner splitting re-indexed
  std::vector<int> t_pos, mp_pos;
  for (int t : L.sub_t) t_pos.push_back(position_in(L.sub_h, t));
  for (int m : L.comp_mp) mp_pos.push_back(position_in(L.sub_h, m));
  C.Lh = L.restricted(L.sub_h, t_pos, mp_pos);

  std::vector<Rational> lam0(size_t(C.dim_h), Rational(0));
  // base point on h*: p* tau0 (matches the constraint surface at x = 0)
  for (int p = 0; p < C.dim_t; ++p) lam0[size_t(t_pos[size_t(p)])] = tau0;
  C.ctx_vh = JetContext::make(C.dim_t, C.dim_h, Dx, Nh, {tau0});
  C.ctx_ug = JetContext::make(C.dim_h, C.dim_g, Dx, Nh, lam0);
  std::vector<Rational> bx = {tau0};
  bx.insert(bx.end(), lam0.begin(), lam0.end());
  C.ctx_X = JetContext::make(C.dim_t + C.dim_h, C.dim_h + C.dim_g, Dx, Nh, bx);
  C.ctx_M = JetContext::make(C.dim_t, C.dim_g, Dx, Nh, {tau0});
  C.ctx_hstar = JetContext::make(C.dim_h, 0, Dx, Nh, lam0);

  // inner golden model on V x H
  C.M_vh = build_jet_model(&C.ctx_vh, &C.Lh, splitting_r_matrix(&C.ctx_vh, C.Lh));
  // outer model on U x G with rho = 0 over the base h
  DynamicalRMatrix rho;
  rho.ctx = &C.ctx_ug;
  rho.L = &C.L;
  rho.base_letters = L.sub_h;
  rho.r = WedgePoly(&C.ctx_ug, &C.L, 2);
  rho.Z = WedgePoly(&C.ctx_ug, &C.L, 3);
  C.M_ug = build_jet_model(&C.ctx_ug, &C.L, rho);
  // composed matrix over t and the reduced model carrying it
  DynamicalRMatrix rho_h = rho;  // same trivial rho viewed for composition
  C.theta = compose_classical(&C.ctx_M, C.L, rho_h);
  C.M_red = build_jet_model(&C.ctx_M, &C.L, C.theta);

  // variable maps into ctx_X
  C.map_vh.assign(size_t(C.ctx_vh.n_vars()), -1);
  for (int p = 0; p < C.dim_t; ++p) C.map_vh[size_t(p)] = p;  // tau block first
  for (int a = 0; a < C.dim_h; ++a)
    C.map_vh[size_t(C.ctx_vh.group_lo() + a)] = C.ctx_X.group_lo() + a;
  C.map_ug.assign(size_t(C.ctx_ug.n_vars()), -1);
  for (int j = 0; j < C.dim_h; ++j) C.map_ug[size_t(j)] = C.dim_t + j;
  for (int a = 0; a < C.dim_g; ++a)
    C.map_ug[size_t(C.ctx_ug.group_lo() + a)] = C.ctx_X.group_lo() + C.dim_h + a;

  // block bivector on X
  int nX = C.ctx_X.n_base + C.ctx_X.n_group;
  C.pi_X.assign(size_t(nX), std::vector<JetScalar>(size_t(nX), JetScalar::zero(&C.ctx_X)));
  auto blit = [&](const JetMatrix& m, const std::vector<int>& map) {
    int n = int(m.size());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (m[size_t(i)][size_t(j)].is_zero()) continue;
        C.pi_X[size_t(map[size_t(i)])][size_t(map[size_t(j)])] =
            m[size_t(i)][size_t(j)].remap(&C.ctx_X, map);
      }
  };
  blit(C.M_vh.pi_mat, C.map_vh);
  blit(C.M_ug.pi_mat, C.map_ug);

  // nu on V x H and mu on X
  std::vector<JetScalar> coad = coadjoint_pullback(&C.ctx_vh, C.Lh);
  for (int j = 0; j < C.dim_h; ++j) {
    C.nu.push_back(-coad[size_t(j)]);
    JetScalar lam = JetScalar::variable(&C.ctx_X, C.dim_t + j);
    C.mu.push_back(lam - coad[size_t(j)].remap(&C.ctx_X, C.map_vh));
  }

  // coordinates of y x via BCH on ctx_X (y in the G block, x in the H block;
  // x_H sits inside g through the inclusion of h)
  {
    // embed the H-block letters into g: variable of letter L.sub_h[a]
    std::vector<int> u_vars, v_vars;
    for (int a = 0; a < C.dim_g; ++a)
      u_vars.push_back(C.ctx_X.group_lo() + C.dim_h + a);
    // v as a g-vector: components on the h letters only
    // bch_product needs per-letter variables; build a padded list where
    // non-h letters map to a fresh zero... instead extend: v vector has
    // components x_H on letters sub_h and 0 elsewhere; emulate by variables
    // plus substitution of zero for the missing letters.
    std::vector<int> v_pad;
    std::map<int, int> letter_to_xh;
    for (int a = 0; a < C.dim_h; ++a) letter_to_xh[L.sub_h[size_t(a)]] = C.ctx_X.group_lo() + a;
    // Use u-vars as scratch: bch_product requires one variable per letter;
    // we pass the x_H variable where the letter is in h and reuse a u-var
    // slot that we substitute to zero afterwards for letters outside h.
    // Simplest exact approach: call bch_product on an auxiliary context with
    // a full set of v-variables, then substitute zero.
    int aux_group = 2 * C.dim_g;
    JetContext aux = JetContext::make(0, aux_group, Dx, Nh, {});
    std::vector<int> au, av;
    for (int a = 0; a < C.dim_g; ++a) au.push_back(a);
    for (int a = 0; a < C.dim_g; ++a) av.push_back(C.dim_g + a);
    auto z_aux = bch_product(&aux, C.L, au, av);
    // map: u_a -> x_G^a, v on h letters -> x_H, v elsewhere -> 0
    JetScalar zero = JetScalar::zero(&aux);
    std::vector<JetScalar> images;
    std::vector<const JetScalar*> subs(size_t(aux_group), nullptr);
    // first substitute the non-h v-letters to zero (within aux)
    for (int a = 0; a < C.dim_g; ++a)
      if (letter_to_xh.find(a) == letter_to_xh.end()) subs[size_t(C.dim_g + a)] = &zero;
    std::vector<int> auxmap(size_t(aux.n_vars()), -1);
    for (int a = 0; a < C.dim_g; ++a) auxmap[size_t(a)] = C.ctx_X.group_lo() + C.dim_h + a;
    for (int a = 0; a < C.dim_g; ++a) {
      auto it = letter_to_xh.find(a);
      if (it != letter_to_xh.end()) auxmap[size_t(C.dim_g + a)] = it->second;
      else auxmap[size_t(C.dim_g + a)] = C.ctx_X.group_lo();  // dead after zeroing
    }
    for (auto& zc : z_aux)
      C.bch_z.push_back(zc.substitute(subs).remap(&C.ctx_X, auxmap));
  }
  return holder;
}

MomentumReport momentum_check_classical(const CompositionModel& C, MomentumKind kind,
                                        int battery_deg,
                                        const std::vector<JetScalar>& mu_override) {
  MomentumReport rep;
  const JetContext* ctx = nullptr;
  const JetMatrix* pi = nullptr;
  std::vector<JetScalar> m;      // momentum components, by h-letter position
  std::vector<VecJet> action;    // expected action fields
  const LieAlgebraData* Lfull = &C.L;
  std::vector<int> letters;

  switch (kind) {
    case MomentumKind::MuOnX: {
      ctx = &C.ctx_X;
      pi = &C.pi_X;
      m = mu_override.empty() ? C.mu : mu_override;
      letters = C.L.sub_h;
      int n = C.ctx_X.n_base + C.ctx_X.n_group;
      auto rightH = invariant_vector_fields(&C.ctx_vh, C.Lh, Side::Right);
      auto leftG = invariant_vector_fields(&C.ctx_ug, C.L, Side::Left);
      for (int i = 0; i < C.dim_h; ++i) {
        VecJet chi(size_t(n), JetScalar::zero(ctx));
        // -(right-invariant on H) + coadjoint on lambda + (left-invariant on G)
        for (int a = 0; a < C.ctx_vh.n_base + C.ctx_vh.n_group; ++a) {
          const JetScalar& comp = rightH[size_t(i)][size_t(a)];
          if (!comp.is_zero())
            chi[size_t(C.map_vh[size_t(a)])] = -comp.remap(ctx, C.map_vh);
        }
        for (int j = 0; j < C.dim_h; ++j) {
          SPoly pair;
          for (size_t p = 0; p < C.L.sub_h.size(); ++p) {
            const Rational& c =
                C.L.c3(C.L.sub_h[p], C.L.sub_h[size_t(i)], C.L.sub_h[size_t(j)]);
            if (!c.is_zero())
              pair += SPoly(c).mul_mono(Mono::var(C.dim_t + int(p)), Rational(1));
          }
          if (!pair.is_zero()) chi[size_t(C.dim_t + j)] = JetScalar(ctx, pair);
        }
        int gidx = C.L.sub_h[size_t(i)];
        for (int a = 0; a < C.ctx_ug.n_base + C.ctx_ug.n_group; ++a) {
          const JetScalar& comp = leftG[size_t(gidx)][size_t(a)];
          if (!comp.is_zero()) chi[size_t(C.map_ug[size_t(a)])] = comp.remap(ctx, C.map_ug);
        }
        action.push_back(std::move(chi));
      }
      break;
    }
    case MomentumKind::NuOnVH: {
      ctx = &C.ctx_vh;
      pi = &C.M_vh.pi_mat;
      m = C.nu;
      letters = C.L.sub_h;
      auto rightH = invariant_vector_fields(&C.ctx_vh, C.Lh, Side::Right);
      for (int i = 0; i < C.dim_h; ++i) {
        VecJet chi = rightH[size_t(i)];
        for (auto& comp : chi) comp = -comp;
        action.push_back(std::move(chi));
      }
      break;
    }
    case MomentumKind::BaseOnUG: {
      ctx = &C.ctx_ug;
      pi = &C.M_ug.pi_mat;
      letters = C.L.sub_h;
      auto leftG = invariant_vector_fields(&C.ctx_ug, C.L, Side::Left);
      for (int j = 0; j < C.dim_h; ++j) m.push_back(JetScalar::variable(ctx, j));
      for (int i = 0; i < C.dim_h; ++i) {
        VecJet chi(size_t(C.ctx_ug.n_base + C.ctx_ug.n_group), JetScalar::zero(ctx));
        for (int j = 0; j < C.dim_h; ++j) {
          SPoly pair;
          for (size_t p = 0; p < letters.size(); ++p) {
            const Rational& c = C.L.c3(letters[p], letters[size_t(i)], letters[size_t(j)]);
            if (!c.is_zero()) pair += SPoly(c).mul_mono(Mono::var(int(p)), Rational(1));
          }
          if (!pair.is_zero()) chi[size_t(j)] = JetScalar(ctx, pair);
        }
        int gidx = letters[size_t(i)];
        for (size_t a = 0; a < leftG[size_t(gidx)].size(); ++a) {
          const JetScalar& comp = leftG[size_t(gidx)][a];
          if (!comp.is_zero()) chi[a] += comp;
        }
        action.push_back(std::move(chi));
      }
      break;
    }
  }
  // bracket morphism on the momentum components
  for (size_t i = 0; i < m.size(); ++i) {
    for (size_t j = 0; j < m.size(); ++j) {
      JetScalar lhs = poisson_with(*pi, m[i], m[j]);
      JetScalar rhs = JetScalar::zero(ctx);
      for (size_t k = 0; k < letters.size(); ++k) {
        const Rational& c = Lfull->c3(letters[k], letters[i], letters[j]);
        if (!c.is_zero()) rhs += m[k].scaled(c);
      }
      if (!(lhs - rhs).is_zero_upto()) {
        rep.ok = false;
        rep.witness = "bracket morphism fails at pair (" + std::to_string(i + 1) + "," +
                      std::to_string(j + 1) + ")";
        return rep;
      }
    }
  }
  // generated action on a coordinate battery
  for (size_t i = 0; i < m.size(); ++i) {
    for (auto& mono : coordinate_monomials(ctx, battery_deg)) {
      JetScalar f = mono_jet(ctx, mono);
      JetScalar lhs = poisson_with(*pi, m[i], f);
      JetScalar rhs = JetScalar::zero(ctx);
      for (size_t a = 0; a < action[i].size(); ++a) {
        if (action[i][a].is_zero()) continue;
        JetScalar d = f.derivative(int(a));
        if (!d.is_zero()) rhs += action[i][a] * d;
      }
      if (!(lhs - rhs).is_zero_upto()) {
        rep.ok = false;
        rep.witness = "action field fails for h_" + std::to_string(i + 1) + " on " +
                      f.to_string();
        return rep;
      }
    }
  }
  return rep;
}

MomentumReport reduced_bracket_check(const CompositionModel& C, int battery_deg,
                                     bool flip_theta_sign) {
  MomentumReport rep;
  const JetContext* X = &C.ctx_X;
  // constraint substitution lambda_j := <Ad*_{x^{-1}} p* tau, h_j>
  std::vector<JetScalar> lam_images;
  for (int j = 0; j < C.dim_h; ++j) {
    JetScalar v = JetScalar::variable(X, C.dim_t + j) - C.mu[size_t(j)];
    lam_images.push_back(v);
  }
  auto constrain = [&](const JetScalar& f) {
    std::vector<const JetScalar*> subs(size_t(X->n_vars()), nullptr);
    for (int j = 0; j < C.dim_h; ++j) subs[size_t(C.dim_t + j)] = &lam_images[size_t(j)];
    return f.substitute(subs);
  };
  // psi-pullback: tau -> tau, x_M^a -> bch_z^a
  auto pullback = [&](const JetScalar& f_on_M) {
    std::vector<int> mapM(size_t(C.ctx_M.n_vars()), -1);
    for (int p = 0; p < C.dim_t; ++p) mapM[size_t(p)] = p;
    // group vars of M map into fresh slots? substitute directly:
    // first remap tau, keeping x_M as the G-block positions, then substitute
    // those by the BCH coordinates.
    for (int a = 0; a < C.dim_g; ++a)
      mapM[size_t(C.ctx_M.group_lo() + a)] = X->group_lo() + C.dim_h + a;
    JetScalar on_X = f_on_M.remap(X, mapM);
    std::vector<const JetScalar*> subs(size_t(X->n_vars()), nullptr);
    for (int a = 0; a < C.dim_g; ++a)
      subs[size_t(X->group_lo() + C.dim_h + a)] = &C.bch_z[size_t(a)];
    return on_X.substitute(subs);
  };
  auto left_M = invariant_vector_fields(&C.ctx_M, C.L, Side::Left);
  auto apply_left_M = [&](int letter, const JetScalar& f) {
    JetScalar out = JetScalar::zero(&C.ctx_M);
    for (size_t i = 0; i < left_M[size_t(letter)].size(); ++i) {
      if (left_M[size_t(letter)][i].is_zero()) continue;
      JetScalar d = f.derivative(int(i));
      if (!d.is_zero()) out += left_M[size_t(letter)][i] * d;
    }
    return out;
  };
  // battery of x_G monomials on M
  std::vector<JetScalar> fs;
  for (auto& m : coordinate_monomials(&C.ctx_M, battery_deg))
    if (m.deg(0, C.ctx_M.n_base) == 0 && m.deg_all() > 0)
      fs.push_back(mono_jet(&C.ctx_M, m));
  // (i) {psi* t, psi* t'} = psi*[t, t'] (t-block linear functions)
  for (int p = 0; p < C.dim_t; ++p) {
    for (int q = 0; q < C.dim_t; ++q) {
      JetScalar tp = JetScalar::variable(X, p), tq = JetScalar::variable(X, q);
      JetScalar lhs = constrain(poisson_bracket(C.pi_X, tp, tq));
      JetScalar rhs = JetScalar::zero(X);
      for (size_t k = 0; k < C.L.sub_t.size(); ++k) {
        const Rational& c =
            C.L.c3(C.L.sub_t[k], C.L.sub_t[size_t(p)], C.L.sub_t[size_t(q)]);
        if (!c.is_zero()) rhs += JetScalar::variable(X, int(k)).scaled(c);
      }
      if (!(lhs - rhs).is_zero_upto()) {
        rep.ok = false;
        rep.witness = "identity (i): {t,t'} != [t,t']";
        return rep;
      }
    }
  }
  // (ii) {psi* t, psi* f} = psi*(->t . f)
  for (int p = 0; p < C.dim_t; ++p) {
    JetScalar tp = JetScalar::variable(X, p);
    for (auto& f : fs) {
      JetScalar lhs = constrain(poisson_bracket(C.pi_X, tp, pullback(f)));
      JetScalar rhs = pullback(apply_left_M(C.L.sub_t[size_t(p)], f));
      if (!(lhs - constrain(rhs)).is_zero_upto()) {
        rep.ok = false;
        rep.witness = "identity (ii): {t, f} != ->t f at " + f.to_string();
        return rep;
      }
    }
  }
  // (iii) {psi* f, psi* g} = psi*( <-> theta bracket of f, g )
  for (auto& f : fs) {
    for (auto& g : fs) {
      JetScalar lhs = constrain(poisson_bracket(C.pi_X, pullback(f), pullback(g)));
      JetScalar rhs = JetScalar::zero(&C.ctx_M);
      for (auto& kv : C.theta.r.terms()) {
        int a = kv.first[0], b = kv.first[1];
        JetScalar piece = kv.second * (apply_left_M(a, f) * apply_left_M(b, g) -
                                       apply_left_M(b, f) * apply_left_M(a, g));
        rhs += flip_theta_sign ? -piece : piece;
      }
      if (!(lhs - constrain(pullback(rhs))).is_zero_upto()) {
        rep.ok = false;
        rep.witness = "identity (iii): reduced bracket mismatch at (" + f.to_string() +
                      ", " + g.to_string() + ")";
        return rep;
      }
    }
  }
  return rep;
}

QuantumMomentumReport quantum_momentum_check(const CompositionModel& C, int battery_deg,
                                             bool skip_gauge) {
  QuantumMomentumReport rep;
  const JetContext* vh = &C.ctx_vh;
  int Nh = vh->Nh;
  WeylAlgebra W(&C.M_vh, Nh);
  WeylElement rf = W.solve_connection({});
  MultiDiffOp star = W.star_operator(rf);
  PbwAlgebra alg_h(&C.Lh);
  // t-letters inside h for the compatible structure over t*
  std::vector<int> t_pos;
  for (int t : C.L.sub_t) t_pos.push_back(position_in(C.L.sub_h, t));
  TwistSetup S{&C.M_vh, &alg_h, SymMap{&alg_h, t_pos}, Nh};
  // strong t-invariance (base coordinates) comes from the setup; verify the
  // strong h-invariance used by U(nu*): [nu*h, f]_* = hbar {nu*h, f}.
  for (int i = 0; i < C.dim_h; ++i) {
    VecJet chi = hamiltonian_field(C.M_vh.pi_mat, C.nu[size_t(i)]);
    for (auto& m : coordinate_monomials(vh, battery_deg)) {
      JetScalar f = mono_jet(vh, m);
      JetScalar lhs = star.apply2(C.nu[size_t(i)], f) - star.apply2(f, C.nu[size_t(i)]);
      JetScalar rhs = JetScalar::zero(vh);
      for (size_t a = 0; a < chi.size(); ++a) {
        if (chi[a].is_zero()) continue;
        JetScalar d = f.derivative(int(a));
        if (!d.is_zero()) rhs += chi[a] * d;
      }
      if (!(lhs - rhs.mul_hbar(1)).truncate_hbar(Nh).is_zero_upto()) {
        rep.ok = false;
        rep.property = "strong h-invariance of the raw star";
        rep.witness = f.to_string();
        return rep;
      }
    }
  }
  MultiDiffOp Q = build_gauge_Q(S, star);
  MultiDiffOp Qinv = MultiDiffOp::invert(Q, Nh);
  MultiDiffOp starP = compatible_star(S, star, Q);
  // N on U(h*): sym over the full h letters, then iterated raw-star products
  // of nu-pullbacks, then Q^{-1} (unless the negative control skips it).
  PbwAlgebra alg_h_full(&C.Lh);
  std::vector<int> h_letters_in_h(size_t(C.dim_h));
  for (int i = 0; i < C.dim_h; ++i) h_letters_in_h[size_t(i)] = i;
  SymMap hbase{&alg_h_full, h_letters_in_h};
  auto N_of = [&](const JetScalar& u_on_hstar) {
    EnvTensor symp = sym_map(u_on_hstar, &C.ctx_hstar, hbase);
    JetScalar out = JetScalar::zero(vh);
    for (auto& kv : symp.terms()) {
      std::vector<int> word = PbwAlgebra::mono_to_word(kv.first[0]);
      JetScalar acc = JetScalar::one(vh);
      for (size_t p = word.size(); p-- > 0;)
        acc = star.apply2(C.nu[size_t(word[p])], acc);
      // remap the hbar-polynomial coefficient from h* to V x H (constants)
      JetScalar coeff = kv.second;  // x-free, lambda-free by construction
      std::vector<int> cmap(size_t(C.ctx_hstar.n_vars()), -1);
      for (int j = 0; j < C.dim_h; ++j) cmap[size_t(j)] = 0;  // unused (no lambda)
      out += acc * coeff.remap(vh, cmap);
    }
    return skip_gauge ? out : Qinv.apply1(out);
  };
  // (i) algebra morphism on linear and quadratic generators
  {
    std::vector<JetScalar> gens;
    for (int i = 0; i < C.dim_h; ++i) gens.push_back(JetScalar::variable(&C.ctx_hstar, i));
    for (int i = 0; i < C.dim_h && rep.ok; ++i) {
      for (int j = 0; j < C.dim_h; ++j) {
        JetScalar u = gens[size_t(i)], v = gens[size_t(j)];
        JetScalar lhs = N_of(pbw_star(u, v, hbase));
        JetScalar rhs = starP.apply2(N_of(u), N_of(v));
        if (!(lhs - rhs).truncate_hbar(Nh).is_zero_upto()) {
          rep.ok = false;
          rep.property = "morphism N(u *_PBW v) = N(u) *' N(v)";
          rep.witness = "generators (" + std::to_string(i + 1) + "," +
                        std::to_string(j + 1) + ")";
          return rep;
        }
      }
    }
    // one genuinely quadratic pair
    JetScalar q1 = gens[0] * gens[0];
    JetScalar lhs = N_of(pbw_star(q1, gens.back(), hbase));
    JetScalar rhs = starP.apply2(N_of(q1), N_of(gens.back()));
    if (!(lhs - rhs).truncate_hbar(Nh).is_zero_upto()) {
      rep.ok = false;
      rep.property = "morphism on quadratics";
      rep.witness = "h_1^2 vs h_last";
      return rep;
    }
  }
  // (ii) [N(h), f]_{*'} = hbar {nu* h, f}
  for (int i = 0; i < C.dim_h; ++i) {
    JetScalar Nh_i = N_of(JetScalar::variable(&C.ctx_hstar, i));
    VecJet chi = hamiltonian_field(C.M_vh.pi_mat, C.nu[size_t(i)]);
    for (auto& m : coordinate_monomials(vh, battery_deg)) {
      JetScalar f = mono_jet(vh, m);
      JetScalar lhs = starP.apply2(Nh_i, f) - starP.apply2(f, Nh_i);
      JetScalar rhs = JetScalar::zero(vh);
      for (size_t a = 0; a < chi.size(); ++a) {
        if (chi[a].is_zero()) continue;
        JetScalar d = f.derivative(int(a));
        if (!d.is_zero()) rhs += chi[a] * d;
      }
      if (!(lhs - rhs.mul_hbar(1)).truncate_hbar(Nh).is_zero_upto()) {
        rep.ok = false;
        rep.property = "[N(h), f]_{*'} = hbar {nu*h, f}";
        rep.witness = "h_" + std::to_string(i + 1) + " on " + f.to_string();
        return rep;
      }
    }
  }
  // (iii) M(h) = N(h) (x) 1 + 1 (x) lambda_h against mu on the product star
  {
    MultiDiffOp starP_X = starP.remap(&C.ctx_X, C.map_vh);
    // The U x G factor carries the compatible star of the trivial twist:
    // g1 * g2 = sum_k hb^k/k! (d^k_lambda g1) *_PBW (->h^(k) g2), with the
    // PBW (Gutt) star acting on the lambda dependence.
    MultiDiffOp gutt(&C.ctx_ug, 2);
    {
      // Extract the Gutt star of U(h_hbar) as a bidifferential operator in
      // the lambda block (its coefficients are polynomial in lambda).
      PbwAlgebra alg_for_gutt(&C.Lh);
      std::vector<int> all_h(size_t(C.dim_h));
      for (int i = 0; i < C.dim_h; ++i) all_h[size_t(i)] = i;
      SymMap gbase{&alg_for_gutt, all_h};
      std::vector<int> to_ug(size_t(C.ctx_hstar.n_vars()), -1);
      for (int j = 0; j < C.dim_h; ++j) to_ug[size_t(j)] = j;
      // extract on the lambda-only subcontext (Gutt C_k has order k per
      // slot), then remap into U x G
      MultiDiffOp g_h = MultiDiffOp::extract_arity2(
          &C.ctx_hstar,
          [&](const JetScalar& u, const JetScalar& v) { return pbw_star(u, v, gbase); },
          Nh, [](int k) { return k; });
      gutt = g_h.remap(&C.ctx_ug, to_ug);
    }
    MultiDiffOp starJ(&C.ctx_ug, 2);
    auto leftG = invariant_vector_fields(&C.ctx_ug, C.L, Side::Left);
    {
      std::vector<MultiDiffOp> field_ops;
      for (int i = 0; i < C.dim_h; ++i) {
        MultiDiffOp op(&C.ctx_ug, 1);
        const VecJet& fld = leftG[size_t(C.L.sub_h[size_t(i)])];
        for (size_t a = 0; a < fld.size(); ++a)
          if (!fld[a].is_zero())
            op.add(0, MultiDiffOp::Key{Mono::var(int(a)), Mono::one(), Mono::one()}, fld[a]);
        field_ops.push_back(op);
      }
      // k = 0 term: the Gutt star itself
      starJ = gutt;
      Rational fact(1);
      struct Layer {
        Mono deriv;
        MultiDiffOp word;
      };
      std::vector<Layer> layer{{Mono::one(), MultiDiffOp::identity(&C.ctx_ug)}};
      for (int k = 1; k <= Nh; ++k) {
        fact *= Rational(k);
        std::vector<Layer> next;
        for (auto& entry : layer)
          for (int i = 0; i < C.dim_h; ++i)
            next.push_back({entry.deriv * Mono::var(i),
                            MultiDiffOp::post_compose(field_ops[size_t(i)], entry.word, Nh)});
        layer = std::move(next);
        for (auto& entry : layer) {
          // Gutt composed with (d^deriv on slot 1) and (word op on slot 2)
          MultiDiffOp d1(&C.ctx_ug, 1);
          d1.add(0, MultiDiffOp::Key{entry.deriv, Mono::one(), Mono::one()},
                 JetScalar::one(&C.ctx_ug));
          MultiDiffOp piece = MultiDiffOp::pre_compose_slot(gutt, 0, d1, Nh);
          piece = MultiDiffOp::pre_compose_slot(piece, 1, entry.word, Nh);
          piece = piece.mul_hbar(k).scaled(fact.inv());
          starJ = starJ + piece;
        }
      }
    }
    MultiDiffOp starJ_X = starJ.remap(&C.ctx_X, C.map_ug);
    MultiDiffOp star_X = MultiDiffOp::tensor_blocks(starP_X, starJ_X, Nh);
    for (int i = 0; i < C.dim_h; ++i) {
      JetScalar Mh = N_of(JetScalar::variable(&C.ctx_hstar, i)).remap(&C.ctx_X, C.map_vh) +
                     JetScalar::variable(&C.ctx_X, C.dim_t + i);
      VecJet chi = hamiltonian_field(C.pi_X, C.mu[size_t(i)]);
      for (auto& m : coordinate_monomials(&C.ctx_X, std::min(battery_deg, 2))) {
        JetScalar f = mono_jet(&C.ctx_X, m);
        JetScalar lhs = star_X.apply2(Mh, f) - star_X.apply2(f, Mh);
        JetScalar rhs = JetScalar::zero(&C.ctx_X);
        for (size_t a = 0; a < chi.size(); ++a) {
          if (chi[a].is_zero()) continue;
          JetScalar d = f.derivative(int(a));
          if (!d.is_zero()) rhs += chi[a] * d;
        }
        if (!(lhs - rhs.mul_hbar(1)).truncate_hbar(Nh).is_zero_upto()) {
          rep.ok = false;
          rep.property = "[M(h), f] = hbar {mu*h, f} on the product star";
          rep.witness = "h_" + std::to_string(i + 1) + " on " + f.to_string();
          return rep;
        }
      }
    }
  }
  return rep;
}

}  // namespace dyt
