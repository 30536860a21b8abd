#include "dyt/twist.hpp"

#include <algorithm>

namespace dyt {

namespace {

// <lambda, [e_i, e_j]> restricted to the base letters, as a base polynomial.
SPoly base_pairing(const LieAlgebraData& L, const std::vector<int>& letters, int i, int j) {
  SPoly s;
  for (size_t p = 0; p < letters.size(); ++p) {
    const Rational& c = L.c3(letters[p], i, j);
    if (!c.is_zero()) s += SPoly(c).mul_mono(Mono::var(int(p)), Rational(1));
  }
  return s;
}

Rational mono_factorial(const Mono& m) {
  Rational f(1);
  for (int v = 0; v < kMaxVars; ++v)
    for (int t = 2; t <= m.e[size_t(v)]; ++t) f *= Rational(t);
  return f;
}

Rational binom_multi(const Mono& c, const Mono& a) {
  // prod_v C(c_v, a_v)
  Rational r(1);
  for (int v = 0; v < kMaxVars; ++v) {
    int cv = c.e[size_t(v)], av = a.e[size_t(v)];
    if (av > cv) return Rational(0);
    for (int t = 0; t < av; ++t) r *= Rational(cv - t) / Rational(t + 1);
  }
  return r;
}

// x-monomials over the group block, total degree <= deg.
std::vector<Mono> group_monomials(const JetContext* ctx, int deg) {
  std::vector<Mono> out;
  std::function<void(int, int, Mono)> rec = [&](int var, int left, Mono cur) {
    if (var == ctx->group_hi()) {
      out.push_back(cur);
      return;
    }
    for (int e = 0; e <= left; ++e) {
      Mono m = cur;
      m.e[size_t(var)] = uint8_t(e);
      rec(var + 1, left - e, m);
    }
  };
  rec(ctx->group_lo(), deg, Mono::one());
  std::sort(out.begin(), out.end());
  return out;
}

// PBW multidegrees over the algebra letters, total degree <= deg.
std::vector<Mono> pbw_monomials(int n_letters, int deg) {
  std::vector<Mono> out;
  std::function<void(int, int, Mono)> rec = [&](int var, int left, Mono cur) {
    if (var == n_letters) {
      out.push_back(cur);
      return;
    }
    for (int e = 0; e <= left; ++e) {
      Mono m = cur;
      m.e[size_t(var)] = uint8_t(e);
      rec(var + 1, left - e, m);
    }
  };
  rec(0, deg, Mono::one());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

JetScalar apply_left_word(const JetModel& M, const std::vector<int>& word,
                          const JetScalar& f) {
  JetScalar out = f;
  // ->(e_{w1} ... e_{wk}) = ->e_{w1} o ... o ->e_{wk} as operators
  for (size_t p = word.size(); p-- > 0;) {
    const VecJet& field = M.left[size_t(word[p])];
    JetScalar next = JetScalar::zero(M.ctx);
    for (size_t i = 0; i < field.size(); ++i) {
      if (field[i].is_zero()) continue;
      JetScalar d = out.derivative(int(i));
      if (!d.is_zero()) next += field[i] * d;
    }
    out = next;
    if (out.is_zero()) break;
  }
  return out;
}

MultiDiffOp build_gauge_Q(const TwistSetup& S, const MultiDiffOp& star_op) {
  const JetModel& M = *S.model;
  const JetContext* c = M.ctx;
  {
    WeylAlgebra W(S.model, S.Nh);
    for (int i = 0; i < c->n_base; ++i) {
      auto rep = strong_invariance_check(W, star_op, i, 2);
      if (!rep.ok)
        throw NotStronglyInvariant("gauge transform needs a strongly invariant star: " +
                                   rep.witness);
    }
  }
  // Precompute a(sym(lambda^alpha)) for all base multidegrees <= 2 Nh:
  // sym maps into U(h_hbar); each word maps to an iterated star product of
  // the corresponding linear base functions.
  auto a_of_word = [&](const std::vector<int>& word) {
    JetScalar acc = JetScalar::one(c);
    for (size_t p = word.size(); p-- > 0;) {
      // letter -> base variable index
      int var = -1;
      for (size_t j = 0; j < S.base.letters.size(); ++j)
        if (S.base.letters[j] == word[p]) var = int(j);
      if (var < 0) throw InternalError("build_gauge_Q: letter outside the base");
      acc = star_op.apply2(JetScalar::variable(c, var), acc);
    }
    return acc;
  };
  auto action = [&](const JetScalar& f) {
    // decompose f in monomials lambda^alpha x^beta (polynomial inputs only;
    // the extracted operator then acts on arbitrary jets)
    JetScalar out = JetScalar::zero(c);
    for (auto& term : f.num().terms()) {
      Mono lam, rest;
      for (int v = 0; v < c->n_base; ++v) lam.e[size_t(v)] = term.m.e[size_t(v)];
      for (int v = c->group_lo(); v < c->n_vars(); ++v) rest.e[size_t(v)] = term.m.e[size_t(v)];
      // sym over the base letters
      EnvTensor symp = sym_map(JetScalar(c, SPoly(Rational(1)).mul_mono(lam, Rational(1))),
                               c, S.base);
      JetScalar au = JetScalar::zero(c);
      for (auto& kv : symp.terms()) {
        std::vector<int> word = PbwAlgebra::mono_to_word(kv.first[0]);
        au += kv.second * a_of_word(word);
      }
      JetScalar xpart(c, SPoly(term.c).mul_mono(rest, Rational(1)));
      out += star_op.apply2(xpart, au);
    }
    if (f.has_denominator())
      throw InternalError("build_gauge_Q: extraction battery must be polynomial");
    return out;
  };
  MultiDiffOp Q = MultiDiffOp::extract_arity1(
      c, action, S.Nh, [&](int k) { return std::min(2 * k, 2 * S.Nh); });
  return Q;
}

MultiDiffOp compatible_star(const TwistSetup& S, const MultiDiffOp& star_op,
                            const MultiDiffOp& Q) {
  MultiDiffOp Qinv = MultiDiffOp::invert(Q, S.Nh);
  MultiDiffOp B = MultiDiffOp::pre_compose_slot(star_op, 0, Q, S.Nh);
  B = MultiDiffOp::pre_compose_slot(B, 1, Q, S.Nh);
  return MultiDiffOp::post_compose(Qinv, B, S.Nh);
}

CompatReport compatibility_axioms_check(const TwistSetup& S, const MultiDiffOp& starP,
                                        int battery_deg) {
  const JetModel& M = *S.model;
  const JetContext* c = M.ctx;
  CompatReport rep;
  // base-only and group-only monomials of the battery
  std::vector<Mono> lam_monos, x_monos;
  for (auto& m : coordinate_monomials(c, battery_deg)) {
    if (m.deg(c->group_lo(), c->group_hi()) == 0 && m.deg_all() > 0) lam_monos.push_back(m);
    if (m.deg(0, c->n_base) == 0 && m.deg_all() > 0) x_monos.push_back(m);
  }
  // (1) u *' v = u *_PBW v
  for (auto& mu : lam_monos) {
    for (auto& mv : lam_monos) {
      JetScalar u = mono_jet(c, mu), v = mono_jet(c, mv);
      JetScalar lhs = starP.apply2(u, v).truncate_hbar(S.Nh);
      JetScalar rhs = pbw_star(u, v, S.base).truncate_hbar(S.Nh);
      if (!(lhs - rhs).is_zero_upto()) {
        rep.ok = false;
        rep.axiom = "u *' v = u *_PBW v";
        rep.witness = u.to_string() + " , " + v.to_string();
        return rep;
      }
    }
  }
  // (2) f *' u = f u
  for (auto& mf : x_monos) {
    for (auto& mu : lam_monos) {
      JetScalar f = mono_jet(c, mf), u = mono_jet(c, mu);
      JetScalar lhs = starP.apply2(f, u).truncate_hbar(S.Nh);
      if (!(lhs - f * u).is_zero_upto()) {
        rep.ok = false;
        rep.axiom = "f *' u = f u";
        rep.witness = f.to_string() + " , " + u.to_string();
        return rep;
      }
    }
  }
  // (3) u *' f = sum_k hb^k/k! d^k u . (->h_{i_1} ... ->h_{i_k} f)
  for (auto& mu : lam_monos) {
    for (auto& mf : x_monos) {
      JetScalar u = mono_jet(c, mu), f = mono_jet(c, mf);
      JetScalar rhs = JetScalar::zero(c);
      // iterate ordered index tuples (i_1..i_k)
      std::function<void(int, JetScalar, JetScalar, Rational)> rec =
          [&](int k, JetScalar du, JetScalar hf, Rational factinv) {
            rhs += (du * hf).mul_hbar(k).scaled(factinv);
            if (k >= S.Nh) return;
            for (int i = 0; i < c->n_base; ++i) {
              JetScalar du2 = du.derivative(i);
              if (du2.is_zero()) continue;
              JetScalar hf2 = apply_left_word(M, {S.base.letters[size_t(i)]}, hf);
              if (hf2.is_zero()) continue;
              rec(k + 1, du2, hf2, factinv / Rational(k + 1));
            }
          };
      rec(0, u, f, Rational(1));
      JetScalar lhs = starP.apply2(u, f).truncate_hbar(S.Nh);
      if (!(lhs - rhs.truncate_hbar(S.Nh)).is_zero_upto()) {
        rep.ok = false;
        rep.axiom = "u *' f shift axiom";
        rep.witness = u.to_string() + " , " + f.to_string();
        return rep;
      }
    }
  }
  // strong base-invariance of *' (comes for free with compatibility)
  WeylAlgebra W(S.model, S.Nh);
  for (int i = 0; i < c->n_base; ++i) {
    auto inv = strong_invariance_check(W, starP, i, battery_deg);
    if (!inv.ok) {
      rep.ok = false;
      rep.axiom = "strong base-invariance";
      rep.witness = inv.witness;
      return rep;
    }
  }
  return rep;
}

EnvTensor extract_twist(const TwistSetup& S, const MultiDiffOp& starP) {
  return extract_twist_from_action(
      S, [&](const JetScalar& f, const JetScalar& g) { return starP.apply2(f, g); });
}

EnvTensor extract_twist_from_action(
    const TwistSetup& S,
    const std::function<JetScalar(const JetScalar&, const JetScalar&)>& action,
    bool round_trip_check) {
  const JetModel& M = *S.model;
  const JetContext* c = M.ctx;
  int maxd = 2 * S.Nh;
  std::vector<Mono> xm = group_monomials(c, maxd);
  std::vector<Mono> pm = pbw_monomials(M.L->n, maxd);
  // Mval[P][beta] = (->e^P x^beta)(0)
  std::map<Mono, std::map<Mono, Rational>> Mval;
  for (auto& P : pm) {
    std::vector<int> word = PbwAlgebra::mono_to_word(P);
    for (auto& b : xm) {
      if (b.deg_all() > int(word.size())) continue;
      JetScalar applied = apply_left_word(M, word, mono_jet(c, b));
      JetScalar at0 = applied.base_part();
      if (at0.is_zero()) continue;
      if (!at0.num().is_constant())
        throw InternalError("extract_twist: dual pairing is not constant");
      Mval[P][b] = at0.num().constant_value();
    }
  }
  // F(beta,gamma) = (x^beta *' x^gamma) restricted to x = 0
  std::map<std::pair<Mono, Mono>, JetScalar> F;
  for (auto& b : xm)
    for (auto& g : xm)
      F[{b, g}] = action(mono_jet(c, b), mono_jet(c, g)).at_group_zero().truncate_hbar(S.Nh);
  // Triangular solve, descending total degree of (P, Q): at level (p, q) the
  // equation at the matching monomial pair has diagonal beta! gamma!.
  EnvTensor J(c, S.alg, 2);
  for (int p = maxd; p >= 0; --p) {
    for (int q = maxd; q >= 0; --q) {
      for (auto& P : pm) {
        if (P.deg_all() != p) continue;
        // beta with multiset(P) mapped to group variables
        Mono beta;
        for (int l = 0; l < M.L->n; ++l)
          beta.e[size_t(c->group_lo() + l)] = P.e[size_t(l)];
        for (auto& Qm : pm) {
          if (Qm.deg_all() != q) continue;
          Mono gamma;
          for (int l = 0; l < M.L->n; ++l)
            gamma.e[size_t(c->group_lo() + l)] = Qm.e[size_t(l)];
          JetScalar rhs = F[{beta, gamma}];
          for (auto& kv : J.terms()) {
            auto itP = Mval.find(kv.first[0]);
            if (itP == Mval.end()) continue;
            auto itPb = itP->second.find(beta);
            if (itPb == itP->second.end()) continue;
            auto itQ = Mval.find(kv.first[1]);
            if (itQ == Mval.end()) continue;
            auto itQg = itQ->second.find(gamma);
            if (itQg == itQ->second.end()) continue;
            rhs -= kv.second.scaled(itPb->second * itQg->second);
          }
          if (rhs.is_zero()) continue;
          Rational diag = mono_factorial(beta) * mono_factorial(gamma);
          J.add(EnvTensor::Key{P, Qm, Mono::one()}, rhs.scaled(diag.inv()));
        }
      }
    }
  }
  // Round trip through the reconstruction formula on a mixed battery: this
  // also verifies left-invariance of the operator to the required jet order.
  Rng rng(2026);
  std::vector<JetScalar> battery;
  battery.push_back(JetScalar::variable(c, 0));
  battery.push_back(JetScalar::variable(c, c->group_lo()));
  battery.push_back(JetScalar::variable(c, 0) * JetScalar::variable(c, c->group_lo() + 1));
  battery.push_back(JetScalar::variable(c, c->group_lo()) *
                    JetScalar::variable(c, c->group_lo() + 1));
  if (round_trip_check) {
    for (auto& f : battery) {
      for (auto& g : battery) {
        JetScalar via_J = reconstruct_star_apply(S, J, f, g).truncate_hbar(S.Nh);
        JetScalar direct = action(f, g).truncate_hbar(S.Nh);
        if (!(via_J - direct).is_zero_upto())
          throw ExtractionInconsistent(
              "reconstructed star disagrees with the operator on the battery");
      }
    }
  }
  return J;
}

JetScalar reconstruct_star_apply(const TwistSetup& S, const EnvTensor& J,
                                 const JetScalar& g1, const JetScalar& g2) {
  const JetModel& M = *S.model;
  const JetContext* c = M.ctx;
  if (!S.base.abelian(*M.L))
    throw InternalError("reconstruct_star_apply: nonabelian base not supported");
  JetScalar out = JetScalar::zero(c);
  for (auto& kv : J.terms()) {
    std::vector<int> wordA = PbwAlgebra::mono_to_word(kv.first[0]);
    std::vector<int> wordB = PbwAlgebra::mono_to_word(kv.first[1]);
    // iterate ordered base-index tuples for the hbar shift
    std::function<void(int, JetScalar, std::vector<int>&, Rational)> rec =
        [&](int k, JetScalar du, std::vector<int>& hletters, Rational factinv) {
          JetScalar A = apply_left_word(M, wordA, du);
          if (!A.is_zero()) {
            std::vector<int> wb = wordB;
            wb.insert(wb.end(), hletters.begin(), hletters.end());
            JetScalar B = apply_left_word(M, wb, g2);
            if (!B.is_zero()) out += (kv.second * A * B).mul_hbar(k).scaled(factinv);
          }
          if (k >= S.Nh) return;
          for (int i = 0; i < c->n_base; ++i) {
            JetScalar du2 = du.derivative(i);
            if (du2.is_zero()) continue;
            hletters.push_back(S.base.letters[size_t(i)]);
            rec(k + 1, du2, hletters, factinv / Rational(k + 1));
            hletters.pop_back();
          }
        };
    std::vector<int> hl;
    rec(0, g1, hl, Rational(1));
  }
  return out.truncate_hbar(S.Nh);
}

EnvTensor twist_equation_residual(const TwistSetup& S, const EnvTensor& J) {
  // Slot products in ordinary U(g): the hbar series lives in the
  // coefficients; the base-function coefficients multiply via *_PBW.
  EnvTensor lhs = EnvTensor::product(
      J.coproduct_on_slot(0), J.extend(0, 1).hbar_shift(2, S.base, ProductMode::Ordinary),
      S.base, ProductMode::Ordinary);
  EnvTensor rhs = EnvTensor::product(J.coproduct_on_slot(1), J.extend(1, 0), S.base,
                                     ProductMode::Ordinary);
  return (lhs - rhs).truncate_hbar(S.Nh);
}

EnvTensor twist_equivariance_defect(const TwistSetup& S, const EnvTensor& J, int base_var) {
  const LieAlgebraData& L = *S.model->L;
  int h = S.base.letters[size_t(base_var)];
  EnvTensor coad(J.ctx(), J.alg(), J.arity());
  for (size_t j = 0; j < S.base.letters.size(); ++j) {
    SPoly pair = base_pairing(L, S.base.letters, h, S.base.letters[j]);
    if (pair.is_zero()) continue;
    coad = coad + J.derivative_base(int(j)).scaled(JetScalar(J.ctx(), pair));
  }
  return coad - J.ad_action(h, ProductMode::Ordinary);
}

bool twist_is_equivariant(const TwistSetup& S, const EnvTensor& J) {
  for (size_t i = 0; i < S.base.letters.size(); ++i)
    if (!twist_equivariance_defect(S, J, int(i)).is_zero_mod(S.Nh)) return false;
  return true;
}

EnvTensor env_inverse(const TwistSetup& S, const EnvTensor& X) {
  EnvTensor unit = EnvTensor::unit(X.ctx(), X.alg(), X.arity());
  EnvTensor N = unit - X;  // O(hbar)
  EnvTensor acc = unit, power = unit;
  for (int k = 1; k <= S.Nh; ++k) {
    power = EnvTensor::product(power, N, S.base, ProductMode::Ordinary).truncate_hbar(S.Nh);
    acc = acc + power;
  }
  return acc.truncate_hbar(S.Nh);
}

GaugeReport twist_gauge_check(const TwistSetup& S, const EnvTensor& J1, const EnvTensor& J2,
                              const EnvTensor& T) {
  GaugeReport rep;
  // T = 1 + O(hbar), equivariant
  EnvTensor unit = EnvTensor::unit(T.ctx(), T.alg(), 1);
  if (!(T - unit).truncate_hbar(0).is_zero_mod(0)) {
    rep.message = "T does not start at the unit";
    return rep;
  }
  if (!twist_is_equivariant(S, T)) {
    rep.message = "T is not equivariant over the base";
    return rep;
  }
  EnvTensor lhs = EnvTensor::product(T.coproduct_on_slot(0), J1, S.base, ProductMode::Ordinary);
  EnvTensor t1 = T.extend(0, 1).hbar_shift(1, S.base, ProductMode::Ordinary);
  EnvTensor t2 = T.extend(1, 0);
  EnvTensor rhs = EnvTensor::product(
      EnvTensor::product(J2, t1, S.base, ProductMode::Ordinary), t2, S.base,
      ProductMode::Ordinary);
  if ((lhs - rhs).is_zero_mod(S.Nh)) {
    rep.ok = true;
    rep.message = "gauge relation holds";
  } else {
    rep.message = "gauge relation fails";
  }
  return rep;
}

ObstructionReport obstruction_step(const TwistSetup& S, const MultiDiffOp& star1,
                                   const MultiDiffOp& star2) {
  const JetContext* c = S.model->ctx;
  int n = S.model->n_coords();
  ObstructionReport rep;
  MultiDiffOp diff = star1 - star2;
  int lead = -1;
  for (int k = 0; k <= S.Nh && lead < 0; ++k)
    for (auto& kv : diff.stratum(k))
      if (!kv.second.is_zero_upto()) {
        lead = k;
        break;
      }
  if (lead < 0) {
    rep.order = -1;
    rep.B = JetMatrix(size_t(n), std::vector<JetScalar>(size_t(n), JetScalar::zero(c)));
    rep.B_closed = rep.B_base_flat = rep.E_solved = true;
    rep.E = MultiDiffOp(c, 1);
    rep.message = "identical stars";
    return rep;
  }
  rep.order = lead;
  // the difference cochain as an hbar^0 arity-2 operator
  MultiDiffOp D(c, 2);
  for (auto& kv : diff.stratum(lead)) D.add(0, kv.first, kv.second);
  // Hochschild closedness
  if (!D.hochschild_b().is_zero_mod(0)) throw NotCocycle("b(C1 - C2) != 0 at leading order");
  rep.B = D.skew_first_order(0, n);
  // side conditions
  MultiVecJet Bvec = bivector_from_matrix(c, rep.B);
  rep.B_closed = MultiVecJet::schouten(S.model->pi, Bvec).is_zero_upto();
  rep.B_base_flat = true;
  for (int i = 0; i < c->n_base; ++i)
    for (int j = 0; j < n; ++j)
      if (!rep.B[size_t(i)][size_t(j)].is_zero_upto()) rep.B_base_flat = false;
  // E from the symmetric remainder: Sd = D - B must be b(E) with
  // e_{a+b} = -Sd^{(a,b)} / C(a+b; a); consistency across splits decides.
  MultiDiffOp Bop(c, 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!rep.B[size_t(i)][size_t(j)].is_zero())
        Bop.add(0, MultiDiffOp::Key{Mono::var(i), Mono::var(j), Mono::one()},
                rep.B[size_t(i)][size_t(j)]);
  MultiDiffOp Sd = D - Bop;
  rep.E = MultiDiffOp(c, 1);
  rep.E_solved = true;
  std::map<Mono, JetScalar> e;
  for (auto& kv : Sd.stratum(0)) {
    const Mono &a = kv.first[0], &b = kv.first[1];
    if (a.deg_all() == 0 || b.deg_all() == 0) {
      if (!kv.second.is_zero_upto()) {
        rep.E_solved = false;
        rep.message = "remainder has boundary coefficients; not a coboundary";
      }
      continue;
    }
    Mono cidx = a * b;
    JetScalar cand = -kv.second.scaled(binom_multi(cidx, a).inv());
    auto it = e.find(cidx);
    if (it == e.end()) {
      e.emplace(cidx, cand);
    } else if (!(it->second - cand).is_zero_upto()) {
      rep.E_solved = false;
      rep.message = "inconsistent potential across derivative splits";
    }
  }
  if (rep.E_solved) {
    for (auto& kv : e) rep.E.add(0, MultiDiffOp::Key{kv.first, Mono::one(), Mono::one()},
                                 kv.second);
    // verify bE reproduces the symmetric remainder
    MultiDiffOp resid = Sd - rep.E.hochschild_b();
    if (!resid.is_zero_mod(0)) {
      rep.E_solved = false;
      rep.message = "bounded-order potential does not reproduce the remainder";
    } else if (rep.message.empty()) {
      rep.message = "obstruction step complete";
    }
  }
  return rep;
}

}  // namespace dyt
