#include "dyt/dynr.hpp"

#include <algorithm>
#include <functional>

namespace dyt {

namespace {

int position_in(const std::vector<int>& v, int x) {
  for (size_t i = 0; i < v.size(); ++i)
    if (v[i] == x) return int(i);
  return -1;
}

// <lambda, [e_i, e_j]|_base> as a polynomial in the base variables.
SPoly pairing_poly(const LieAlgebraData& L, const std::vector<int>& letters, int i, int j) {
  SPoly s;
  for (size_t p = 0; p < letters.size(); ++p) {
    const Rational& c = L.c3(letters[p], i, j);
    if (!c.is_zero()) s += SPoly(c).mul_mono(Mono::var(int(p)), Rational(1));
  }
  return s;
}

// Exact determinant by Laplace expansion (dimensions here are tiny).
SPoly det_poly(const std::vector<std::vector<SPoly>>& m) {
  size_t n = m.size();
  if (n == 0) return SPoly(Rational(1));
  if (n == 1) return m[0][0];
  SPoly det;
  for (size_t j = 0; j < n; ++j) {
    if (m[0][j].is_zero()) continue;
    std::vector<std::vector<SPoly>> minor;
    for (size_t r = 1; r < n; ++r) {
      std::vector<SPoly> row;
      for (size_t c = 0; c < n; ++c)
        if (c != j) row.push_back(m[r][c]);
      minor.push_back(std::move(row));
    }
    SPoly piece = m[0][j] * det_poly(minor);
    det = (j % 2 == 0) ? det + piece : det - piece;
  }
  return det;
}

std::vector<std::vector<SPoly>> adjugate_poly(const std::vector<std::vector<SPoly>>& m) {
  size_t n = m.size();
  std::vector<std::vector<SPoly>> adj(n, std::vector<SPoly>(n));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      std::vector<std::vector<SPoly>> minor;
      for (size_t r = 0; r < n; ++r) {
        if (r == i) continue;
        std::vector<SPoly> row;
        for (size_t c = 0; c < n; ++c)
          if (c != j) row.push_back(m[r][c]);
        minor.push_back(std::move(row));
      }
      SPoly cof = det_poly(minor);
      adj[j][i] = ((i + j) % 2 == 0) ? cof : -cof;  // transpose of cofactors
    }
  }
  return adj;
}

}  // namespace

WedgePoly cdybe_residual(const DynamicalRMatrix& R) {
  WedgePoly half_rr = WedgePoly::schouten(R.r, R.r).scaled(
      JetScalar(R.ctx, Rational(BigInt(1), BigInt(2))));
  WedgePoly res = half_rr;
  for (size_t i = 0; i < R.base_letters.size(); ++i) {
    WedgePoly hi = WedgePoly::basis_vector(R.ctx, R.L, R.base_letters[i]);
    res = res - WedgePoly::wedge(hi, R.r.derivative_base(int(i)));
  }
  if (R.Z.degree() == 3 && !R.Z.terms().empty()) res = res - R.Z;
  return res;
}

WedgePoly equivariance_defect(const LieAlgebraData& L, const std::vector<int>& letters,
                              const WedgePoly& c, int base_var) {
  const JetContext* ctx = c.ctx();
  int h = letters[size_t(base_var)];
  // coadjoint directional derivative
  WedgePoly coad(ctx, &L, c.degree());
  for (size_t j = 0; j < letters.size(); ++j) {
    SPoly pair = pairing_poly(L, letters, h, letters[j]);
    if (pair.is_zero()) continue;
    coad = coad + c.derivative_base(int(j)).scaled(JetScalar(ctx, pair));
  }
  WedgePoly hvec = WedgePoly::basis_vector(ctx, &L, h);
  return coad - WedgePoly::schouten(hvec, c);
}

bool is_equivariant(const LieAlgebraData& L, const std::vector<int>& letters,
                    const WedgePoly& c) {
  for (size_t i = 0; i < letters.size(); ++i)
    if (!equivariance_defect(L, letters, c, int(i)).is_zero_upto()) return false;
  return true;
}

SplittingData splitting_pairing(const JetContext* ctx, const LieAlgebraData& L) {
  (void)ctx;
  size_t dm = L.comp_m.size();
  SplittingData S;
  S.W.assign(dm, std::vector<SPoly>(dm));
  for (size_t a = 0; a < dm; ++a)
    for (size_t b = 0; b < dm; ++b)
      S.W[a][b] = pairing_poly(L, L.sub_h, L.comp_m[a], L.comp_m[b]);
  S.detW = det_poly(S.W);
  return S;
}

DynamicalRMatrix splitting_r_matrix(const JetContext* ctx, const LieAlgebraData& L) {
  if (!L.subalgebra_closed(L.sub_h))
    throw InputInvalid("splitting: h is not a subalgebra");
  if (!L.splitting_reductive())
    throw InputInvalid("splitting: [h,m] not contained in m");
  SplittingData S = splitting_pairing(ctx, L);
  if (S.detW.is_zero())
    throw IdenticallyDegenerate("det W(lambda) is identically zero");
  auto adj = adjugate_poly(S.W);
  DynamicalRMatrix R;
  R.ctx = ctx;
  R.L = &L;
  R.base_letters = L.sub_h;
  R.r = WedgePoly(ctx, &L, 2);
  // r = + W^{-1}: coefficient (a,b) = adj_ab / det
  for (size_t a = 0; a < L.comp_m.size(); ++a) {
    for (size_t b = a + 1; b < L.comp_m.size(); ++b) {
      if (adj[a][b].is_zero()) continue;
      JetScalar coeff = JetScalar::fraction(ctx, adj[a][b], S.detW);
      R.r.add_term({L.comp_m[a], L.comp_m[b]}, coeff);
    }
  }
  R.Z = WedgePoly(ctx, &L, 3);
  R.domain_certificate.push_back(S.detW);
  return R;
}

NondegeneracyCertificate nondegeneracy_certificate(const JetContext* ctx,
                                                   const LieAlgebraData& L) {
  SplittingData S = splitting_pairing(ctx, L);
  if (S.detW.is_zero())
    throw IdenticallyDegenerate("det W(lambda) is identically zero");
  NondegeneracyCertificate cert;
  cert.detW = S.detW;
  if (!S.detW.evaluate(ctx->base_point).is_zero()) {
    cert.witness = ctx->base_point;
    return cert;
  }
  int d = ctx->n_base;
  for (int radius = 1; radius <= 8; ++radius) {
    std::vector<int> probe(size_t(d), -radius);
    while (true) {
      std::vector<Rational> pt;
      for (int v : probe) pt.push_back(Rational(v));
      if (!S.detW.evaluate(pt).is_zero()) {
        cert.witness = pt;
        return cert;
      }
      int pos = 0;
      while (pos < d && probe[size_t(pos)] == radius) probe[size_t(pos++)] = -radius;
      if (pos == d) break;
      probe[size_t(pos)] += 1;
    }
  }
  throw IdenticallyDegenerate("no nondegeneracy witness found in the search box");
}

WedgePoly dr_apply(const DynamicalRMatrix& R, const WedgePoly& c) {
  if (!is_equivariant(*R.L, R.base_letters, c))
    throw NotEquivariant("cochain is not equivariant over the dynamical base");
  WedgePoly out = WedgePoly::schouten(R.r, c);
  for (size_t i = 0; i < R.base_letters.size(); ++i) {
    WedgePoly hi = WedgePoly::basis_vector(c.ctx(), R.L, R.base_letters[i]);
    out = out + WedgePoly::wedge(hi, c.derivative_base(int(i)));
  }
  return out;
}

JetScalar remap_base(const JetScalar& v, const JetContext* to_ctx,
                     const std::vector<SPoly>& images) {
  auto subst = [&](const SPoly& p) {
    SPoly out;
    for (auto& term : p.terms()) {
      SPoly acc(term.c);
      for (size_t v2 = 0; v2 < images.size(); ++v2) {
        for (int rep = 0; rep < term.m.e[v2]; ++rep) acc = acc * images[v2];
      }
      Mono rest = term.m;
      for (size_t v2 = 0; v2 < images.size(); ++v2) rest.e[v2] = 0;
      if (rest.deg_all() > 0)
        throw InternalError("remap_base: value involves non-base variables");
      out += acc;
    }
    return out;
  };
  JetScalar out(to_ctx, subst(v.num()), v.watermark());
  for (auto& df : v.den_factors()) {
    SPoly f = subst(df.poly);
    if (f.is_zero())
      throw DegenerateDenominator("denominator vanishes identically after restriction");
    out = JetScalar::fraction(to_ctx, out.num(), f);  // rebuild factor by factor
    for (int e = 1; e < df.exp; ++e)
      out = JetScalar::fraction(to_ctx, out.num(), f);
  }
  return out;
}

DynamicalRMatrix compose_classical(const JetContext* tctx, const LieAlgebraData& L,
                                   const DynamicalRMatrix& outer) {
  if (L.sub_t.empty() && L.comp_mp.empty())
    throw InputInvalid("compose: no inner splitting declared");
  if (!is_equivariant(*outer.L, outer.base_letters, outer.r))
    throw NotEquivariant("compose: outer r-matrix is not equivariant over its base");
  DynamicalRMatrix out;
  out.ctx = tctx;
  out.L = &L;
  out.base_letters = L.sub_t;
  out.r = WedgePoly(tctx, &L, 2);
  if (!L.comp_mp.empty()) {
    // Inner splitting of h: restrict to sub_h with h-part sub_t, complement comp_mp.
    std::vector<int> new_h, new_m;
    for (int t : L.sub_t) new_h.push_back(position_in(L.sub_h, t));
    for (int m : L.comp_mp) new_m.push_back(position_in(L.sub_h, m));
    LieAlgebraData Lh = L.restricted(L.sub_h, new_h, new_m);
    DynamicalRMatrix inner = splitting_r_matrix(tctx, Lh);
    // Embed the inner r into wedge^2 g.
    for (auto& kv : inner.r.terms()) {
      std::vector<int> idx;
      for (int i : kv.first) idx.push_back(L.sub_h[size_t(i)]);
      out.r.add_term(idx, kv.second);
    }
    out.domain_certificate = inner.domain_certificate;
  }
  // rho|_{t*}: substitute lambda_j := <p* tau, h_j> = tau_{pos} for h_j in t, 0 on m'.
  std::vector<SPoly> images(outer.base_letters.size());
  for (size_t j = 0; j < outer.base_letters.size(); ++j) {
    int pos = position_in(L.sub_t, outer.base_letters[j]);
    images[j] = pos >= 0 ? SPoly::variable(pos) : SPoly();
  }
  for (auto& kv : outer.r.terms())
    out.r.add_term(kv.first, remap_base(kv.second, tctx, images));
  for (auto& den : outer.domain_certificate) {
    SPoly sub;
    JetScalar tmp = remap_base(JetScalar(outer.ctx, den), tctx, images);
    sub = tmp.num();
    if (!sub.is_constant()) out.domain_certificate.push_back(sub);
  }
  // Z is constant: carry over.
  out.Z = WedgePoly(tctx, &L, 3);
  for (auto& kv : outer.Z.terms())
    out.Z.add_term(kv.first, JetScalar(tctx, kv.second.num()));
  return out;
}

MultiVecJet build_pi_r(const DynamicalRMatrix& R, const std::vector<VecJet>& left) {
  const JetContext* ctx = R.ctx;
  const LieAlgebraData& L = *R.L;
  const std::vector<int>& letters = R.base_letters;
  MultiVecJet pi(ctx, 2);
  // pi_lin on the base block
  for (size_t i = 0; i < letters.size(); ++i) {
    for (size_t j = i + 1; j < letters.size(); ++j) {
      SPoly coeff = pairing_poly(L, letters, letters[i], letters[j]);
      if (!coeff.is_zero()) pi.add_term({int(i), int(j)}, JetScalar(ctx, coeff));
    }
  }
  // sum_i d/dlambda^i ^ ->h_i
  for (size_t i = 0; i < letters.size(); ++i) {
    MultiVecJet dl(ctx, 1);
    dl.add_term({int(i)}, JetScalar::one(ctx));
    pi = pi + MultiVecJet::wedge(dl, MultiVecJet::from_vector(ctx, left[size_t(letters[i])]));
  }
  // ->r
  for (auto& kv : R.r.terms()) {
    MultiVecJet ea = MultiVecJet::from_vector(ctx, left[size_t(kv.first[0])]);
    MultiVecJet eb = MultiVecJet::from_vector(ctx, left[size_t(kv.first[1])]);
    pi = pi + MultiVecJet::wedge(ea, eb).scaled(kv.second);
  }
  return pi;
}

MultiVecJet invariant_trivector(const WedgePoly& Z, const std::vector<VecJet>& fields) {
  const JetContext* ctx = Z.ctx();
  MultiVecJet out(ctx, 3);
  for (auto& kv : Z.terms()) {
    MultiVecJet a = MultiVecJet::from_vector(ctx, fields[size_t(kv.first[0])]);
    MultiVecJet b = MultiVecJet::from_vector(ctx, fields[size_t(kv.first[1])]);
    MultiVecJet c = MultiVecJet::from_vector(ctx, fields[size_t(kv.first[2])]);
    out = out + MultiVecJet::wedge(MultiVecJet::wedge(a, b), c).scaled(kv.second);
  }
  return out;
}

MultiVecJet quasi_poisson_residual(const MultiVecJet& pi, const MultiVecJet& rho_z) {
  MultiVecJet half = MultiVecJet::schouten(pi, pi).scaled(
      JetScalar(pi.ctx(), Rational(BigInt(1), BigInt(2))));
  if (rho_z.terms().empty()) return half;
  return half - rho_z;
}

std::vector<WedgePoly> random_equivariant_cochains(const JetContext* ctx,
                                                   const LieAlgebraData& L,
                                                   const std::vector<int>& letters,
                                                   int degree, int count, Rng& rng) {
  // Basis of wedge^degree g as ascending tuples.
  std::vector<std::vector<int>> tuples;
  std::vector<int> cur;
  std::function<void(int)> gen = [&](int start) {
    if (int(cur.size()) == degree) {
      tuples.push_back(cur);
      return;
    }
    for (int i = start; i < L.n; ++i) {
      cur.push_back(i);
      gen(i + 1);
      cur.pop_back();
    }
  };
  gen(0);
  // ad_h-invariance: rational nullspace of the stacked action matrices.
  size_t dim = tuples.size();
  std::vector<std::vector<Rational>> rows;
  for (int hb : letters) {
    // action of ad_{h} on wedge^k in the tuple basis
    std::vector<std::vector<Rational>> act(dim, std::vector<Rational>(dim, Rational(0)));
    for (size_t t = 0; t < dim; ++t) {
      WedgePoly w(ctx, &L, degree);
      w.add_term(tuples[t], JetScalar::one(ctx));
      WedgePoly img = WedgePoly::schouten(WedgePoly::basis_vector(ctx, &L, hb), w);
      for (auto& kv : img.terms()) {
        for (size_t s = 0; s < dim; ++s) {
          if (tuples[s] == kv.first) {
            act[s][t] = kv.second.num().constant_value();
            break;
          }
        }
      }
    }
    for (auto& row : act) rows.push_back(row);
  }
  // nullspace via rational Gaussian elimination
  size_t nr = rows.size();
  std::vector<int> pivot_col;
  size_t rank = 0;
  for (size_t col = 0; col < dim && rank < nr; ++col) {
    size_t piv = nr;
    for (size_t r = rank; r < nr; ++r)
      if (!rows[r][col].is_zero()) {
        piv = r;
        break;
      }
    if (piv == nr) continue;
    std::swap(rows[rank], rows[piv]);
    Rational p = rows[rank][col];
    for (size_t c = 0; c < dim; ++c) rows[rank][c] /= p;
    for (size_t r = 0; r < nr; ++r) {
      if (r == rank || rows[r][col].is_zero()) continue;
      Rational f = rows[r][col];
      for (size_t c = 0; c < dim; ++c) rows[r][c] -= f * rows[rank][c];
    }
    pivot_col.push_back(int(col));
    ++rank;
  }
  std::vector<std::vector<Rational>> null_basis;
  for (size_t col = 0; col < dim; ++col) {
    if (std::find(pivot_col.begin(), pivot_col.end(), int(col)) != pivot_col.end()) continue;
    std::vector<Rational> v(dim, Rational(0));
    v[col] = Rational(1);
    for (size_t r = 0; r < rank; ++r)
      v[size_t(pivot_col[r])] = -rows[r][col];
    null_basis.push_back(v);
  }
  // Random rational-function multiples (denominators: powers of det W when a
  // splitting is declared, avoiding the base point by construction).
  SPoly den;
  if (!L.comp_m.empty()) {
    SplittingData S = splitting_pairing(ctx, L);
    if (!S.detW.is_zero() && !S.detW.evaluate(ctx->base_point).is_zero()) den = S.detW;
  }
  std::vector<WedgePoly> out;
  for (int c = 0; c < count; ++c) {
    WedgePoly w(ctx, &L, degree);
    if (null_basis.empty()) {
      out.push_back(w);
      continue;
    }
    const auto& dir = null_basis[size_t(rng.range(0, int(null_basis.size()) - 1))];
    SPoly num;
    for (int t = 0; t < 2; ++t) {
      Mono m;
      for (int s = 0; s < int(rng.range(0, 2)); ++s)
        m.e[size_t(rng.range(0, std::max(0, ctx->n_base - 1)))] += 1;
      num += SPoly(rng.rational(4, 3)).mul_mono(m, Rational(1));
    }
    JetScalar coeff(ctx, num);
    if (!den.is_zero() && rng.range(0, 1))
      coeff = JetScalar::fraction(ctx, coeff.num(), den);
    for (size_t t = 0; t < dim; ++t) {
      if (dir[t].is_zero()) continue;
      w.add_term(tuples[t], coeff.scaled(dir[t]));
    }
    out.push_back(w);
  }
  return out;
}

}  // namespace dyt
