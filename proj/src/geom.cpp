#include "dyt/geom.hpp"

#include <algorithm>

namespace dyt {

void MultiVecJet::add_term(std::vector<int> idx, JetScalar coeff) {
  if (int(idx.size()) != degree_) throw InternalError("MultiVecJet: degree mismatch");
  if (coeff.is_zero()) return;
  int sign = 1;
  for (size_t i = 1; i < idx.size(); ++i) {
    size_t j = i;
    while (j > 0 && idx[j - 1] > idx[j]) {
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
      --j;
    }
  }
  for (size_t i = 1; i < idx.size(); ++i)
    if (idx[i] == idx[i - 1]) return;
  JetScalar add = sign < 0 ? -coeff : coeff;
  auto it = terms_.find(idx);
  if (it == terms_.end()) {
    terms_.emplace(std::move(idx), std::move(add));
  } else {
    it->second += add;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

JetScalar MultiVecJet::coefficient(const std::vector<int>& idx) const {
  auto it = terms_.find(idx);
  return it == terms_.end() ? JetScalar::zero(ctx_) : it->second;
}

MultiVecJet operator+(const MultiVecJet& a, const MultiVecJet& b) {
  if (a.terms_.empty()) return b;
  if (b.terms_.empty()) return a;
  MultiVecJet r = a;
  for (auto& kv : b.terms_) r.add_term(kv.first, kv.second);
  return r;
}

MultiVecJet MultiVecJet::operator-() const {
  MultiVecJet r = *this;
  for (auto& kv : r.terms_) kv.second = -kv.second;
  return r;
}

MultiVecJet operator-(const MultiVecJet& a, const MultiVecJet& b) { return a + (-b); }

MultiVecJet MultiVecJet::scaled(const JetScalar& c) const {
  MultiVecJet r(ctx_, degree_);
  for (auto& kv : terms_) r.add_term(kv.first, kv.second * c);
  return r;
}

MultiVecJet MultiVecJet::from_vector(const JetContext* ctx, const VecJet& v) {
  MultiVecJet r(ctx, 1);
  for (size_t i = 0; i < v.size(); ++i) r.add_term({int(i)}, v[i]);
  return r;
}

MultiVecJet MultiVecJet::wedge(const MultiVecJet& a, const MultiVecJet& b) {
  MultiVecJet r(a.ctx_ ? a.ctx_ : b.ctx_, a.degree_ + b.degree_);
  for (auto& ta : a.terms_) {
    for (auto& tb : b.terms_) {
      std::vector<int> idx = ta.first;
      idx.insert(idx.end(), tb.first.begin(), tb.first.end());
      r.add_term(std::move(idx), ta.second * tb.second);
    }
  }
  return r;
}

namespace {

// compose := sum_i (left theta-derivative of P at i) wedge (d_i Q)
MultiVecJet bv_compose(const MultiVecJet& P, const MultiVecJet& Q) {
  MultiVecJet r(P.ctx() ? P.ctx() : Q.ctx(), P.degree() + Q.degree() - 1);
  for (auto& tp : P.terms()) {
    for (size_t s = 0; s < tp.first.size(); ++s) {
      int i = tp.first[s];
      int sgn = (s % 2 == 0) ? 1 : -1;  // left derivative sign (-1)^(s)
      std::vector<int> rest;
      for (size_t t = 0; t < tp.first.size(); ++t)
        if (t != s) rest.push_back(tp.first[t]);
      for (auto& tq : Q.terms()) {
        JetScalar dq = tq.second.derivative(i);
        if (dq.is_zero()) continue;
        JetScalar coeff = tp.second * dq;
        if (sgn < 0) coeff = -coeff;
        std::vector<int> idx = rest;
        idx.insert(idx.end(), tq.first.begin(), tq.first.end());
        r.add_term(std::move(idx), std::move(coeff));
      }
    }
  }
  return r;
}

}  // namespace

MultiVecJet MultiVecJet::schouten(const MultiVecJet& a, const MultiVecJet& b) {
  // [P,Q] = (-1)^(p+1) P o Q - (-1)^((p-1)(q-1)) (-1)^(q+1) Q o P, the
  // dressing that reproduces the pinned Leibniz conventions (see tests).
  int p = a.degree_, q = b.degree_;
  MultiVecJet pq = bv_compose(a, b);
  MultiVecJet qp = bv_compose(b, a);
  int s1 = (p + 1) % 2 == 0 ? 1 : -1;
  int s2 = -(((p - 1) * (q - 1)) % 2 == 0 ? 1 : -1) * ((q + 1) % 2 == 0 ? 1 : -1);
  MultiVecJet r = s1 > 0 ? pq : -pq;
  r = r + (s2 > 0 ? qp : -qp);
  return r;
}

bool MultiVecJet::is_zero_upto(int through) const {
  for (auto& kv : terms_)
    if (!kv.second.is_zero_upto(through)) return false;
  return true;
}

bool MultiVecJet::equals_upto(const MultiVecJet& o, int through) const {
  return (*this - o).is_zero_upto(through);
}

std::string MultiVecJet::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (auto& kv : terms_) {
    if (!out.empty()) out += " + ";
    out += "[" + kv.second.to_string() + "]";
    for (size_t i = 0; i < kv.first.size(); ++i) {
      out += (i ? "^d_" : " d_");
      out += ctx_->var_names[size_t(kv.first[i])];
    }
  }
  return out;
}

void FormJet::add_term(std::vector<int> idx, JetScalar coeff) {
  if (int(idx.size()) != degree_) throw InternalError("FormJet: degree mismatch");
  if (coeff.is_zero()) return;
  int sign = 1;
  for (size_t i = 1; i < idx.size(); ++i) {
    size_t j = i;
    while (j > 0 && idx[j - 1] > idx[j]) {
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
      --j;
    }
  }
  for (size_t i = 1; i < idx.size(); ++i)
    if (idx[i] == idx[i - 1]) return;
  JetScalar add = sign < 0 ? -coeff : coeff;
  auto it = terms_.find(idx);
  if (it == terms_.end()) {
    terms_.emplace(std::move(idx), std::move(add));
  } else {
    it->second += add;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

JetScalar FormJet::coefficient(const std::vector<int>& idx) const {
  auto it = terms_.find(idx);
  return it == terms_.end() ? JetScalar::zero(ctx_) : it->second;
}

FormJet operator+(const FormJet& a, const FormJet& b) {
  if (a.terms_.empty()) return b;
  if (b.terms_.empty()) return a;
  FormJet r = a;
  for (auto& kv : b.terms_) r.add_term(kv.first, kv.second);
  return r;
}

FormJet FormJet::operator-() const {
  FormJet r = *this;
  for (auto& kv : r.terms_) kv.second = -kv.second;
  return r;
}

FormJet operator-(const FormJet& a, const FormJet& b) { return a + (-b); }

FormJet FormJet::scaled(const JetScalar& c) const {
  FormJet r(ctx_, degree_);
  for (auto& kv : terms_) r.add_term(kv.first, kv.second * c);
  return r;
}

FormJet FormJet::exterior_d() const {
  FormJet r(ctx_, degree_ + 1);
  int n = ctx_->n_base + ctx_->n_group;
  for (auto& kv : terms_) {
    for (int i = 0; i < n; ++i) {
      JetScalar d = kv.second.derivative(i);
      if (d.is_zero()) continue;
      std::vector<int> idx;
      idx.push_back(i);
      idx.insert(idx.end(), kv.first.begin(), kv.first.end());
      r.add_term(std::move(idx), std::move(d));
    }
  }
  return r;
}

FormJet FormJet::contract(const VecJet& X) const {
  FormJet r(ctx_, degree_ - 1);
  for (auto& kv : terms_) {
    for (size_t s = 0; s < kv.first.size(); ++s) {
      int i = kv.first[s];
      const JetScalar& xi = X[size_t(i)];
      if (xi.is_zero()) continue;
      std::vector<int> rest;
      for (size_t t = 0; t < kv.first.size(); ++t)
        if (t != s) rest.push_back(kv.first[t]);
      JetScalar coeff = kv.second * xi;
      if (s % 2 == 1) coeff = -coeff;
      r.add_term(std::move(rest), std::move(coeff));
    }
  }
  return r;
}

FormJet FormJet::wedge(const FormJet& a, const FormJet& b) {
  FormJet r(a.ctx_ ? a.ctx_ : b.ctx_, a.degree_ + b.degree_);
  for (auto& ta : a.terms_) {
    for (auto& tb : b.terms_) {
      std::vector<int> idx = ta.first;
      idx.insert(idx.end(), tb.first.begin(), tb.first.end());
      r.add_term(std::move(idx), ta.second * tb.second);
    }
  }
  return r;
}

bool FormJet::is_zero_upto(int through) const {
  for (auto& kv : terms_)
    if (!kv.second.is_zero_upto(through)) return false;
  return true;
}

bool FormJet::equals_upto(const FormJet& o, int through) const {
  return (*this - o).is_zero_upto(through);
}

std::string FormJet::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (auto& kv : terms_) {
    if (!out.empty()) out += " + ";
    out += "[" + kv.second.to_string() + "]";
    for (size_t i = 0; i < kv.first.size(); ++i) {
      out += (i ? "^dx_" : " dx_");
      out += ctx_->var_names[size_t(kv.first[i])];
    }
  }
  return out;
}

JetMatrix jet_matrix_identity(const JetContext* ctx, int n) {
  JetMatrix m(size_t(n), std::vector<JetScalar>(size_t(n), JetScalar::zero(ctx)));
  for (int i = 0; i < n; ++i) m[size_t(i)][size_t(i)] = JetScalar::one(ctx);
  return m;
}

JetMatrix jet_matrix_mul(const JetMatrix& a, const JetMatrix& b) {
  size_t n = a.size(), m = b[0].size(), k = b.size();
  const JetContext* ctx = a[0][0].ctx();
  JetMatrix r(n, std::vector<JetScalar>(m, JetScalar::zero(ctx)));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < m; ++j) {
      JetScalar s = JetScalar::zero(ctx);
      for (size_t t = 0; t < k; ++t) s += a[i][t] * b[t][j];
      r[i][j] = s;
    }
  return r;
}

JetMatrix jet_matrix_inverse(const JetMatrix& a) {
  const JetContext* ctx = a[0][0].ctx();
  int n = int(a.size());
  // Split a = a0 + nil where a0 is the group-degree-0 part.
  JetMatrix a0(a.size(), std::vector<JetScalar>(a.size(), JetScalar::zero(ctx)));
  JetMatrix nil = a0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      JetScalar base = a[size_t(i)][size_t(j)].base_part();
      a0[size_t(i)][size_t(j)] = base;
      nil[size_t(i)][size_t(j)] = a[size_t(i)][size_t(j)] - base;
    }
  }
  // Exact Gauss-Jordan on the base part over the rational-function field.
  JetMatrix left = a0;
  JetMatrix inv = jet_matrix_identity(ctx, n);
  for (int col = 0; col < n; ++col) {
    // Prefer a pivot that does not vanish at the base point so the exact
    // divisions stay admissible.
    int pivot = -1, fallback = -1;
    for (int row = col; row < n; ++row) {
      JetScalar v = left[size_t(row)][size_t(col)].normalized();
      if (v.is_zero()) continue;
      if (fallback < 0) fallback = row;
      bool ok = true;
      try {
        auto vals = v.evaluate_at_base();
        ok = !vals.empty() && !vals[0].is_zero();
      } catch (const DegenerateDenominator&) {
        ok = false;
      }
      if (ok) {
        pivot = row;
        break;
      }
    }
    if (pivot < 0) pivot = fallback;
    if (pivot < 0) throw DegenerateAtBasePoint("matrix not invertible over the base field");
    std::swap(left[size_t(pivot)], left[size_t(col)]);
    std::swap(inv[size_t(pivot)], inv[size_t(col)]);
    JetScalar p = left[size_t(col)][size_t(col)];
    try {
      for (int j = 0; j < n; ++j) {
        left[size_t(col)][size_t(j)] = left[size_t(col)][size_t(j)] / p;
        inv[size_t(col)][size_t(j)] = inv[size_t(col)][size_t(j)] / p;
      }
    } catch (const DegenerateDenominator&) {
      throw DegenerateAtBasePoint("matrix is singular at the base point");
    }
    for (int row = 0; row < n; ++row) {
      if (row == col) continue;
      JetScalar f = left[size_t(row)][size_t(col)];
      if (f.is_zero()) continue;
      for (int j = 0; j < n; ++j) {
        left[size_t(row)][size_t(j)] = left[size_t(row)][size_t(j)] - f * left[size_t(col)][size_t(j)];
        inv[size_t(row)][size_t(j)] = inv[size_t(row)][size_t(j)] - f * inv[size_t(col)][size_t(j)];
      }
    }
  }
  // Neumann series for the nilpotent remainder: (a0 + N)^-1
  //   = sum_k (-a0^-1 N)^k a0^-1.
  JetMatrix a0inv_n = jet_matrix_mul(inv, nil);
  JetMatrix acc = inv;      // running (-(a0inv N))^k a0inv
  JetMatrix result = inv;
  for (int k = 1; k <= ctx->Dx + ctx->Nh; ++k) {
    acc = jet_matrix_mul(a0inv_n, acc);
    bool all_zero = true;
    for (auto& row : acc)
      for (auto& e : row)
        if (!e.is_zero()) all_zero = false;
    if (all_zero) break;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        result[size_t(i)][size_t(j)] =
            (k % 2 == 1) ? result[size_t(i)][size_t(j)] - acc[size_t(i)][size_t(j)]
                         : result[size_t(i)][size_t(j)] + acc[size_t(i)][size_t(j)];
  }
  return result;
}

std::vector<Rational> phi_series(int k) {
  // phi(z) = (1 - e^{-z})/z = sum_j (-1)^j z^j / (j+1)!
  std::vector<Rational> phi(size_t(k) + 1);
  Rational fact(1);
  for (int j = 0; j <= k; ++j) {
    fact *= Rational(j + 1);
    phi[size_t(j)] = Rational(BigInt(j % 2 ? -1 : 1), BigInt(1)) / fact;
  }
  return phi;
}

std::vector<Rational> psi_series(int k) {
  std::vector<Rational> phi = phi_series(k);
  std::vector<Rational> psi(size_t(k) + 1);
  psi[0] = Rational(1);
  for (int j = 1; j <= k; ++j) {
    Rational s(0);
    for (int i = 0; i < j; ++i) s += psi[size_t(i)] * phi[size_t(j - i)];
    psi[size_t(j)] = -s;
  }
  return psi;
}

JetMatrix ad_series_matrix(const JetContext* ctx, const LieAlgebraData& L,
                           const std::vector<Rational>& coeffs) {
  int n = L.n;
  if (n != ctx->n_group) throw InternalError("ad_series_matrix: dimension mismatch");
  // A[b][a] = x^c c^b_{ca}
  JetMatrix A(size_t(n), std::vector<JetScalar>(size_t(n), JetScalar::zero(ctx)));
  for (int b = 0; b < n; ++b)
    for (int a = 0; a < n; ++a) {
      SPoly s;
      for (int c = 0; c < n; ++c) {
        const Rational& v = L.c3(b, c, a);
        if (!v.is_zero()) s += SPoly(v).mul_mono(Mono::var(ctx->group_lo() + c), Rational(1));
      }
      A[size_t(b)][size_t(a)] = JetScalar(ctx, s);
    }
  JetMatrix result = jet_matrix_identity(ctx, n);
  for (auto& row : result)
    for (auto& e : row) e = e.scaled(coeffs[0]);
  JetMatrix power = jet_matrix_identity(ctx, n);
  for (int k = 1; k < int(coeffs.size()) && k <= ctx->Dx; ++k) {
    power = jet_matrix_mul(power, A);
    if (coeffs[size_t(k)].is_zero()) continue;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        result[size_t(i)][size_t(j)] += power[size_t(i)][size_t(j)].scaled(coeffs[size_t(k)]);
  }
  return result;
}

std::vector<VecJet> invariant_vector_fields(const JetContext* ctx, const LieAlgebraData& L,
                                            Side side) {
  std::vector<Rational> psi = psi_series(ctx->Dx);
  if (side == Side::Right)
    for (size_t j = 1; j < psi.size(); j += 2) psi[j] = -psi[j];  // psi(-z)
  JetMatrix M = ad_series_matrix(ctx, L, psi);
  int n = L.n, total = ctx->n_base + ctx->n_group;
  std::vector<VecJet> fields;
  for (int a = 0; a < n; ++a) {
    VecJet f(size_t(total), JetScalar::zero(ctx));
    for (int b = 0; b < n; ++b) f[size_t(ctx->group_lo() + b)] = M[size_t(b)][size_t(a)];
    fields.push_back(std::move(f));
  }
  return fields;
}

std::vector<FormJet> invariant_coframe(const JetContext* ctx, const LieAlgebraData& L) {
  JetMatrix M = ad_series_matrix(ctx, L, phi_series(ctx->Dx));
  std::vector<FormJet> theta;
  for (int a = 0; a < L.n; ++a) {
    FormJet t(ctx, 1);
    for (int b = 0; b < L.n; ++b) t.add_term({ctx->group_lo() + b}, M[size_t(a)][size_t(b)]);
    theta.push_back(std::move(t));
  }
  return theta;
}

std::vector<JetScalar> bch_product(const JetContext* ctx, const LieAlgebraData& L,
                                   const std::vector<int>& u_vars,
                                   const std::vector<int>& v_vars) {
  int n = L.n;
  int M = ctx->Dx;
  std::vector<Rational> psi = psi_series(M);
  using GVec = std::vector<JetScalar>;  // g-valued, components by basis index
  auto zero_gvec = [&]() { return GVec(size_t(n), JetScalar::zero(ctx)); };
  auto ad = [&](const GVec& w, const GVec& s) {
    GVec r = zero_gvec();
    for (int i = 0; i < n; ++i) {
      if (w[size_t(i)].is_zero()) continue;
      for (int j = 0; j < n; ++j) {
        if (s[size_t(j)].is_zero()) continue;
        for (int k = 0; k < n; ++k) {
          const Rational& c = L.c3(k, i, j);
          if (!c.is_zero()) r[size_t(k)] += (w[size_t(i)] * s[size_t(j)]).scaled(c);
        }
      }
    }
    return r;
  };
  GVec u = zero_gvec(), v = zero_gvec();
  for (int a = 0; a < n; ++a) {
    u[size_t(a)] = JetScalar::variable(ctx, u_vars[size_t(a)]);
    v[size_t(a)] = JetScalar::variable(ctx, v_vars[size_t(a)]);
  }
  // w(t) = sum_m w[m] t^m, dw/dt = psi(ad_w)(v), w(0) = u.
  std::vector<GVec> w;
  w.push_back(u);
  for (int m = 0; m < M; ++m) {
    // S[j][q] = t^q-coefficient of (ad_w)^j (v), built from w[0..m]
    std::vector<std::vector<GVec>> S;
    S.push_back(std::vector<GVec>(size_t(m) + 1, zero_gvec()));
    S[0][0] = v;
    GVec Fm = S[0][size_t(m)];
    for (size_t k = 0; k < Fm.size(); ++k) Fm[k] = Fm[k].scaled(psi[0]);
    for (int j = 1; j <= M; ++j) {
      std::vector<GVec> Sj(size_t(m) + 1, zero_gvec());
      bool nonzero = false;
      for (int q = 0; q <= m; ++q) {
        for (int p = 0; p + q <= m; ++p) {
          if (p >= int(w.size())) continue;
          GVec piece = ad(w[size_t(p)], S[size_t(j - 1)][size_t(q)]);
          for (int k = 0; k < n; ++k) {
            if (!piece[size_t(k)].is_zero()) {
              Sj[size_t(p + q)][size_t(k)] += piece[size_t(k)];
              nonzero = true;
            }
          }
        }
      }
      S.push_back(Sj);
      if (!psi[size_t(j)].is_zero())
        for (int k = 0; k < n; ++k) Fm[size_t(k)] += Sj[size_t(m)][size_t(k)].scaled(psi[size_t(j)]);
      if (!nonzero) break;
    }
    GVec next = zero_gvec();
    Rational inv(BigInt(1), BigInt(m + 1));
    for (int k = 0; k < n; ++k) next[size_t(k)] = Fm[size_t(k)].scaled(inv);
    w.push_back(next);
  }
  std::vector<JetScalar> z(size_t(n), JetScalar::zero(ctx));
  for (auto& wm : w)
    for (int k = 0; k < n; ++k) z[size_t(k)] += wm[size_t(k)];
  return z;
}

ConnectionJet half_bracket_connection(
    const JetContext* ctx, const std::vector<VecJet>& frame,
    const std::vector<std::vector<std::vector<Rational>>>& frame_c) {
  int n = int(frame.size());
  // B^i_I = frame[I][i]; A = B^{-1}.
  JetMatrix B(size_t(n), std::vector<JetScalar>(size_t(n), JetScalar::zero(ctx)));
  for (int i = 0; i < n; ++i)
    for (int I = 0; I < n; ++I) B[size_t(i)][size_t(I)] = frame[size_t(I)][size_t(i)];
  JetMatrix A;
  try {
    A = jet_matrix_inverse(B);
  } catch (const DegenerateAtBasePoint&) {
    throw FrameDegenerate("frame does not span at the base point");
  }
  ConnectionJet G;
  G.ctx = ctx;
  G.Gamma.assign(size_t(n), JetMatrix(size_t(n), std::vector<JetScalar>(size_t(n), JetScalar::zero(ctx))));
  // Gamma^k_{ij} = A^I_i (b_I . A^J_j) B^k_J + 1/2 A^I_i A^J_j C^K_{IJ} B^k_K
  // with b_I . f = sum_m B^m_I d_m f.
  // Precompute D[I][J][j] = b_I . A^J_j.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        JetScalar s = JetScalar::zero(ctx);
        for (int I = 0; I < n; ++I) {
          const JetScalar& AIi = A[size_t(I)][size_t(i)];
          if (AIi.is_zero()) continue;
          for (int J = 0; J < n; ++J) {
            // first piece: A^I_i (b_I . A^J_j) B^k_J
            JetScalar bIAJj = JetScalar::zero(ctx);
            for (int m = 0; m < n; ++m) {
              const JetScalar& BmI = B[size_t(m)][size_t(I)];
              if (BmI.is_zero()) continue;
              JetScalar d = A[size_t(J)][size_t(j)].derivative(m);
              if (!d.is_zero()) bIAJj += BmI * d;
            }
            if (!bIAJj.is_zero()) s += AIi * bIAJj * B[size_t(k)][size_t(J)];
            // second piece
            const JetScalar& AJj = A[size_t(J)][size_t(j)];
            if (AJj.is_zero()) continue;
            for (int K = 0; K < n; ++K) {
              const Rational& C = frame_c[size_t(K)][size_t(I)][size_t(J)];
              if (C.is_zero()) continue;
              s += (AIi * AJj * B[size_t(k)][size_t(K)]).scaled(C / Rational(2));
            }
          }
        }
        G.Gamma[size_t(k)][size_t(i)][size_t(j)] = s;
      }
    }
  }
  return G;
}

bool connection_torsion_free(const ConnectionJet& G) {
  int n = G.n();
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (!G.Gamma[size_t(k)][size_t(i)][size_t(j)].equals_upto(
                G.Gamma[size_t(k)][size_t(j)][size_t(i)]))
          return false;
  return true;
}

JetScalar covariant_derivative_form(const ConnectionJet& G, const JetMatrix& omega,
                                    int i, int j, int k) {
  int n = G.n();
  JetScalar s = omega[size_t(j)][size_t(k)].derivative(i);
  for (int l = 0; l < n; ++l) {
    s -= G.Gamma[size_t(l)][size_t(i)][size_t(j)] * omega[size_t(l)][size_t(k)];
    s -= G.Gamma[size_t(l)][size_t(i)][size_t(k)] * omega[size_t(j)][size_t(l)];
  }
  return s;
}

ConnectionJet symplectize_connection(const ConnectionJet& G, const JetMatrix& omega,
                                     const JetMatrix& pi) {
  const JetContext* ctx = G.ctx;
  int n = G.n();
  ConnectionJet out = G;
  Rational third(BigInt(1), BigInt(3));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      std::vector<JetScalar> s_k;
      for (int k = 0; k < n; ++k) {
        JetScalar T1 = covariant_derivative_form(G, omega, i, j, k);
        JetScalar T2 = covariant_derivative_form(G, omega, j, i, k);
        s_k.push_back((T1 + T2).scaled(third));
      }
      for (int m = 0; m < n; ++m) {
        JetScalar S = JetScalar::zero(ctx);
        for (int k = 0; k < n; ++k)
          if (!s_k[size_t(k)].is_zero()) S += s_k[size_t(k)] * pi[size_t(k)][size_t(m)];
        out.Gamma[size_t(m)][size_t(i)][size_t(j)] += S;
        if (i != j) out.Gamma[size_t(m)][size_t(j)][size_t(i)] += S;
      }
    }
  }
  return out;
}

CurvatureJet curvature(const ConnectionJet& G, const JetMatrix& omega) {
  const JetContext* ctx = G.ctx;
  int n = G.n();
  CurvatureJet R;
  R.ctx = ctx;
  R.n = n;
  R.R.assign(size_t(n) * size_t(n) * size_t(n) * size_t(n), JetScalar::zero(ctx));
  // R^m_{jkl} = d_k G^m_{lj} - d_l G^m_{kj} + G^m_{kp} G^p_{lj} - G^m_{lp} G^p_{kj}
  for (int m = 0; m < n; ++m) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        for (int l = k + 1; l < n; ++l) {
          JetScalar v = G.Gamma[size_t(m)][size_t(l)][size_t(j)].derivative(k) -
                        G.Gamma[size_t(m)][size_t(k)][size_t(j)].derivative(l);
          for (int p = 0; p < n; ++p) {
            v += G.Gamma[size_t(m)][size_t(k)][size_t(p)] * G.Gamma[size_t(p)][size_t(l)][size_t(j)];
            v -= G.Gamma[size_t(m)][size_t(l)][size_t(p)] * G.Gamma[size_t(p)][size_t(k)][size_t(j)];
          }
          // lower the first index with omega
          for (int i = 0; i < n; ++i) {
            const JetScalar& w = omega[size_t(i)][size_t(m)];
            if (w.is_zero()) continue;
            JetScalar low = w * v;
            R.at(i, j, k, l) += low;
            R.at(i, j, l, k) -= low;
          }
        }
      }
    }
  }
  return R;
}

JetScalar lie_derivative_connection(const ConnectionJet& G, const VecJet& X,
                                    int k, int i, int j) {
  const JetContext* ctx = G.ctx;
  int n = G.n();
  JetScalar s = JetScalar::zero(ctx);
  for (int m = 0; m < n; ++m) {
    s += X[size_t(m)] * G.Gamma[size_t(k)][size_t(i)][size_t(j)].derivative(m);
    s -= X[size_t(k)].derivative(m) * G.Gamma[size_t(m)][size_t(i)][size_t(j)];
    s += X[size_t(m)].derivative(i) * G.Gamma[size_t(k)][size_t(m)][size_t(j)];
    s += X[size_t(m)].derivative(j) * G.Gamma[size_t(k)][size_t(i)][size_t(m)];
  }
  s += X[size_t(k)].derivative(i).derivative(j);
  return s;
}

JetMatrix bivector_matrix(const MultiVecJet& pi, int n) {
  const JetContext* ctx = pi.ctx();
  JetMatrix m(size_t(n), std::vector<JetScalar>(size_t(n), JetScalar::zero(ctx)));
  for (auto& kv : pi.terms()) {
    int i = kv.first[0], j = kv.first[1];
    m[size_t(i)][size_t(j)] = kv.second;
    m[size_t(j)][size_t(i)] = -kv.second;
  }
  return m;
}

MultiVecJet bivector_from_matrix(const JetContext* ctx, const JetMatrix& m) {
  MultiVecJet pi(ctx, 2);
  int n = int(m.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pi.add_term({i, j}, m[size_t(i)][size_t(j)]);
  return pi;
}

FormJet form_from_matrix(const JetContext* ctx, const JetMatrix& m) {
  FormJet w(ctx, 2);
  int n = int(m.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) w.add_term({i, j}, m[size_t(i)][size_t(j)]);
  return w;
}

JetMatrix form_matrix(const FormJet& w, int n) {
  const JetContext* ctx = w.ctx();
  JetMatrix m(size_t(n), std::vector<JetScalar>(size_t(n), JetScalar::zero(ctx)));
  for (auto& kv : w.terms()) {
    int i = kv.first[0], j = kv.first[1];
    m[size_t(i)][size_t(j)] = kv.second;
    m[size_t(j)][size_t(i)] = -kv.second;
  }
  return m;
}

JetMatrix invert_bivector(const JetMatrix& pi) { return jet_matrix_inverse(pi); }

VecJet hamiltonian_field(const JetMatrix& pi, const JetScalar& H) {
  const JetContext* ctx = H.ctx();
  int n = int(pi.size());
  VecJet chi(size_t(n), JetScalar::zero(ctx));
  for (int j = 0; j < n; ++j) {
    JetScalar s = JetScalar::zero(ctx);
    for (int i = 0; i < n; ++i) {
      JetScalar d = H.derivative(i);
      if (!d.is_zero() && !pi[size_t(i)][size_t(j)].is_zero()) s += d * pi[size_t(i)][size_t(j)];
    }
    chi[size_t(j)] = s;
  }
  return chi;
}

JetScalar poisson_bracket(const JetMatrix& pi, const JetScalar& f, const JetScalar& g) {
  const JetContext* ctx = f.ctx();
  int n = int(pi.size());
  JetScalar s = JetScalar::zero(ctx);
  for (int i = 0; i < n; ++i) {
    JetScalar df = f.derivative(i);
    if (df.is_zero()) continue;
    for (int j = 0; j < n; ++j) {
      if (pi[size_t(i)][size_t(j)].is_zero()) continue;
      JetScalar dg = g.derivative(j);
      if (!dg.is_zero()) s += df * pi[size_t(i)][size_t(j)] * dg;
    }
  }
  return s;
}

}  // namespace dyt
