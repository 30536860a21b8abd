#include "dyt/diffop.hpp"

#include <algorithm>

namespace dyt {

namespace {

const std::map<MultiDiffOp::Key, JetScalar> kEmpty;

// Enumerate splits of a multi-index `c` into `parts` multi-indices with
// multinomial coefficients prod_i C(c_i; parts).
void enumerate_splits(const Mono& c, int parts,
                      const std::function<void(const std::vector<Mono>&, const Rational&)>& emit) {
  std::vector<Mono> cur;
  cur.resize(size_t(parts));
  std::function<void(int, Rational)> rec = [&](int var, Rational coeff) {
    if (var == kMaxVars) {
      emit(cur, coeff);
      return;
    }
    int e = c.e[size_t(var)];
    if (e == 0) {
      rec(var + 1, coeff);
      return;
    }
    // compositions of e into `parts` parts with multinomial e!/(prod k_i!)
    std::vector<int> comp(size_t(parts), 0);
    std::function<void(int, int, Rational)> comp_rec = [&](int slot, int left, Rational mult) {
      if (slot == parts - 1) {
        comp[size_t(slot)] = left;
        // multinomial: e! / prod comp!
        Rational fact(1);
        {
          Rational efact(1);
          for (int t = 2; t <= e; ++t) efact *= Rational(t);
          Rational dfact(1);
          for (int s = 0; s < parts; ++s)
            for (int t = 2; t <= comp[size_t(s)]; ++t) dfact *= Rational(t);
          fact = efact / dfact;
        }
        for (int s = 0; s < parts; ++s) cur[size_t(s)].e[size_t(var)] = uint8_t(comp[size_t(s)]);
        rec(var + 1, coeff * fact * mult);
        for (int s = 0; s < parts; ++s) cur[size_t(s)].e[size_t(var)] = 0;
        return;
      }
      for (int k = 0; k <= left; ++k) {
        comp[size_t(slot)] = k;
        comp_rec(slot + 1, left - k, mult);
      }
      comp[size_t(slot)] = 0;
    };
    comp_rec(0, e, Rational(1));
  };
  rec(0, Rational(1));
}

}  // namespace

MultiDiffOp MultiDiffOp::identity(const JetContext* ctx) {
  MultiDiffOp op(ctx, 1);
  op.add(0, Key{Mono::one(), Mono::one(), Mono::one()}, JetScalar::one(ctx));
  return op;
}

MultiDiffOp MultiDiffOp::multiplication(const JetContext* ctx) {
  MultiDiffOp op(ctx, 2);
  op.add(0, Key{Mono::one(), Mono::one(), Mono::one()}, JetScalar::one(ctx));
  return op;
}

const std::map<MultiDiffOp::Key, JetScalar>& MultiDiffOp::stratum(int k) const {
  if (k < 0 || k >= int(strata_.size())) return kEmpty;
  return strata_[size_t(k)];
}

void MultiDiffOp::add(int hpow, const Key& k, const JetScalar& coeff) {
  if (coeff.is_zero() || hpow > ctx_->Nh) return;
  if (!coeff.is_hbar_free()) throw InternalError("MultiDiffOp: coefficient carries hbar");
  while (int(strata_.size()) <= hpow) strata_.push_back({});
  auto& st = strata_[size_t(hpow)];
  auto it = st.find(k);
  if (it == st.end()) {
    st.emplace(k, coeff);
  } else {
    it->second += coeff;
    if (it->second.is_zero()) st.erase(it);
  }
}

JetScalar MultiDiffOp::apply(const std::vector<JetScalar>& args) const {
  if (int(args.size()) != arity_) throw InternalError("MultiDiffOp: arity mismatch");
  const JetContext* ctx = ctx_;
  JetScalar out = JetScalar::zero(ctx);
  for (int k = 0; k < int(strata_.size()); ++k) {
    for (auto& kv : strata_[size_t(k)]) {
      JetScalar piece = kv.second;
      bool dead = false;
      for (int s = 0; s < arity_ && !dead; ++s) {
        JetScalar d = args[size_t(s)];
        const Mono& a = kv.first[size_t(s)];
        for (int v = 0; v < kMaxVars && !dead; ++v)
          for (int rep = 0; rep < a.e[size_t(v)]; ++rep) {
            d = d.derivative(v);
            if (d.is_zero()) {
              dead = true;
              break;
            }
          }
        if (!dead) piece = piece * d;
        if (piece.is_zero()) dead = true;
      }
      if (!dead) out += piece.mul_hbar(k);
    }
  }
  return out;
}

JetScalar MultiDiffOp::apply1(const JetScalar& f) const { return apply({f}); }
JetScalar MultiDiffOp::apply2(const JetScalar& f, const JetScalar& g) const {
  return apply({f, g});
}

MultiDiffOp operator+(const MultiDiffOp& a, const MultiDiffOp& b) {
  MultiDiffOp r = a.ctx_ ? a : b;
  if (a.ctx_ == nullptr) return r;
  for (int k = 0; k < int(b.strata_.size()); ++k)
    for (auto& kv : b.strata_[size_t(k)]) r.add(k, kv.first, kv.second);
  return r;
}

MultiDiffOp MultiDiffOp::operator-() const {
  MultiDiffOp r = *this;
  for (auto& st : r.strata_)
    for (auto& kv : st) kv.second = -kv.second;
  return r;
}

MultiDiffOp operator-(const MultiDiffOp& a, const MultiDiffOp& b) { return a + (-b); }

MultiDiffOp MultiDiffOp::scaled(const Rational& c) const {
  MultiDiffOp r(ctx_, arity_);
  for (int k = 0; k < int(strata_.size()); ++k)
    for (auto& kv : strata_[size_t(k)]) r.add(k, kv.first, kv.second.scaled(c));
  return r;
}

MultiDiffOp MultiDiffOp::mul_hbar(int k) const {
  MultiDiffOp r(ctx_, arity_);
  for (int j = 0; j < int(strata_.size()); ++j)
    for (auto& kv : strata_[size_t(j)]) r.add(j + k, kv.first, kv.second);
  return r;
}

MultiDiffOp MultiDiffOp::truncate_hbar(int maxpow) const {
  MultiDiffOp r(ctx_, arity_);
  for (int j = 0; j < int(strata_.size()) && j <= maxpow; ++j)
    for (auto& kv : strata_[size_t(j)]) r.add(j, kv.first, kv.second);
  return r;
}

bool MultiDiffOp::is_zero_mod(int hbar_order, int watermark) const {
  for (int j = 0; j < int(strata_.size()) && j <= hbar_order; ++j)
    for (auto& kv : strata_[size_t(j)])
      if (!kv.second.is_zero_upto(watermark)) return false;
  return true;
}

MultiDiffOp MultiDiffOp::post_compose(const MultiDiffOp& P, const MultiDiffOp& B, int max_h) {
  if (P.arity_ != 1) throw InternalError("post_compose: P must have arity 1");
  MultiDiffOp out(B.ctx_, B.arity_);
  for (int kp = 0; kp < int(P.strata_.size()); ++kp) {
    for (auto& pv : P.strata_[size_t(kp)]) {
      const Mono& c = pv.first[0];
      for (int kb = 0; kb < int(B.strata_.size()) && kp + kb <= max_h; ++kb) {
        for (auto& bv : B.strata_[size_t(kb)]) {
          // d^c (coeff * prod d^{a_s} f_s): split c among coefficient and slots
          enumerate_splits(c, B.arity_ + 1, [&](const std::vector<Mono>& parts,
                                                const Rational& mult) {
            JetScalar coeff = bv.second;
            for (int v = 0; v < kMaxVars && !coeff.is_zero(); ++v)
              for (int rep = 0; rep < parts[0].e[size_t(v)]; ++rep)
                coeff = coeff.derivative(v);
            if (coeff.is_zero()) return;
            coeff = (pv.second * coeff).scaled(mult);
            if (coeff.is_zero()) return;
            Key key{Mono::one(), Mono::one(), Mono::one()};
            for (int s = 0; s < B.arity_; ++s)
              key[size_t(s)] = bv.first[size_t(s)] * parts[size_t(s + 1)];
            out.add(kp + kb, key, coeff);
          });
        }
      }
    }
  }
  return out;
}

MultiDiffOp MultiDiffOp::pre_compose_slot(const MultiDiffOp& B, int slot, const MultiDiffOp& P,
                                          int max_h) {
  if (P.arity_ != 1) throw InternalError("pre_compose_slot: P must have arity 1");
  MultiDiffOp out(B.ctx_, B.arity_);
  for (int kb = 0; kb < int(B.strata_.size()); ++kb) {
    for (auto& bv : B.strata_[size_t(kb)]) {
      const Mono& a = bv.first[size_t(slot)];
      for (int kp = 0; kp < int(P.strata_.size()) && kb + kp <= max_h; ++kp) {
        for (auto& pv : P.strata_[size_t(kp)]) {
          // d^a (p_c d^c f) = sum_{a0+a1=a} C(a;a0,a1) (d^{a0} p_c) d^{c+a1} f
          enumerate_splits(a, 2, [&](const std::vector<Mono>& parts, const Rational& mult) {
            JetScalar pc = pv.second;
            for (int v = 0; v < kMaxVars && !pc.is_zero(); ++v)
              for (int rep = 0; rep < parts[0].e[size_t(v)]; ++rep) pc = pc.derivative(v);
            if (pc.is_zero()) return;
            JetScalar coeff = (bv.second * pc).scaled(mult);
            if (coeff.is_zero()) return;
            Key key = bv.first;
            key[size_t(slot)] = pv.first[0] * parts[1];
            out.add(kb + kp, key, coeff);
          });
        }
      }
    }
  }
  return out;
}

MultiDiffOp MultiDiffOp::compose_slot2(const MultiDiffOp& B, int slot, const MultiDiffOp& C,
                                       int max_h, int order_prune) {
  if (B.arity_ != 2 || C.arity_ != 2)
    throw InternalError("compose_slot2: both operators must have arity 2");
  MultiDiffOp out(B.ctx_, 3);
  for (int kb = 0; kb < int(B.strata_.size()); ++kb) {
    for (auto& bv : B.strata_[size_t(kb)]) {
      const Mono& a = bv.first[size_t(slot)];
      const Mono& keep = bv.first[size_t(1 - slot)];
      if (keep.deg_all() > order_prune) continue;
      for (int kc = 0; kc < int(C.strata_.size()) && kb + kc <= max_h; ++kc) {
        for (auto& cv : C.strata_[size_t(kc)]) {
          // d^a (c_coeff * d^{c1} f d^{c2} g): split a among the coefficient
          // and the two inner slots.
          enumerate_splits(a, 3, [&](const std::vector<Mono>& parts, const Rational& mult) {
            Mono s1 = cv.first[0] * parts[1];
            Mono s2 = cv.first[1] * parts[2];
            if (s1.deg_all() > order_prune || s2.deg_all() > order_prune) return;
            JetScalar cc = cv.second;
            for (int v = 0; v < kMaxVars && !cc.is_zero(); ++v)
              for (int rep = 0; rep < parts[0].e[size_t(v)]; ++rep) cc = cc.derivative(v);
            if (cc.is_zero()) return;
            JetScalar coeff = (bv.second * cc).scaled(mult);
            if (coeff.is_zero()) return;
            Key key{Mono::one(), Mono::one(), Mono::one()};
            if (slot == 0) {
              key[0] = s1;
              key[1] = s2;
              key[2] = keep;
            } else {
              key[0] = keep;
              key[1] = s1;
              key[2] = s2;
            }
            out.add(kb + kc, key, coeff);
          });
        }
      }
    }
  }
  return out;
}

MultiDiffOp MultiDiffOp::tensor_blocks(const MultiDiffOp& a, const MultiDiffOp& b, int max_h) {
  if (a.arity_ != b.arity_) throw InternalError("tensor_blocks: arity mismatch");
  MultiDiffOp out(a.ctx_, a.arity_);
  for (int ka = 0; ka < int(a.strata_.size()); ++ka)
    for (auto& av : a.strata_[size_t(ka)])
      for (int kb = 0; kb < int(b.strata_.size()) && ka + kb <= max_h; ++kb)
        for (auto& bv : b.strata_[size_t(kb)]) {
          Key key{Mono::one(), Mono::one(), Mono::one()};
          for (int s = 0; s < a.arity_; ++s)
            key[size_t(s)] = av.first[size_t(s)] * bv.first[size_t(s)];
          out.add(ka + kb, key, av.second * bv.second);
        }
  return out;
}

MultiDiffOp MultiDiffOp::invert(const MultiDiffOp& Q, int max_h) {
  if (Q.arity_ != 1) throw InternalError("invert: arity must be 1");
  // Q = id + N with N = O(hbar); U_k = -N_k - sum_{j<k} N_j o U_{k-j}.
  MultiDiffOp id = identity(Q.ctx_);
  MultiDiffOp N = Q - id;
  std::vector<MultiDiffOp> U(size_t(max_h) + 1);  // stratum pieces as arity-1 ops
  MultiDiffOp inv = id;
  for (int k = 1; k <= max_h; ++k) {
    MultiDiffOp Uk(Q.ctx_, 1);
    for (auto& kv : N.stratum(k)) Uk.add(0, kv.first, -kv.second);
    for (int j = 1; j < k; ++j) {
      // pieces of N at order j composed with U at order k-j
      MultiDiffOp Nj(Q.ctx_, 1);
      for (auto& kv : N.stratum(j)) Nj.add(0, kv.first, kv.second);
      MultiDiffOp comp = post_compose(Nj, U[size_t(k - j)], max_h);
      for (auto& kv : comp.stratum(0)) Uk.add(0, kv.first, -kv.second);
    }
    U[size_t(k)] = Uk;
    inv = inv + Uk.mul_hbar(k);
  }
  return inv;
}

MultiDiffOp MultiDiffOp::hochschild_b() const {
  MultiDiffOp out(ctx_, arity_ + 1);
  if (arity_ + 1 > 3) throw InternalError("hochschild_b: arity cap exceeded");
  for (int k = 0; k < int(strata_.size()); ++k) {
    for (auto& kv : strata_[size_t(k)]) {
      // f0 * C(f1..fk): slot 0 gets no derivatives
      {
        Key key{Mono::one(), Mono::one(), Mono::one()};
        for (int s = 0; s < arity_; ++s) key[size_t(s + 1)] = kv.first[size_t(s)];
        out.add(k, key, kv.second);
      }
      // (-1)^(arity+1) C(f0..f_{k-1}) * f_k
      {
        Key key{Mono::one(), Mono::one(), Mono::one()};
        for (int s = 0; s < arity_; ++s) key[size_t(s)] = kv.first[size_t(s)];
        int sgn = ((arity_ + 1) % 2 == 0) ? 1 : -1;
        out.add(k, key, sgn < 0 ? -kv.second : kv.second);
      }
      // middle terms: slot s of C eats f_s * f_{s+1}
      for (int s = 0; s < arity_; ++s) {
        int sgn = ((s + 1) % 2 == 0) ? 1 : -1;
        enumerate_splits(kv.first[size_t(s)], 2,
                         [&](const std::vector<Mono>& parts, const Rational& mult) {
                           Key key{Mono::one(), Mono::one(), Mono::one()};
                           for (int t = 0; t < s; ++t) key[size_t(t)] = kv.first[size_t(t)];
                           key[size_t(s)] = parts[0];
                           key[size_t(s + 1)] = parts[1];
                           for (int t = s + 1; t < arity_; ++t)
                             key[size_t(t + 1)] = kv.first[size_t(t)];
                           JetScalar c = kv.second.scaled(sgn < 0 ? -mult : mult);
                           out.add(k, key, c);
                         });
      }
    }
  }
  return out;
}

MultiDiffOp MultiDiffOp::remap(const JetContext* to, const std::vector<int>& varmap) const {
  MultiDiffOp out(to, arity_);
  for (int k = 0; k < int(strata_.size()); ++k) {
    for (auto& kv : strata_[size_t(k)]) {
      Key key{Mono::one(), Mono::one(), Mono::one()};
      for (int s = 0; s < arity_; ++s) {
        for (int v = 0; v < kMaxVars; ++v) {
          int e = kv.first[size_t(s)].e[size_t(v)];
          if (!e) continue;
          if (v >= int(varmap.size()) || varmap[size_t(v)] < 0)
            throw InternalError("MultiDiffOp::remap: unmapped variable");
          key[size_t(s)].e[size_t(varmap[size_t(v)])] = uint8_t(e);
        }
      }
      out.add(k, key, kv.second.remap(to, varmap));
    }
  }
  return out;
}

JetMatrix MultiDiffOp::skew_first_order(int hpow, int n_coords) const {
  JetMatrix m(size_t(n_coords), std::vector<JetScalar>(size_t(n_coords), JetScalar::zero(ctx_)));
  for (auto& kv : stratum(hpow)) {
    const Mono& a = kv.first[0];
    const Mono& b = kv.first[1];
    if (a.deg_all() != 1 || b.deg_all() != 1) continue;
    int i = -1, j = -1;
    for (int v = 0; v < n_coords; ++v) {
      if (a.e[size_t(v)] == 1) i = v;
      if (b.e[size_t(v)] == 1) j = v;
    }
    if (i < 0 || j < 0) continue;
    JetScalar half = kv.second.scaled(Rational(BigInt(1), BigInt(2)));
    m[size_t(i)][size_t(j)] += half;
    m[size_t(j)][size_t(i)] -= half;
  }
  return m;
}

MultiDiffOp MultiDiffOp::extract_arity1(const JetContext* ctx,
                                        const std::function<JetScalar(const JetScalar&)>& action,
                                        int max_h, const std::function<int(int)>& order_cap) {
  int maxdeg = 0;
  for (int k = 0; k <= max_h; ++k) maxdeg = std::max(maxdeg, order_cap(k));
  std::vector<Mono> monos = coordinate_monomials(ctx, maxdeg);
  std::sort(monos.begin(), monos.end());
  // action values on the basis
  std::vector<JetScalar> vals;
  vals.reserve(monos.size());
  for (auto& m : monos) vals.push_back(action(mono_jet(ctx, m)));
  MultiDiffOp out(ctx, 1);
  // triangular solve by increasing degree: q_a * a! = action(m_a) - sum_{c<a} q_c d^c m_a
  for (size_t i = 0; i < monos.size(); ++i) {
    const Mono& a = monos[i];
    JetScalar rhs = vals[i];
    for (int k = 0; k < int(out.strata_.size()); ++k) {
      for (auto& kv : out.strata_[size_t(k)]) {
        Mono da;
        Rational coeff;
        if (!mono_derivative(a, kv.first[0], da, coeff)) continue;
        rhs -= (kv.second * mono_jet(ctx, da)).scaled(coeff).mul_hbar(k);
      }
    }
    Rational afact(1);
    for (int v = 0; v < kMaxVars; ++v)
      for (int t = 2; t <= a.e[size_t(v)]; ++t) afact *= Rational(t);
    for (int k = 0; k <= max_h; ++k) {
      if (a.deg_all() > order_cap(k)) continue;
      JetScalar piece = rhs.hbar_coefficient(k).scaled(afact.inv());
      out.add(k, Key{a, Mono::one(), Mono::one()}, piece);
    }
  }
  return out;
}

MultiDiffOp MultiDiffOp::extract_arity2(
    const JetContext* ctx,
    const std::function<JetScalar(const JetScalar&, const JetScalar&)>& action, int max_h,
    const std::function<int(int)>& order_cap) {
  int maxdeg = 0;
  for (int k = 0; k <= max_h; ++k) maxdeg = std::max(maxdeg, order_cap(k));
  std::vector<Mono> monos = coordinate_monomials(ctx, maxdeg);
  std::sort(monos.begin(), monos.end());
  MultiDiffOp out(ctx, 2);
  for (size_t ai = 0; ai < monos.size(); ++ai) {
    for (size_t bi = 0; bi < monos.size(); ++bi) {
      const Mono &a = monos[ai], &b = monos[bi];
      JetScalar rhs = action(mono_jet(ctx, a), mono_jet(ctx, b));
      for (int k = 0; k < int(out.strata_.size()); ++k) {
        for (auto& kv : out.strata_[size_t(k)]) {
          Mono da, db;
          Rational ca, cb;
          if (!mono_derivative(a, kv.first[0], da, ca)) continue;
          if (!mono_derivative(b, kv.first[1], db, cb)) continue;
          rhs -= (kv.second * mono_jet(ctx, da) * mono_jet(ctx, db)).scaled(ca * cb).mul_hbar(k);
        }
      }
      Rational fact(1);
      for (int v = 0; v < kMaxVars; ++v) {
        for (int t = 2; t <= a.e[size_t(v)]; ++t) fact *= Rational(t);
        for (int t = 2; t <= b.e[size_t(v)]; ++t) fact *= Rational(t);
      }
      for (int k = 0; k <= max_h; ++k) {
        JetScalar piece = rhs.hbar_coefficient(k).scaled(fact.inv());
        if (piece.is_zero()) continue;
        if (a.deg_all() > order_cap(k) || b.deg_all() > order_cap(k)) {
          if (!piece.is_zero_upto())
            throw InternalError("extract_arity2: action exceeds the declared order cap");
          continue;
        }
        out.add(k, Key{a, b, Mono::one()}, piece);
      }
    }
  }
  return out;
}

std::string MultiDiffOp::to_string() const {
  std::string s;
  for (int k = 0; k < int(strata_.size()); ++k) {
    for (auto& kv : strata_[size_t(k)]) {
      s += "hb^" + std::to_string(k) + " [";
      for (int sl = 0; sl < arity_; ++sl) {
        if (sl) s += " ; ";
        bool first = true;
        for (int v = 0; v < kMaxVars; ++v)
          for (int rep = 0; rep < kv.first[size_t(sl)].e[size_t(v)]; ++rep) {
            if (!first) s += ",";
            s += "d" + std::to_string(v);
            first = false;
          }
        if (first) s += "id";
      }
      s += "] * " + kv.second.to_string() + "\n";
    }
  }
  return s;
}

std::vector<Mono> coordinate_monomials(const JetContext* ctx, int deg) {
  std::vector<Mono> out;
  int n = ctx->n_base + ctx->n_group;
  std::function<void(int, int, Mono)> rec = [&](int var, int left, Mono cur) {
    if (var == n) {
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
  return out;
}

JetScalar mono_jet(const JetContext* ctx, const Mono& m) {
  return JetScalar(ctx, SPoly(Rational(1)).mul_mono(m, Rational(1)));
}

bool mono_derivative(const Mono& m, const Mono& a, Mono& out, Rational& coeff) {
  coeff = Rational(1);
  out = m;
  for (int v = 0; v < kMaxVars; ++v) {
    int e = m.e[size_t(v)], d = a.e[size_t(v)];
    if (d == 0) continue;
    if (d > e) return false;
    for (int t = 0; t < d; ++t) coeff *= Rational(e - t);
    out.e[size_t(v)] = uint8_t(e - d);
  }
  return true;
}

}  // namespace dyt
