#include "dyt/weyl.hpp"

#include <algorithm>

#include "dyt/par.hpp"

namespace dyt {

namespace {

// Sign of dx^{K1} ^ dx^{K2}; 0 if they share an index.
int wedge_sign(uint16_t k1, uint16_t k2) {
  if (k1 & k2) return 0;
  int sign = 1;
  for (int i = 0; i < 16; ++i) {
    if (!(k2 & (1u << i))) continue;
    int above = __builtin_popcount(k1 >> (i + 1));
    if (above & 1) sign = -sign;
  }
  return sign;
}

Rational falling(int e, int d) {
  Rational r(1);
  for (int t = 0; t < d; ++t) r *= Rational(e - t);
  return r;
}

}  // namespace

void WeylElement::add(const WeylKey& k, const JetScalar& coeff) {
  if (coeff.is_zero()) return;
  if (!coeff.is_hbar_free()) throw InternalError("WeylElement: coefficient carries hbar");
  if (k.fdeg() > cap_) return;
  auto it = terms_.find(k);
  if (it == terms_.end()) {
    terms_.emplace(k, coeff);
  } else {
    it->second += coeff;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

WeylElement operator+(const WeylElement& a, const WeylElement& b) {
  if (a.ctx_ == nullptr) return b;
  WeylElement r = a;
  for (auto& kv : b.terms_) r.add(kv.first, kv.second);
  return r;
}

WeylElement WeylElement::operator-() const {
  WeylElement r = *this;
  for (auto& kv : r.terms_) kv.second = -kv.second;
  return r;
}

WeylElement operator-(const WeylElement& a, const WeylElement& b) { return a + (-b); }

WeylElement WeylElement::scaled(const Rational& c) const {
  WeylElement r(ctx_, cap_);
  if (c.is_zero()) return r;
  for (auto& kv : terms_) r.add(kv.first, kv.second.scaled(c));
  return r;
}

WeylElement WeylElement::scaled_jet(const JetScalar& c) const {
  WeylElement r(ctx_, cap_);
  for (auto& kv : terms_) r.add(kv.first, kv.second * c);
  return r;
}

WeylElement WeylElement::mul_hbar(int k) const {
  WeylElement r(ctx_, cap_);
  for (auto& kv : terms_) {
    WeylKey key = kv.first;
    key.hpow = uint8_t(key.hpow + k);
    r.add(key, kv.second);
  }
  return r;
}

WeylElement WeylElement::div_hbar() const {
  WeylElement r(ctx_, cap_);
  for (auto& kv : terms_) {
    if (kv.first.hpow == 0)
      throw InternalError("WeylElement: division by hbar of an hbar^0 term");
    WeylKey key = kv.first;
    key.hpow -= 1;
    r.add(key, kv.second);
  }
  return r;
}

WeylElement WeylElement::component(int fdeg) const {
  WeylElement r(ctx_, cap_);
  for (auto& kv : terms_)
    if (kv.first.fdeg() == fdeg) r.add(kv.first, kv.second);
  return r;
}

WeylElement WeylElement::up_to_degree(int fdeg) const {
  WeylElement r(ctx_, cap_);
  for (auto& kv : terms_)
    if (kv.first.fdeg() <= fdeg) r.add(kv.first, kv.second);
  return r;
}

int WeylElement::min_degree() const {
  int d = cap_ + 1;
  for (auto& kv : terms_) d = std::min(d, kv.first.fdeg());
  return d;
}

bool WeylElement::is_zero_upto(int watermark) const {
  for (auto& kv : terms_)
    if (!kv.second.is_zero_upto(watermark)) return false;
  return true;
}

bool WeylElement::equals_upto(const WeylElement& o, int watermark) const {
  return (*this - o).is_zero_upto(watermark);
}

std::string WeylElement::to_string() const {
  if (terms_.empty()) return "0";
  std::string s;
  for (auto& kv : terms_) {
    if (!s.empty()) s += " + ";
    s += "hb^" + std::to_string(kv.first.hpow) + " y[";
    bool first = true;
    for (int v = 0; v < kMaxVars; ++v)
      for (int rep = 0; rep < kv.first.y.e[size_t(v)]; ++rep) {
        if (!first) s += ",";
        s += std::to_string(v);
        first = false;
      }
    s += "] dx[";
    first = true;
    for (int i = 0; i < 16; ++i)
      if (kv.first.dxmask & (1u << i)) {
        if (!first) s += ",";
        s += std::to_string(i);
        first = false;
      }
    s += "] * " + kv.second.to_string();
  }
  return s;
}

WeylElement WeylElement::from_function(const JetContext* ctx, int cap, const JetScalar& f) {
  WeylElement r(ctx, cap);
  for (int k = 0; k <= ctx->Nh; ++k) {
    JetScalar c = f.hbar_coefficient(k);
    if (c.is_zero()) continue;
    WeylKey key;
    key.hpow = uint8_t(k);
    r.add(key, c);
  }
  return r;
}

JetScalar WeylElement::to_function() const {
  JetScalar out = JetScalar::zero(ctx_);
  for (auto& kv : terms_) {
    if (kv.first.ydeg() != 0 || kv.first.dxmask != 0)
      throw InternalError("WeylElement: to_function on a non-central element");
    out += kv.second.mul_hbar(kv.first.hpow);
  }
  return out;
}

WeylAlgebra::WeylAlgebra(const JetModel* model, int Nh_target)
    : model_(model), Nh_(Nh_target), cap_(2 * Nh_target + 3) {
  const JetContext* c = ctx();
  int n = model_->n_coords();
  qmax_ = cap_ / 2;
  // contraction tables
  ptab_.assign(size_t(qmax_) + 1, {});
  ptab_[0][{Mono::one(), Mono::one()}] = JetScalar::one(c);
  // enumerate multidegrees of each size over the n coordinates
  std::vector<std::vector<Mono>> by_size(size_t(qmax_) + 1);
  by_size[0] = {Mono::one()};
  for (int q = 1; q <= qmax_; ++q) {
    for (auto& m : by_size[size_t(q - 1)]) {
      for (int v = 0; v < n; ++v) {
        Mono m2 = m;
        m2.e[size_t(v)] += 1;
        // avoid duplicates: only raise at or after the last raised var
        bool canonical = true;
        for (int w = v + 1; w < n; ++w)
          if (m.e[size_t(w)] > 0) canonical = false;
        if (canonical) by_size[size_t(q)].push_back(m2);
      }
    }
    // recursion: P(gamma, delta) over first active variable row
    for (auto& g : by_size[size_t(q)]) {
      for (auto& d : by_size[size_t(q)]) {
        // P(g,d) = sum over row r <= d, |r| = g_i0 of prod_j pi[i0][j]^{r_j}/r_j!
        //          * P(g - g_i0 e_i0, d - r)
        int i0 = -1;
        for (int v = 0; v < n; ++v)
          if (g.e[size_t(v)]) {
            i0 = v;
            break;
          }
        int budget = g.e[size_t(i0)];
        JetScalar total = JetScalar::zero(c);
        // enumerate rows r <= d with |r| = budget
        std::vector<int> r(size_t(n), 0);
        std::function<void(int, int)> rec = [&](int var, int left) {
          if (var == n) {
            if (left) return;
            JetScalar piece = JetScalar::one(c);
            Mono drest = d;
            for (int j = 0; j < n; ++j) {
              for (int t = 0; t < r[size_t(j)]; ++t) {
                piece = piece * model_->pi_mat[size_t(i0)][size_t(j)];
                drest.e[size_t(j)] -= 1;
              }
              if (r[size_t(j)] > 1) {
                Rational fact(1);
                for (int t = 2; t <= r[size_t(j)]; ++t) fact *= Rational(t);
                piece = piece.scaled(fact.inv());
              }
              if (piece.is_zero()) return;
            }
            Mono grest = g;
            grest.e[size_t(i0)] = 0;
            int qq = 0;
            for (int v = 0; v < n; ++v) qq += grest.e[size_t(v)];
            auto& tab = ptab_[size_t(qq)];
            auto pit = tab.find({grest, drest});
            if (pit == tab.end()) return;
            total += piece * pit->second;
            return;
          }
          for (int k = 0; k <= std::min(left, int(d.e[size_t(var)])); ++k) {
            r[size_t(var)] = k;
            rec(var + 1, left - k);
          }
          r[size_t(var)] = 0;
        };
        rec(0, budget);
        if (!total.is_zero()) ptab_[size_t(q)][{g, d}] = total;
      }
    }
  }
  // curvature element R_W = -(1/4) R_{ijkl} y^i y^j dx^k dx^l
  RW_ = WeylElement(c, cap_);
  Rational quarter(BigInt(-1), BigInt(4));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          if (k == l) continue;
          const JetScalar& v = model_->curv.at(i, j, k, l);
          if (v.is_zero()) continue;
          WeylKey key;
          key.y = Mono::var(i) * Mono::var(j);
          key.dxmask = uint16_t((1u << k) | (1u << l));
          Rational cc = quarter;
          if (k > l) cc = -cc;
          RW_.add(key, v.scaled(cc));
        }
}

WeylElement WeylAlgebra::derive_y(const WeylElement& a, const Mono& gamma) const {
  WeylElement r(ctx(), cap_);
  for (auto& kv : a.terms()) {
    Rational coeff(1);
    Mono y = kv.first.y;
    bool ok = true;
    for (int v = 0; v < kMaxVars && ok; ++v) {
      int d = gamma.e[size_t(v)];
      if (!d) continue;
      int e = y.e[size_t(v)];
      if (d > e) {
        ok = false;
        break;
      }
      coeff *= falling(e, d);
      y.e[size_t(v)] = uint8_t(e - d);
    }
    if (!ok) continue;
    WeylKey key = kv.first;
    key.y = y;
    r.add(key, kv.second.scaled(coeff));
  }
  return r;
}

WeylElement WeylAlgebra::product_serial(const WeylElement& a, const WeylElement& b) const {
  WeylElement out(ctx(), cap_);
  Rational half(BigInt(1), BigInt(2));
  for (int q = 0; q <= qmax_; ++q) {
    Rational scale = half.pow(q);
    for (auto& pt : ptab_[size_t(q)]) {
      WeylElement da = derive_y(a, pt.first.first);
      if (da.empty()) continue;
      WeylElement db = derive_y(b, pt.first.second);
      if (db.empty()) continue;
      JetScalar weight = pt.second.scaled(scale);
      // pointwise product with hbar shift q
      for (auto& ta : da.terms()) {
        for (auto& tb : db.terms()) {
          int sgn = wedge_sign(ta.first.dxmask, tb.first.dxmask);
          if (!sgn) continue;
          WeylKey key;
          key.hpow = uint8_t(ta.first.hpow + tb.first.hpow + q);
          key.dxmask = uint16_t(ta.first.dxmask | tb.first.dxmask);
          if (2 * key.hpow + ta.first.ydeg() + tb.first.ydeg() > cap_) continue;
          key.y = ta.first.y * tb.first.y;
          JetScalar cval = ta.second * tb.second * weight;
          if (sgn < 0) cval = -cval;
          out.add(key, cval);
        }
      }
    }
  }
  return out;
}

WeylElement WeylAlgebra::product(const WeylElement& a, const WeylElement& b) const {
#ifndef _OPENMP
  return product_serial(a, b);
#else
  if (exec_mode() == ExecMode::Serial || a.terms().size() * b.terms().size() < 512)
    return product_serial(a, b);
  // Parallelize over the contraction jobs.
  struct Job {
    int q;
    const Mono* g;
    const Mono* d;
    const JetScalar* p;
  };
  std::vector<Job> jobs;
  for (int q = 0; q <= qmax_; ++q)
    for (auto& pt : ptab_[size_t(q)])
      jobs.push_back({q, &pt.first.first, &pt.first.second, &pt.second});
  int nt = omp_get_max_threads();
  std::vector<WeylElement> parts;
  parts.resize(size_t(nt), WeylElement(ctx(), cap_));
  Rational half(BigInt(1), BigInt(2));
#pragma omp parallel num_threads(nt)
  {
    WeylElement& out = parts[size_t(omp_get_thread_num())];
#pragma omp for schedule(dynamic, 1)
    for (long ji = 0; ji < long(jobs.size()); ++ji) {
      const Job& job = jobs[size_t(ji)];
      WeylElement da = derive_y(a, *job.g);
      if (da.empty()) continue;
      WeylElement db = derive_y(b, *job.d);
      if (db.empty()) continue;
      JetScalar weight = job.p->scaled(half.pow(job.q));
      for (auto& ta : da.terms()) {
        for (auto& tb : db.terms()) {
          int sgn = wedge_sign(ta.first.dxmask, tb.first.dxmask);
          if (!sgn) continue;
          WeylKey key;
          key.hpow = uint8_t(ta.first.hpow + tb.first.hpow + job.q);
          key.dxmask = uint16_t(ta.first.dxmask | tb.first.dxmask);
          if (2 * key.hpow + ta.first.ydeg() + tb.first.ydeg() > cap_) continue;
          key.y = ta.first.y * tb.first.y;
          JetScalar cval = ta.second * tb.second * weight;
          if (sgn < 0) cval = -cval;
          out.add(key, cval);
        }
      }
    }
  }
  WeylElement out = parts[0];
  for (size_t i = 1; i < parts.size(); ++i) out = out + parts[size_t(i)];
  return out;
#endif
}

WeylElement WeylAlgebra::commutator(const WeylElement& a, const WeylElement& b) const {
  // [a,b] = a o b - (-1)^{|a||b|} b o a on homogeneous form degrees; for
  // mixed elements the sign -(-1)^{pa pb} is -1 except on (odd, odd), so
  // [a,b] = a o b - b o a + 2 (b_odd o a_odd).
  auto parity_split = [&](const WeylElement& w, int parity) {
    WeylElement r(ctx(), cap_);
    for (auto& kv : w.terms())
      if (kv.first.form_deg() % 2 == parity) r.add(kv.first, kv.second);
    return r;
  };
  WeylElement out = product(a, b) - product(b, a);
  WeylElement a1 = parity_split(a, 1), b1 = parity_split(b, 1);
  if (!a1.empty() && !b1.empty()) out = out + product(b1, a1).scaled(Rational(2));
  return out;
}

WeylElement WeylAlgebra::delta(const WeylElement& a) const {
  WeylElement r(ctx(), cap_);
  int n = model_->n_coords();
  for (auto& kv : a.terms()) {
    for (int k = 0; k < n; ++k) {
      int e = kv.first.y.e[size_t(k)];
      if (!e) continue;
      if (kv.first.dxmask & (1u << k)) continue;
      WeylKey key = kv.first;
      key.y.e[size_t(k)] = uint8_t(e - 1);
      key.dxmask = uint16_t(key.dxmask | (1u << k));
      // dx^k wedged from the left: sign = (-1)^{# indices < k in the mask}
      int below = __builtin_popcount(kv.first.dxmask & ((1u << k) - 1));
      JetScalar c = kv.second.scaled(Rational(e));
      if (below & 1) c = -c;
      r.add(key, c);
    }
  }
  return r;
}

WeylElement WeylAlgebra::kappa(const WeylElement& a) const {
  WeylElement r(ctx(), cap_);
  for (auto& kv : a.terms()) {
    int p = kv.first.form_deg(), q = kv.first.ydeg();
    if (p + q == 0) continue;
    Rational inv(BigInt(1), BigInt(p + q));
    int pos = 0;
    for (int i = 0; i < 16; ++i) {
      if (!(kv.first.dxmask & (1u << i))) continue;
      WeylKey key = kv.first;
      key.dxmask = uint16_t(key.dxmask & ~(1u << i));
      key.y = key.y * Mono::var(i);
      JetScalar c = kv.second.scaled(inv);
      if (pos & 1) c = -c;
      r.add(key, c);
      ++pos;
    }
  }
  return r;
}

JetScalar WeylAlgebra::sigma(const WeylElement& a) const {
  JetScalar out = JetScalar::zero(ctx());
  for (auto& kv : a.terms()) {
    if (kv.first.ydeg() != 0 || kv.first.dxmask != 0) continue;
    out += kv.second.mul_hbar(kv.first.hpow);
  }
  return out;
}

WeylElement WeylAlgebra::covariant_d(const WeylElement& a) const {
  WeylElement r(ctx(), cap_);
  int n = model_->n_coords();
  for (auto& kv : a.terms()) {
    // dx^i ^ (d_i coefficients)
    for (int i = 0; i < n; ++i) {
      if (kv.first.dxmask & (1u << i)) continue;
      JetScalar d = kv.second.derivative(i);
      if (d.is_zero()) continue;
      WeylKey key = kv.first;
      key.dxmask = uint16_t(key.dxmask | (1u << i));
      int below = __builtin_popcount(kv.first.dxmask & ((1u << i) - 1));
      if (below & 1) d = -d;
      r.add(key, d);
    }
    // - dx^i ^ Gamma^m_{ij} y^j d_{y^m} a
    for (int m = 0; m < n; ++m) {
      int e = kv.first.y.e[size_t(m)];
      if (!e) continue;
      for (int i = 0; i < n; ++i) {
        if (kv.first.dxmask & (1u << i)) continue;
        for (int j = 0; j < n; ++j) {
          const JetScalar& G = model_->conn.Gamma[size_t(m)][size_t(i)][size_t(j)];
          if (G.is_zero()) continue;
          WeylKey key = kv.first;
          key.y.e[size_t(m)] = uint8_t(e - 1);
          key.y = key.y * Mono::var(j);
          key.dxmask = uint16_t(key.dxmask | (1u << i));
          JetScalar c = kv.second * G;
          c = c.scaled(Rational(-e));
          int below = __builtin_popcount(kv.first.dxmask & ((1u << i) - 1));
          if (below & 1) c = -c;
          r.add(key, c);
        }
      }
    }
  }
  return r;
}

WeylElement WeylAlgebra::delta_generator() const {
  WeylElement g(ctx(), cap_);
  int n = model_->n_coords();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const JetScalar& w = model_->omega_mat[size_t(i)][size_t(j)];
      if (w.is_zero()) continue;
      WeylKey key;
      key.y = Mono::var(i);
      key.dxmask = uint16_t(1u << j);
      g.add(key, w);
    }
  return g;
}

WeylElement WeylAlgebra::gamma_generator() const {
  WeylElement g(ctx(), cap_);
  int n = model_->n_coords();
  Rational half(BigInt(1), BigInt(2));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        JetScalar c = JetScalar::zero(ctx());
        for (int l = 0; l < n; ++l) {
          const JetScalar& w = model_->omega_mat[size_t(i)][size_t(l)];
          const JetScalar& G = model_->conn.Gamma[size_t(l)][size_t(j)][size_t(k)];
          if (!w.is_zero() && !G.is_zero()) c += w * G;
        }
        if (c.is_zero()) continue;
        WeylKey key;
        key.y = Mono::var(i) * Mono::var(j);
        key.dxmask = uint16_t(1u << k);
        g.add(key, c.scaled(half));
      }
  return g;
}

WeylElement WeylAlgebra::solve_connection(const std::vector<FormJet>& omega_h) const {
  const JetContext* c = ctx();
  for (auto& w : omega_h)
    if (!w.exterior_d().is_zero_upto(c->Dx - 1))
      throw NotClosed("characteristic form stratum is not closed");
  // H = sum_s hb^{s+1} (omega_h)_s as a central Weyl 2-form
  WeylElement H(c, cap_);
  for (size_t s = 0; s < omega_h.size(); ++s) {
    for (auto& kv : omega_h[s].terms()) {
      WeylKey key;
      key.hpow = uint8_t(s + 1);
      key.dxmask = uint16_t((1u << kv.first[0]) | (1u << kv.first[1]));
      H.add(key, kv.second);
    }
  }
  // degree-by-degree fixed point r_g = kappa([H - R + d r + (1/hb) r^2]_{g-1})
  std::vector<WeylElement> comp(size_t(cap_) + 1, WeylElement(c, cap_));
  WeylElement r(c, cap_);
  for (int g = 3; g <= cap_; ++g) {
    WeylElement arg = (H - RW_).component(g - 1);
    if (g >= 4) arg = arg + covariant_d(comp[size_t(g - 1)]);
    // (1/hb) (r o r) at degree g-1: products of components g1 + g2 = g + 1,
    // summed before the hbar division (the hb^0 parts cancel pairwise).
    WeylElement sq(c, cap_);
    for (int g1 = 3; g1 <= g - 2; ++g1) {
      int g2 = g + 1 - g1;
      if (g2 < 3 || g2 > cap_) continue;
      sq = sq + product(comp[size_t(g1)], comp[size_t(g2)]);
    }
    if (!sq.empty()) arg = arg + sq.div_hbar().component(g - 1);
    comp[size_t(g)] = kappa(arg);
    r = r + comp[size_t(g)];
  }
  return r;
}

WeylElement WeylAlgebra::fedosov_D(const WeylElement& r, const WeylElement& a) const {
  return covariant_d(a) - delta(a) + commutator(r, a).div_hbar();
}

WeylElement WeylAlgebra::flat_lift(const JetScalar& f, const WeylElement& r) const {
  return flat_lift_batch({f}, r)[0];
}

std::vector<WeylElement> WeylAlgebra::flat_lift_batch(const std::vector<JetScalar>& fs,
                                                      const WeylElement& r,
                                                      int lift_cap) const {
  const JetContext* c = ctx();
  if (lift_cap < 0 || lift_cap > cap_) lift_cap = cap_;
  Rational half(BigInt(1), BigInt(2));
  std::vector<WeylElement> rcomp(size_t(cap_) + 1, WeylElement(c, cap_));
  for (auto& kv : r.terms()) rcomp[size_t(kv.first.fdeg())].add(kv.first, kv.second);
  // Precompute odd-order y-derivatives of the r components: the commutator
  // of anything with a 0-form keeps only odd contraction orders, doubled
  // (P_q(delta,gamma) = (-1)^q P_q(gamma,delta) since pi is antisymmetric).
  struct RJob {
    int g1, q;
    const Mono* delta;
    JetScalar weight;       // 2 * (1/2)^q * P_q(gamma, delta)
    WeylElement dgam_r;     // D_gamma(r_{g1})
  };
  std::vector<RJob> rjobs;
  for (int g1 = 3; g1 <= cap_; ++g1) {
    if (rcomp[size_t(g1)].empty()) continue;
    for (int q = 1; q <= qmax_; q += 2) {
      for (auto& pt : ptab_[size_t(q)]) {
        WeylElement d = derive_y(rcomp[size_t(g1)], pt.first.first);
        if (d.empty()) continue;
        rjobs.push_back({g1, q, &pt.first.second,
                         pt.second.scaled(half.pow(q) * Rational(2)), std::move(d)});
      }
    }
  }
  size_t nf = fs.size();
  std::vector<WeylElement> lifts(nf, WeylElement(c, cap_));
  std::vector<std::vector<WeylElement>> comp(
      nf, std::vector<WeylElement>(size_t(cap_) + 1, WeylElement(c, cap_)));
  std::vector<WeylElement> f0s;
  f0s.reserve(nf);
  for (auto& f : fs) f0s.push_back(WeylElement::from_function(c, cap_, f));
  for (int g = 0; g <= lift_cap; ++g) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) if (exec_mode() == ExecMode::Parallel && nf > 1)
#endif
    for (long fi = 0; fi < long(nf); ++fi) {
      WeylElement piece = f0s[size_t(fi)].component(g);
      if (g >= 1) {
        WeylElement arg = covariant_d(comp[size_t(fi)][size_t(g - 1)]);
        for (auto& job : rjobs) {
          int g2 = g + 1 - job.g1;
          if (g2 < 0 || g2 > cap_) continue;
          const WeylElement& fcomp = comp[size_t(fi)][size_t(g2)];
          if (fcomp.empty()) continue;
          WeylElement db = derive_y(fcomp, *job.delta);
          if (db.empty()) continue;
          // pointwise product D_gamma(r) * D_delta(f), hbar shift q - 1
          for (auto& ta : job.dgam_r.terms()) {
            for (auto& tb : db.terms()) {
              WeylKey key;
              key.hpow = uint8_t(ta.first.hpow + tb.first.hpow + job.q - 1);
              key.dxmask = ta.first.dxmask;  // f-side carries no forms
              if (2 * key.hpow + ta.first.ydeg() + tb.first.ydeg() > cap_) continue;
              if (2 * key.hpow + ta.first.ydeg() + tb.first.ydeg() != g + 1 - 2) continue;
              key.y = ta.first.y * tb.first.y;
              arg.add(key, ta.second * tb.second * job.weight);
            }
          }
        }
        piece = piece + kappa(arg);
      }
      comp[size_t(fi)][size_t(g)] = piece;
      lifts[size_t(fi)] = lifts[size_t(fi)] + piece;
    }
  }
  return lifts;
}

JetScalar WeylAlgebra::star(const JetScalar& f, const JetScalar& g,
                            const WeylElement& r) const {
  WeylElement lf = flat_lift(f, r);
  WeylElement lg = flat_lift(g, r);
  return sigma(product(lf, lg)).truncate_hbar(Nh_);
}

MultiDiffOp WeylAlgebra::star_operator(const WeylElement& r) const {
  const JetContext* c = ctx();
  int maxord = 2 * Nh_;
  std::vector<Mono> monos = coordinate_monomials(c, maxord);
  std::sort(monos.begin(), monos.end());
  // lift the monomial battery, then triangular-solve for the T-symbols:
  // lift(m_b) = sum_{a <= b} T_a d^a m_b.
  std::vector<JetScalar> batch;
  batch.reserve(monos.size());
  for (auto& m : monos) batch.push_back(mono_jet(c, m));
  std::vector<WeylElement> lifted = flat_lift_batch(batch, r, 2 * Nh_);
  std::vector<WeylElement> T;
  T.reserve(monos.size());
  for (size_t bi = 0; bi < monos.size(); ++bi) {
    const Mono& b = monos[bi];
    WeylElement rhs = lifted[bi];
    for (size_t ai = 0; ai < bi; ++ai) {
      Mono da;
      Rational coeff;
      if (!mono_derivative(b, monos[ai], da, coeff)) continue;
      rhs = rhs - T[ai].scaled_jet(mono_jet(c, da).scaled(coeff));
    }
    Rational bfact(1);
    for (int v = 0; v < kMaxVars; ++v)
      for (int t = 2; t <= b.e[size_t(v)]; ++t) bfact *= Rational(t);
    T.push_back(rhs.scaled(bfact.inv()));
  }
  // c_{ab} = sigma(T_a o T_b): only full y-contractions contribute.
  MultiDiffOp op(c, 2);
  Rational half(BigInt(1), BigInt(2));
  for (size_t ai = 0; ai < monos.size(); ++ai) {
    for (size_t bi = 0; bi < monos.size(); ++bi) {
      JetScalar val = JetScalar::zero(c);
      for (auto& ta : T[ai].terms()) {
        if (ta.first.dxmask) continue;
        int q = ta.first.ydeg();
        if (q > qmax_) continue;
        for (auto& tb : T[bi].terms()) {
          if (tb.first.dxmask) continue;
          if (tb.first.ydeg() != q) continue;
          int hp = ta.first.hpow + tb.first.hpow + q;
          if (hp > Nh_) continue;
          JetScalar w;
          if (q == 0) {
            w = ta.second * tb.second;
          } else {
            auto it = ptab_[size_t(q)].find({ta.first.y, tb.first.y});
            if (it == ptab_[size_t(q)].end()) continue;
            Rational yfact(1);
            for (int v = 0; v < kMaxVars; ++v) {
              for (int t = 2; t <= ta.first.y.e[size_t(v)]; ++t) yfact *= Rational(t);
              for (int t = 2; t <= tb.first.y.e[size_t(v)]; ++t) yfact *= Rational(t);
            }
            w = ta.second * tb.second * it->second;
            w = w.scaled(half.pow(q) * yfact);
          }
          val += w.mul_hbar(hp);
        }
      }
      if (val.is_zero()) continue;
      for (int k = 0; k <= Nh_; ++k) {
        JetScalar piece = val.hbar_coefficient(k);
        if (piece.is_zero()) continue;
        if (int(monos[ai].deg_all()) > 2 * k || int(monos[bi].deg_all()) > 2 * k) {
          if (!piece.is_zero_upto())
            throw InternalError("star_operator: slot order exceeds the 2k bound");
          continue;
        }
        op.add(k, MultiDiffOp::Key{monos[ai], monos[bi], Mono::one()}, piece);
      }
    }
  }
  return op;
}

InvarianceReport strong_invariance_check(const WeylAlgebra& W, const MultiDiffOp& star_op,
                                         int base_var, int battery_deg) {
  const JetContext* c = W.ctx();
  const VecJet& chi = W.model()->chi[size_t(base_var)];
  JetScalar H = JetScalar::variable(c, base_var);
  InvarianceReport rep;
  for (auto& m : coordinate_monomials(c, battery_deg)) {
    JetScalar f = mono_jet(c, m);
    JetScalar lhs = star_op.apply2(H, f) - star_op.apply2(f, H);
    JetScalar chif = JetScalar::zero(c);
    for (size_t i = 0; i < chi.size(); ++i) {
      if (chi[i].is_zero()) continue;
      JetScalar d = f.derivative(int(i));
      if (!d.is_zero()) chif += chi[i] * d;
    }
    JetScalar diff = lhs - chif.mul_hbar(1);
    diff = diff.truncate_hbar(W.nh());
    if (!diff.is_zero_upto()) {
      rep.ok = false;
      rep.witness = "monomial " + f.to_string() + ": residual " + diff.to_string();
      return rep;
    }
  }
  return rep;
}

JetMatrix pi_sharp_2form(const JetMatrix& pi, const JetMatrix& A) {
  // Normalization pinned by the two-star comparison identity: the leading
  // star difference is exactly this bivector, and it equals -1/2 pi A pi
  // (coherent with the first-order star term C_1 = (1/2) pi^{ij} d_i d_j).
  const JetContext* ctx = pi[0][0].ctx();
  size_t n = pi.size();
  Rational mhalf(BigInt(-1), BigInt(2));
  JetMatrix out(n, std::vector<JetScalar>(n, JetScalar::zero(ctx)));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      JetScalar s = JetScalar::zero(ctx);
      for (size_t k = 0; k < n; ++k) {
        if (pi[size_t(i)][k].is_zero()) continue;
        for (size_t l = 0; l < n; ++l) {
          if (A[k][l].is_zero() || pi[l][j].is_zero()) continue;
          s += pi[i][k] * A[k][l] * pi[l][j];
        }
      }
      out[i][j] = s.scaled(mhalf);
    }
  return out;
}

StarCompareReport star_difference_compare(const WeylAlgebra& W, const MultiDiffOp& star1,
                                      const MultiDiffOp& star2,
                                      const std::vector<FormJet>& omega_h_1,
                                      const std::vector<FormJet>& omega_h_2) {
  const JetContext* c = W.ctx();
  StarCompareReport rep;
  MultiDiffOp diff = star1 - star2;
  // leading stratum of the characteristic-form difference
  int s_lead = -1;
  size_t smax = std::max(omega_h_1.size(), omega_h_2.size());
  FormJet lead;
  for (size_t s = 0; s < smax && s_lead < 0; ++s) {
    FormJet d(c, 2);
    if (s < omega_h_1.size()) d = omega_h_1[s];
    if (s < omega_h_2.size()) d = d - omega_h_2[s];
    if (!d.is_zero_upto(c->Dx - 1)) {
      s_lead = int(s);
      lead = d;
    }
  }
  if (s_lead < 0) {
    // identical characteristic forms: stars must agree
    rep.ok = diff.is_zero_mod(W.nh());
    rep.leading_order = -1;
    rep.message = rep.ok ? "identical characteristic forms, identical stars"
                         : "stars differ despite equal characteristic forms";
    return rep;
  }
  int expected = s_lead + 2;
  for (int k = 0; k < expected && k <= W.nh(); ++k) {
    for (auto& kv : diff.stratum(k)) {
      if (!kv.second.is_zero_upto()) {
        rep.message = "stars differ below the predicted order";
        return rep;
      }
    }
  }
  if (expected > W.nh()) {
    rep.ok = true;
    rep.leading_order = expected;
    rep.message = "difference pushed beyond the hbar truncation";
    return rep;
  }
  // expected stratum: exactly pi#(lead) as a (1,1) bivector operator
  JetMatrix A = form_matrix(lead, size_t(W.model()->n_coords()));
  JetMatrix B = pi_sharp_2form(W.model()->pi_mat, A);
  MultiDiffOp expect(c, 2);
  int n = W.model()->n_coords();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!B[size_t(i)][size_t(j)].is_zero())
        expect.add(expected, MultiDiffOp::Key{Mono::var(i), Mono::var(j), Mono::one()},
                   B[size_t(i)][size_t(j)]);
  MultiDiffOp resid = diff - expect;
  for (auto& kv : resid.stratum(expected)) {
    if (!kv.second.is_zero_upto()) {
      rep.leading_order = expected;
      rep.message = "order-" + std::to_string(expected) +
                    " difference does not match pi#(characteristic difference)";
      return rep;
    }
  }
  rep.ok = true;
  rep.leading_order = expected;
  rep.message = "leading difference matches pi#(characteristic difference) at hb^" +
                std::to_string(expected);
  return rep;
}

}  // namespace dyt
