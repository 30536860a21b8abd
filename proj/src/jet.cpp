#include "dyt/jet.hpp"

#include <algorithm>

namespace dyt {

JetContext JetContext::make(int n_base, int n_group, int Dx, int Nh,
                            std::vector<Rational> base_point,
                            std::vector<std::string> base_names,
                            std::vector<std::string> group_names) {
  if (n_base + n_group + 1 > kMaxVars)
    throw InputInvalid("too many variables for this build (max " +
                       std::to_string(kMaxVars - 1) + ")");
  if (int(base_point.size()) != n_base)
    throw InputInvalid("base_point dimension mismatch");
  JetContext ctx;
  ctx.n_base = n_base;
  ctx.n_group = n_group;
  ctx.Dx = Dx;
  ctx.Nh = Nh;
  ctx.base_point = std::move(base_point);
  for (int i = 0; i < n_base; ++i)
    ctx.var_names.push_back(i < int(base_names.size()) ? base_names[size_t(i)]
                                                       : "l" + std::to_string(i + 1));
  for (int i = 0; i < n_group; ++i)
    ctx.var_names.push_back(i < int(group_names.size()) ? group_names[size_t(i)]
                                                        : "x" + std::to_string(i + 1));
  ctx.var_names.push_back("hb");
  return ctx;
}

JetScalar JetScalar::fraction(const JetContext* ctx, SPoly num, SPoly den) {
  JetScalar r(ctx, std::move(num));
  if (den.is_zero()) throw DegenerateDenominator("zero denominator polynomial");
  r.push_den_factor(std::move(den), 1);
  return r;
}

void JetScalar::push_den_factor(SPoly f, int e) {
  if (e == 0 || f.is_zero() || num_.is_zero()) {
    if (f.is_zero() && e != 0) throw DegenerateDenominator("zero denominator factor");
    return;
  }
  if (f.degree_in(ctx_->group_lo(), ctx_->n_vars()) > 0)
    throw DegenerateDenominator("denominator factor must involve base variables only");
  Rational c = f.content();
  if (!c.is_one()) {
    SPoly q;
    f.div_exact(SPoly(c), q);
    f = std::move(q);
  }
  num_ = num_.scaled(c.pow(e).inv());
  if (f.is_constant()) return;  // fully absorbed into num
  for (auto& df : den_) {
    if (df.poly == f) {
      df.exp += e;
      return;
    }
  }
  den_.push_back({std::move(f), e});
  std::sort(den_.begin(), den_.end(),
            [](const DenFactor& a, const DenFactor& b) { return SPoly::cmp(a.poly, b.poly) < 0; });
}

SPoly JetScalar::den_expanded() const {
  SPoly d(Rational(1));
  for (auto& f : den_)
    for (int i = 0; i < f.exp; ++i) d = d * f.poly;
  return d;
}

void JetScalar::align(const JetScalar& a, const JetScalar& b, SPoly& na, SPoly& nb,
                      std::vector<DenFactor>& den) {
  den.clear();
  na = a.num_;
  nb = b.num_;
  // Common denominator with per-factor max exponents.
  auto find = [](const std::vector<DenFactor>& v, const SPoly& f) -> int {
    for (auto& df : v)
      if (df.poly == f) return df.exp;
    return 0;
  };
  for (auto& df : a.den_) den.push_back(df);
  for (auto& df : b.den_) {
    bool found = false;
    for (auto& d : den) {
      if (d.poly == df.poly) {
        d.exp = std::max(d.exp, df.exp);
        found = true;
        break;
      }
    }
    if (!found) den.push_back(df);
  }
  auto mul_factor = [](SPoly& p, const SPoly& f, int times) {
    if (times <= 0) return;
    if (f.size() == 1) {
      Mono m = Mono::one();
      Rational cc(1);
      for (int i = 0; i < times; ++i) {
        m = m * f.terms()[0].m;
        cc *= f.terms()[0].c;
      }
      p = p.mul_mono(m, cc);
      return;
    }
    for (int i = 0; i < times; ++i) p = p * f;
  };
  for (auto& d : den) {
    int ea = find(a.den_, d.poly), eb = find(b.den_, d.poly);
    mul_factor(na, d.poly, d.exp - ea);
    mul_factor(nb, d.poly, d.exp - eb);
  }
  std::sort(den.begin(), den.end(),
            [](const DenFactor& x, const DenFactor& y) { return SPoly::cmp(x.poly, y.poly) < 0; });
}

JetScalar operator+(const JetScalar& a, const JetScalar& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  JetScalar r(a.ctx_, Rational(0));
  SPoly na, nb;
  JetScalar::align(a, b, na, nb, r.den_);
  r.num_ = na + nb;
  r.watermark_ = std::min(a.watermark_, b.watermark_);
  if (r.num_.is_zero()) r.den_.clear();
  r.reduce_monomial_factors();
  return r;
}

JetScalar JetScalar::operator-() const {
  JetScalar r = *this;
  r.num_ = -r.num_;
  return r;
}

JetScalar operator-(const JetScalar& a, const JetScalar& b) { return a + (-b); }

JetScalar operator*(const JetScalar& a, const JetScalar& b) {
  if (a.is_zero() || b.is_zero())
    return JetScalar::zero(a.ctx_ ? a.ctx_ : b.ctx_);
  JetScalar r(a.ctx_, Rational(0));
  SPoly::TruncSpec spec{a.ctx_->group_lo(), a.ctx_->group_hi(), a.ctx_->Dx,
                        a.ctx_->hbar_index(), a.ctx_->Nh};
  r.num_ = SPoly::mul_truncated(a.num_, b.num_, spec);
  r.den_ = a.den_;
  r.watermark_ = std::min(a.watermark_, b.watermark_);
  if (r.num_.is_zero()) {
    r.den_.clear();
    return r;
  }
  for (auto& df : b.den_) {
    bool merged = false;
    for (auto& d : r.den_) {
      if (d.poly == df.poly) {
        d.exp += df.exp;
        merged = true;
        break;
      }
    }
    if (!merged) r.den_.push_back(df);
  }
  std::sort(r.den_.begin(), r.den_.end(),
            [](const DenFactor& x, const DenFactor& y) { return SPoly::cmp(x.poly, y.poly) < 0; });
  r.reduce_monomial_factors();
  return r;
}

JetScalar JetScalar::scaled(const Rational& c) const {
  if (c.is_zero()) return zero(ctx_);
  JetScalar r = *this;
  r.num_ = r.num_.scaled(c);
  return r;
}

JetScalar operator/(const JetScalar& a, const JetScalar& b) {
  const JetContext* ctx = a.ctx_ ? a.ctx_ : b.ctx_;
  if (b.is_zero()) throw DegenerateDenominator("division by zero scalar");
  // Split b = b0(base) * (1 + u) with u of positive (group,hbar) degree.
  SPoly b0;
  {
    std::vector<Term> t;
    for (auto& term : b.num_.terms())
      if (term.m.deg(ctx->group_lo(), ctx->n_vars()) == 0) t.push_back(term);
    b0 = SPoly::from_terms(std::move(t));
  }
  if (b0.is_zero())
    throw DegenerateDenominator("divisor has no base-only part (not a unit)");
  // Reject divisors vanishing at the base point (after gcd reduction).
  {
    JetScalar probe(ctx, b0);
    probe.den_ = b.den_;
    probe.normalize();
    if (probe.num_.evaluate_range(0, ctx->base_point).constant_value().is_zero())
      throw DegenerateDenominator("divisor vanishes at the base point");
  }
  SPoly rest = b.num_ - b0;
  // 1/b = den_b * sum_k (-rest)^k b0^(K-k) / b0^(K+1)
  int K = ctx->Dx + ctx->Nh;
  auto keep = ctx->keeper();
  SPoly series;
  SPoly restpow(Rational(1));
  std::vector<SPoly> b0pow(size_t(K) + 1);
  b0pow[0] = SPoly(Rational(1));
  for (int k = 1; k <= K; ++k) b0pow[size_t(k)] = b0pow[size_t(k - 1)] * b0;
  for (int k = 0; k <= K; ++k) {
    series += SPoly::mul_filtered(restpow, b0pow[size_t(K - k)], keep);
    if (k < K) restpow = SPoly::mul_filtered(restpow, -rest, keep);
  }
  JetScalar inv(ctx, series, b.watermark_);
  for (auto& df : b.den_) {
    // b's denominator moves to the numerator of 1/b.
    for (int i = 0; i < df.exp; ++i) inv.num_ = inv.num_ * df.poly;
  }
  inv.push_den_factor(b0, K + 1);
  return a * inv;
}

JetScalar scalar_arith(const JetScalar& a, const JetScalar& b, ScalarOp op) {
  switch (op) {
    case ScalarOp::Add: return a + b;
    case ScalarOp::Sub: return a - b;
    case ScalarOp::Mul: return a * b;
    case ScalarOp::Div: return a / b;
  }
  throw InternalError("unreachable");
}

JetScalar JetScalar::mul_hbar(int k) const {
  JetScalar r = *this;
  SPoly h = SPoly::variable(ctx_->hbar_index());
  for (int i = 0; i < k; ++i) r.num_ = SPoly::mul_filtered(r.num_, h, ctx_->keeper());
  return r;
}

JetScalar JetScalar::div_hbar() const {
  JetScalar r = *this;
  std::vector<Term> t;
  for (auto& term : num_.terms()) {
    if (term.m.e[size_t(ctx_->hbar_index())] == 0)
      throw InternalError("div_hbar: scalar not divisible by hbar");
    Mono m = term.m;
    m.e[size_t(ctx_->hbar_index())] -= 1;
    t.push_back({m, term.c});
  }
  r.num_ = SPoly::from_terms(std::move(t));
  return r;
}

JetScalar JetScalar::truncate_hbar(int maxpow) const {
  JetScalar r = *this;
  std::vector<Term> t;
  for (auto& term : num_.terms())
    if (term.m.e[size_t(ctx_->hbar_index())] <= maxpow) t.push_back(term);
  r.num_ = SPoly::from_terms(std::move(t));
  if (r.num_.is_zero()) r.den_.clear();
  return r;
}

JetScalar JetScalar::hbar_coefficient(int k) const {
  JetScalar r = *this;
  std::vector<Term> t;
  for (auto& term : num_.terms()) {
    if (term.m.e[size_t(ctx_->hbar_index())] != k) continue;
    Mono m = term.m;
    m.e[size_t(ctx_->hbar_index())] = 0;
    t.push_back({m, term.c});
  }
  r.num_ = SPoly::from_terms(std::move(t));
  if (r.num_.is_zero()) r.den_.clear();
  return r;
}

int JetScalar::hbar_degree() const {
  int d = 0;
  for (auto& term : num_.terms()) d = std::max(d, int(term.m.e[size_t(ctx_->hbar_index())]));
  return d;
}

JetScalar JetScalar::derivative(int var) const {
  JetScalar r(ctx_, Rational(0));
  if (var >= ctx_->group_lo() && var < ctx_->group_hi()) {
    r.num_ = num_.derivative(var);
    r.den_ = den_;
    r.watermark_ = std::max(0, watermark_ - 1);
    if (r.num_.is_zero()) r.den_.clear();
    return r;
  }
  // Base variable: quotient rule over the factored denominator.
  SPoly dnum = num_.derivative(var);
  std::vector<size_t> active;  // factors with nonzero derivative
  for (size_t i = 0; i < den_.size(); ++i)
    if (!den_[i].poly.derivative(var).is_zero()) active.push_back(i);
  SPoly res = dnum;
  for (size_t i : active) res = res * den_[i].poly;
  for (size_t j : active) {
    SPoly piece = num_.scaled(Rational(-den_[j].exp)) * den_[j].poly.derivative(var);
    for (size_t i : active)
      if (i != j) piece = piece * den_[i].poly;
    res += piece;
  }
  r.num_ = std::move(res);
  r.watermark_ = watermark_;
  if (r.num_.is_zero()) return r;
  r.den_ = den_;
  for (size_t i : active) r.den_[i].exp += 1;
  return r;
}

JetScalar JetScalar::substitute(const std::vector<const JetScalar*>& values) const {
  for (auto& df : den_) {
    for (size_t v = 0; v < values.size(); ++v) {
      if (values[v] && !df.poly.derivative(int(v)).is_zero())
        throw InternalError("substitute: denominator factor involves substituted variable");
    }
  }
  std::vector<SPoly> polys(values.size());
  std::vector<const SPoly*> ptrs(values.size(), nullptr);
  int wm = watermark_;
  for (size_t v = 0; v < values.size(); ++v) {
    if (!values[v]) continue;
    if (values[v]->has_denominator())
      throw InternalError("substitute: only polynomial substitution values supported");
    polys[v] = values[v]->num();
    ptrs[v] = &polys[v];
    wm = std::min(wm, values[v]->watermark());
  }
  JetScalar r(ctx_, num_.substitute(ptrs, ctx_->keeper()), wm);
  r.den_ = den_;
  if (r.num_.is_zero()) r.den_.clear();
  return r;
}

JetScalar JetScalar::remap(const JetContext* to, const std::vector<int>& varmap) const {
  auto remap_poly = [&](const SPoly& p) {
    std::vector<Term> out;
    out.reserve(p.terms().size());
    for (auto& t : p.terms()) {
      Mono m;
      for (int v = 0; v < kMaxVars; ++v) {
        int e = t.m.e[size_t(v)];
        if (!e) continue;
        int tgt;
        if (v == ctx_->hbar_index())
          tgt = to->hbar_index();
        else if (v < int(varmap.size()))
          tgt = varmap[size_t(v)];
        else
          throw InternalError("remap: unmapped variable");
        if (tgt < 0) throw InternalError("remap: unmapped variable");
        m.e[size_t(tgt)] = uint8_t(m.e[size_t(tgt)] + e);
      }
      out.push_back({m, t.c});
    }
    return SPoly::from_terms(std::move(out));
  };
  JetScalar r(to, remap_poly(num_), watermark_);
  for (auto& df : den_) r.push_den_factor(remap_poly(df.poly), df.exp);
  return r;
}

std::vector<Rational> JetScalar::evaluate_at_base(bool normalize_first) const {
  JetScalar v = *this;
  if (normalize_first) v.normalize();
  Rational dval(1);
  for (auto& df : v.den_) {
    Rational f = df.poly.evaluate(ctx_->base_point);
    if (f.is_zero())
      throw DegenerateDenominator("denominator " + df.poly.to_string(ctx_->var_names) +
                                  " vanishes at the base point");
    dval *= f.pow(df.exp);
  }
  std::vector<Rational> out(size_t(ctx_->Nh) + 1, Rational(0));
  for (auto& term : v.num_.terms()) {
    if (term.m.deg(ctx_->group_lo(), ctx_->group_hi()) > 0) continue;  // x = 0
    Rational c = term.c;
    for (int i = 0; i < ctx_->n_base; ++i) {
      uint8_t p = term.m.e[size_t(i)];
      if (p) c *= ctx_->base_point[size_t(i)].pow(p);
    }
    out[term.m.e[size_t(ctx_->hbar_index())]] += c;
  }
  for (auto& c : out) c /= dval;
  return out;
}

void JetScalar::reduce_monomial_factors() {
  if (den_.empty() || num_.is_zero()) return;
  bool changed = false;
  for (auto& df : den_) {
    if (df.poly.size() != 1) continue;
    const Mono& fm = df.poly.terms()[0].m;
    // largest k with fm^k dividing every numerator term
    int k = df.exp;
    for (auto& t : num_.terms()) {
      for (int v = 0; v < kMaxVars && k > 0; ++v) {
        if (!fm.e[size_t(v)]) continue;
        k = std::min(k, int(t.m.e[size_t(v)]) / int(fm.e[size_t(v)]));
      }
      if (!k) break;
    }
    if (!k) continue;
    SPoly q;
    SPoly fk = SPoly(df.poly.terms()[0].c.pow(k))
                   .mul_mono([&] {
                     Mono m;
                     for (int v = 0; v < kMaxVars; ++v)
                       m.e[size_t(v)] = uint8_t(fm.e[size_t(v)] * k);
                     return m;
                   }(), Rational(1));
    if (!num_.div_exact(fk, q)) continue;
    num_ = q;
    df.exp -= k;
    changed = true;
  }
  if (changed)
    den_.erase(std::remove_if(den_.begin(), den_.end(),
                              [](const DenFactor& d) { return d.exp == 0; }),
               den_.end());
}

void JetScalar::normalize() {
  if (num_.is_zero()) {
    den_.clear();
    return;
  }
  std::vector<DenFactor> kept;
  for (auto& df : den_) {
    int e = df.exp;
    SPoly q;
    while (e > 0 && num_.div_exact(df.poly, q)) {
      num_ = q;
      --e;
    }
    if (e > 0) kept.push_back({df.poly, e});
  }
  den_ = std::move(kept);
}

void JetScalar::trim_to_watermark() {
  if (watermark_ >= ctx_->Dx) return;
  num_ = num_.truncate_range(ctx_->group_lo(), ctx_->group_hi(), watermark_);
  if (num_.is_zero()) den_.clear();
}

bool JetScalar::is_zero_upto(int through) const {
  int bound = std::min(watermark_, through);
  for (auto& term : num_.terms())
    if (term.m.deg(ctx_->group_lo(), ctx_->group_hi()) <= bound) {
      // A term below the trust level: nonzero unless it cancels against the
      // denominator, which the factored form cannot hide (den is base-only
      // and nonzero).
      return false;
    }
  return true;
}

bool JetScalar::is_base_only() const {
  return num_.degree_in(ctx_->group_lo(), ctx_->n_vars()) == 0;
}

JetScalar JetScalar::at_group_zero() const {
  JetScalar r = *this;
  std::vector<Term> t;
  for (auto& term : num_.terms())
    if (term.m.deg(ctx_->group_lo(), ctx_->group_hi()) == 0) t.push_back(term);
  r.num_ = SPoly::from_terms(std::move(t));
  if (r.num_.is_zero()) r.den_.clear();
  return r;
}

JetScalar JetScalar::base_part() const {
  JetScalar r = *this;
  std::vector<Term> t;
  for (auto& term : num_.terms())
    if (term.m.deg(ctx_->group_lo(), ctx_->n_vars()) == 0) t.push_back(term);
  r.num_ = SPoly::from_terms(std::move(t));
  if (r.num_.is_zero()) r.den_.clear();
  return r;
}

bool JetScalar::is_hbar_free() const {
  for (auto& term : num_.terms())
    if (term.m.e[size_t(ctx_->hbar_index())]) return false;
  return true;
}

std::string JetScalar::to_string() const {
  std::string s = "(" + num_.to_string(ctx_->var_names) + ")";
  if (!den_.empty()) {
    s += " / (";
    bool first = true;
    for (auto& df : den_) {
      if (!first) s += "*";
      s += "(" + df.poly.to_string(ctx_->var_names) + ")";
      if (df.exp > 1) s += "^" + std::to_string(df.exp);
      first = false;
    }
    s += ")";
  }
  return s;
}

std::string JetScalar::canonical_key() const {
  JetScalar v = normalized();
  return v.to_string();
}

}  // namespace dyt
