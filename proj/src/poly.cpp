#include "dyt/poly.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>
#include <unordered_map>

#include "dyt/par.hpp"

namespace dyt {

namespace {
std::atomic<ExecMode> g_mode{ExecMode::Parallel};
}

ExecMode exec_mode() { return g_mode.load(std::memory_order_relaxed); }
void set_exec_mode(ExecMode m) { g_mode.store(m, std::memory_order_relaxed); }

Mono operator*(const Mono& a, const Mono& b) {
  Mono r;
  for (int i = 0; i < kMaxVars; ++i) {
    int s = a.e[size_t(i)] + b.e[size_t(i)];
    if (s > 255) throw std::overflow_error("Mono: exponent overflow");
    r.e[size_t(i)] = uint8_t(s);
  }
  return r;
}

Mono operator/(const Mono& a, const Mono& b) {
  Mono r;
  for (int i = 0; i < kMaxVars; ++i) r.e[size_t(i)] = uint8_t(a.e[size_t(i)] - b.e[size_t(i)]);
  return r;
}

bool operator<(const Mono& a, const Mono& b) {
  int da = a.deg_all(), db = b.deg_all();
  if (da != db) return da < db;
  return std::memcmp(a.e.data(), b.e.data(), kMaxVars) < 0;
}

SPoly SPoly::from_terms(std::vector<Term> t) {
  std::sort(t.begin(), t.end(), [](const Term& x, const Term& y) { return x.m < y.m; });
  SPoly p;
  for (auto& term : t) {
    if (term.c.is_zero()) continue;
    if (!p.terms_.empty() && p.terms_.back().m == term.m) {
      p.terms_.back().c += term.c;
      if (p.terms_.back().c.is_zero()) p.terms_.pop_back();
    } else {
      p.terms_.push_back(std::move(term));
    }
  }
  return p;
}

int SPoly::total_degree() const {
  int d = 0;
  for (auto& t : terms_) d = std::max(d, t.m.deg_all());
  return d;
}

int SPoly::degree_in(int lo, int hi) const {
  int d = 0;
  for (auto& t : terms_) d = std::max(d, t.m.deg(lo, hi));
  return d;
}

SPoly operator+(const SPoly& a, const SPoly& b) {
  SPoly r;
  r.terms_.reserve(a.terms_.size() + b.terms_.size());
  size_t i = 0, j = 0;
  while (i < a.terms_.size() && j < b.terms_.size()) {
    if (a.terms_[i].m == b.terms_[j].m) {
      Rational c = a.terms_[i].c + b.terms_[j].c;
      if (!c.is_zero()) r.terms_.push_back({a.terms_[i].m, std::move(c)});
      ++i;
      ++j;
    } else if (a.terms_[i].m < b.terms_[j].m) {
      r.terms_.push_back(a.terms_[i++]);
    } else {
      r.terms_.push_back(b.terms_[j++]);
    }
  }
  while (i < a.terms_.size()) r.terms_.push_back(a.terms_[i++]);
  while (j < b.terms_.size()) r.terms_.push_back(b.terms_[j++]);
  return r;
}

SPoly SPoly::operator-() const {
  SPoly r = *this;
  for (auto& t : r.terms_) t.c = -t.c;
  return r;
}

SPoly operator-(const SPoly& a, const SPoly& b) { return a + (-b); }

SPoly SPoly::scaled(const Rational& c) const {
  if (c.is_zero()) return SPoly();
  SPoly r = *this;
  for (auto& t : r.terms_) t.c *= c;
  return r;
}

SPoly SPoly::filter_spec(const TruncSpec& spec) const {
  std::vector<Term> t;
  t.reserve(terms_.size());
  for (auto& term : terms_)
    if (spec.keep(term.m)) t.push_back(term);
  SPoly p;
  // terms stay sorted and unique
  p.terms_ = std::move(t);
  return p;
}

SPoly SPoly::mul_mono(const Mono& m, const Rational& c) const {
  if (c.is_zero()) return SPoly();
  SPoly r;
  r.terms_.reserve(terms_.size());
  for (auto& t : terms_) r.terms_.push_back({t.m * m, t.c * c});
  return r;  // order preserved: multiplying by a fixed monomial is monotone
}

namespace {

SPoly collect(std::unordered_map<Mono, Rational, MonoHash>& acc) {
  std::vector<Term> t;
  t.reserve(acc.size());
  for (auto& kv : acc)
    if (!kv.second.is_zero()) t.push_back({kv.first, std::move(kv.second)});
  return SPoly::from_terms(std::move(t));
}

}  // namespace

SPoly SPoly::mul_filtered_serial(const SPoly& a, const SPoly& b,
                                 const std::function<bool(const Mono&)>& keep) {
  if (a.is_zero() || b.is_zero()) return SPoly();
  std::unordered_map<Mono, Rational, MonoHash> acc;
  acc.reserve(a.terms_.size() + b.terms_.size());
  for (auto& ta : a.terms_) {
    for (auto& tb : b.terms_) {
      Mono m = ta.m * tb.m;
      if (keep && !keep(m)) continue;
      auto it = acc.find(m);
      if (it == acc.end())
        acc.emplace(m, ta.c * tb.c);
      else
        it->second += ta.c * tb.c;
    }
  }
  return collect(acc);
}

SPoly SPoly::mul_filtered_parallel(const SPoly& a, const SPoly& b,
                                   const std::function<bool(const Mono&)>& keep) {
#ifndef _OPENMP
  return mul_filtered_serial(a, b, keep);
#else
  if (a.is_zero() || b.is_zero()) return SPoly();
  size_t work = a.terms_.size() * b.terms_.size();
  if (work < 4096) return mul_filtered_serial(a, b, keep);
  int nt = omp_get_max_threads();
  std::vector<std::unordered_map<Mono, Rational, MonoHash>> maps;
  maps.resize(size_t(nt));
#pragma omp parallel num_threads(nt)
  {
    auto& acc = maps[size_t(omp_get_thread_num())];
#pragma omp for schedule(dynamic, 8)
    for (long ia = 0; ia < long(a.terms_.size()); ++ia) {
      const Term& ta = a.terms_[size_t(ia)];
      for (auto& tb : b.terms_) {
        Mono m = ta.m * tb.m;
        if (keep && !keep(m)) continue;
        auto it = acc.find(m);
        if (it == acc.end())
          acc.emplace(m, ta.c * tb.c);
        else
          it->second += ta.c * tb.c;
      }
    }
  }
  auto& total = maps[0];
  for (size_t k = 1; k < maps.size(); ++k) {
    for (auto& kv : maps[k]) {
      auto it = total.find(kv.first);
      if (it == total.end())
        total.emplace(kv.first, std::move(kv.second));
      else
        it->second += kv.second;
    }
  }
  return collect(total);
#endif
}

SPoly SPoly::mul_filtered(const SPoly& a, const SPoly& b,
                          const std::function<bool(const Mono&)>& keep) {
  return exec_mode() == ExecMode::Parallel ? mul_filtered_parallel(a, b, keep)
                                           : mul_filtered_serial(a, b, keep);
}

SPoly operator*(const SPoly& a, const SPoly& b) {
  return SPoly::mul_filtered(a, b, nullptr);
}

SPoly SPoly::mul_truncated(const SPoly& a, const SPoly& b, const TruncSpec& spec) {
  if (a.is_zero() || b.is_zero()) return SPoly();
  if (a.terms_.size() == 1) return b.mul_mono(a.terms_[0].m, a.terms_[0].c).filter_spec(spec);
  if (b.terms_.size() == 1) return a.mul_mono(b.terms_[0].m, b.terms_[0].c).filter_spec(spec);
  size_t work = a.terms_.size() * b.terms_.size();
  if (work <= 64) {
    // small case: accumulate and canonicalize (no hash map churn)
    std::vector<Term> t;
    t.reserve(work);
    for (auto& ta : a.terms_)
      for (auto& tb : b.terms_) {
        Mono m = ta.m * tb.m;
        if (!spec.keep(m)) continue;
        t.push_back({m, ta.c * tb.c});
      }
    return from_terms(std::move(t));
  }
#ifdef _OPENMP
  if (exec_mode() == ExecMode::Parallel && work >= 4096) {
    int nt = omp_get_max_threads();
    std::vector<std::unordered_map<Mono, Rational, MonoHash>> maps;
    maps.resize(size_t(nt));
#pragma omp parallel num_threads(nt)
    {
      auto& acc = maps[size_t(omp_get_thread_num())];
#pragma omp for schedule(dynamic, 8)
      for (long ia = 0; ia < long(a.terms_.size()); ++ia) {
        const Term& ta = a.terms_[size_t(ia)];
        for (auto& tb : b.terms_) {
          Mono m = ta.m * tb.m;
          if (!spec.keep(m)) continue;
          auto it = acc.find(m);
          if (it == acc.end())
            acc.emplace(m, ta.c * tb.c);
          else
            it->second += ta.c * tb.c;
        }
      }
    }
    auto& total = maps[0];
    for (size_t k = 1; k < maps.size(); ++k) {
      for (auto& kv : maps[k]) {
        auto it = total.find(kv.first);
        if (it == total.end())
          total.emplace(kv.first, std::move(kv.second));
        else
          it->second += kv.second;
      }
    }
    return collect(total);
  }
#endif
  std::unordered_map<Mono, Rational, MonoHash> acc;
  acc.reserve(a.terms_.size() + b.terms_.size());
  for (auto& ta : a.terms_) {
    for (auto& tb : b.terms_) {
      Mono m = ta.m * tb.m;
      if (!spec.keep(m)) continue;
      auto it = acc.find(m);
      if (it == acc.end())
        acc.emplace(m, ta.c * tb.c);
      else
        it->second += ta.c * tb.c;
    }
  }
  return collect(acc);
}

SPoly SPoly::derivative(int var) const {
  std::vector<Term> t;
  t.reserve(terms_.size());
  for (auto& term : terms_) {
    uint8_t p = term.m.e[size_t(var)];
    if (!p) continue;
    Mono m = term.m;
    m.e[size_t(var)] = uint8_t(p - 1);
    t.push_back({m, term.c * Rational(p)});
  }
  return from_terms(std::move(t));
}

SPoly SPoly::substitute(const std::vector<const SPoly*>& vars,
                        const std::function<bool(const Mono&)>& keep) const {
  // Power cache per substituted variable.
  std::vector<std::vector<SPoly>> powers(vars.size());
  auto power_of = [&](int v, int p) -> const SPoly& {
    auto& cache = powers[size_t(v)];
    if (cache.empty()) cache.push_back(SPoly(Rational(1)));
    while (int(cache.size()) <= p)
      cache.push_back(mul_filtered(cache.back(), *vars[size_t(v)], keep));
    return cache[size_t(p)];
  };
  SPoly out;
  for (auto& term : terms_) {
    SPoly acc(term.c);
    Mono rest;
    for (int v = 0; v < kMaxVars; ++v) {
      uint8_t p = term.m.e[size_t(v)];
      if (!p) continue;
      if (v < int(vars.size()) && vars[size_t(v)]) {
        acc = mul_filtered(acc, power_of(v, p), keep);
      } else {
        rest.e[size_t(v)] = p;
      }
    }
    if (!rest.is_one()) acc = acc.mul_mono(rest, Rational(1));
    if (keep) {
      std::vector<Term> kept;
      for (auto& t : acc.terms())
        if (keep(t.m)) kept.push_back(t);
      acc = from_terms(std::move(kept));
    }
    out += acc;
  }
  return out;
}

Rational SPoly::evaluate(const std::vector<Rational>& point) const {
  Rational out(0);
  for (auto& term : terms_) {
    Rational v = term.c;
    for (int i = 0; i < kMaxVars; ++i) {
      uint8_t p = term.m.e[size_t(i)];
      if (!p) continue;
      if (i >= int(point.size())) throw std::domain_error("SPoly: unbound variable in evaluate");
      v *= point[size_t(i)].pow(p);
    }
    out += v;
  }
  return out;
}

SPoly SPoly::evaluate_range(int lo, const std::vector<Rational>& vals) const {
  std::vector<Term> t;
  for (auto& term : terms_) {
    Rational c = term.c;
    Mono m = term.m;
    for (size_t k = 0; k < vals.size(); ++k) {
      uint8_t p = m.e[size_t(lo) + k];
      if (!p) continue;
      c *= vals[k].pow(p);
      m.e[size_t(lo) + k] = 0;
    }
    if (!c.is_zero()) t.push_back({m, std::move(c)});
  }
  return from_terms(std::move(t));
}

SPoly SPoly::truncate_range(int lo, int hi, int bound) const {
  std::vector<Term> t;
  for (auto& term : terms_)
    if (term.m.deg(lo, hi) <= bound) t.push_back(term);
  return from_terms(std::move(t));
}

bool SPoly::div_exact(const SPoly& d, SPoly& q) const {
  if (d.is_zero()) throw std::domain_error("SPoly: division by zero polynomial");
  q = SPoly();
  if (is_zero()) return true;
  // Fast path: monomial divisor.
  if (d.terms_.size() == 1) {
    const Term& dt = d.terms_[0];
    std::vector<Term> t;
    t.reserve(terms_.size());
    for (auto& term : terms_) {
      if (!Mono::divides(dt.m, term.m)) return false;
      t.push_back({term.m / dt.m, term.c / dt.c});
    }
    q = from_terms(std::move(t));
    return true;
  }
  SPoly rem = *this;
  const Term& lead = d.terms_.back();  // highest in the monomial order
  std::vector<Term> qt;
  while (!rem.is_zero()) {
    const Term& rl = rem.terms_.back();
    if (!Mono::divides(lead.m, rl.m)) return false;
    Term step{rl.m / lead.m, rl.c / lead.c};
    qt.push_back(step);
    rem = rem - d.mul_mono(step.m, step.c);
  }
  q = from_terms(std::move(qt));
  return true;
}

Rational SPoly::content() const {
  if (is_zero()) return Rational(0);
  BigInt gn(0), gd(1);
  for (auto& t : terms_) {
    gn = BigInt::gcd(gn, t.c.num());
    gd = gd * (t.c.den() / BigInt::gcd(gd, t.c.den()));
  }
  Rational c(gn, gd);
  if (terms_.back().c.sign() < 0) c = -c;
  return c;
}

int SPoly::cmp(const SPoly& a, const SPoly& b) {
  size_t n = std::min(a.terms_.size(), b.terms_.size());
  for (size_t i = 0; i < n; ++i) {
    if (a.terms_[i].m != b.terms_[i].m) return a.terms_[i].m < b.terms_[i].m ? -1 : 1;
    int c = Rational::cmp(a.terms_[i].c, b.terms_[i].c);
    if (c) return c;
  }
  if (a.terms_.size() != b.terms_.size()) return a.terms_.size() < b.terms_.size() ? -1 : 1;
  return 0;
}

std::string SPoly::to_string(const std::vector<std::string>& names) const {
  if (is_zero()) return "0";
  std::string out;
  for (size_t i = terms_.size(); i-- > 0;) {
    const Term& t = terms_[i];
    std::string piece;
    bool is_const = t.m.is_one();
    Rational c = t.c;
    if (is_const || !(c.is_one() || (-c).is_one())) {
      piece += c.to_string();
    } else if ((-c).is_one()) {
      piece += "-";
    }
    bool first = piece.empty() || piece == "-";
    for (int v = 0; v < kMaxVars; ++v) {
      uint8_t p = t.m.e[size_t(v)];
      if (!p) continue;
      if (!first || (!piece.empty() && piece != "-")) piece += "*";
      piece += v < int(names.size()) ? names[size_t(v)] : ("v" + std::to_string(v));
      if (p > 1) piece += "^" + std::to_string(int(p));
      first = false;
    }
    if (!out.empty() && !piece.empty() && piece[0] != '-') out += "+";
    out += piece;
  }
  return out;
}

size_t SPoly::hash() const {
  uint64_t h = 0x2545f4914f6cdd1dull;
  for (auto& t : terms_) h = h * 0x100000001b3ull + (t.m.hash() ^ t.c.hash());
  return size_t(h);
}

SPoly spoly_pow(const SPoly& base, int e, const std::function<bool(const Mono&)>& keep) {
  SPoly acc(Rational(1));
  for (int i = 0; i < e; ++i) acc = SPoly::mul_filtered(acc, base, keep);
  return acc;
}

}  // namespace dyt
