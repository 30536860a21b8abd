#include "dyt/env.hpp"

#include <algorithm>

namespace dyt {

namespace {

// Collects (mono, rational, hpow) triples, merging duplicates.
void fold(std::vector<PbwTerm>& acc, const Mono& m, const Rational& c, int hpow) {
  if (c.is_zero()) return;
  for (auto& t : acc) {
    if (t.m == m && t.hpow == hpow) {
      t.c += c;
      return;
    }
  }
  acc.push_back({m, c, hpow});
}

void prune(std::vector<PbwTerm>& acc) {
  acc.erase(std::remove_if(acc.begin(), acc.end(),
                           [](const PbwTerm& t) { return t.c.is_zero(); }),
            acc.end());
}

}  // namespace

std::vector<int> PbwAlgebra::mono_to_word(const Mono& m) {
  std::vector<int> w;
  for (int v = 0; v < kMaxVars; ++v)
    for (int r = 0; r < m.e[size_t(v)]; ++r) w.push_back(v);
  return w;
}

std::vector<PbwTerm> PbwAlgebra::normalize(const std::vector<int>& word) const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(word);
    if (it != cache_.end()) return it->second;
  }
  std::vector<PbwTerm> out;
  // Find the first descent.
  size_t pos = 0;
  bool sorted = true;
  for (size_t i = 0; i + 1 < word.size(); ++i) {
    if (word[i] > word[i + 1]) {
      pos = i;
      sorted = false;
      break;
    }
  }
  if (sorted) {
    Mono m;
    for (int v : word) {
      if (m.e[size_t(v)] == 255) throw InternalError("PBW exponent overflow");
      m.e[size_t(v)] += 1;
    }
    out.push_back({m, Rational(1), 0});
  } else {
    // word = u b a v with b > a:  u b a v = u a b v + hbar * u [b,a] v
    std::vector<int> swapped = word;
    std::swap(swapped[pos], swapped[pos + 1]);
    out = normalize(swapped);
    int b = word[pos], a = word[pos + 1];
    for (int k = 0; k < L_->n; ++k) {
      const Rational& s = L_->c3(k, b, a);
      if (s.is_zero()) continue;
      std::vector<int> shorter;
      shorter.reserve(word.size() - 1);
      for (size_t i = 0; i < pos; ++i) shorter.push_back(word[i]);
      shorter.push_back(k);
      for (size_t i = pos + 2; i < word.size(); ++i) shorter.push_back(word[i]);
      for (const PbwTerm& t : normalize(shorter)) fold(out, t.m, t.c * s, t.hpow + 1);
    }
    prune(out);
  }
  std::lock_guard<std::mutex> lock(mu_);
  auto [it, inserted] = cache_.emplace(word, out);
  return it->second;
}

std::vector<PbwTerm> PbwAlgebra::mono_product(const Mono& a, const Mono& b) const {
  std::vector<int> w = mono_to_word(a);
  std::vector<int> wb = mono_to_word(b);
  w.insert(w.end(), wb.begin(), wb.end());
  return normalize(w);
}

EnvTensor EnvTensor::unit(const JetContext* ctx, const PbwAlgebra* alg, int arity) {
  EnvTensor t(ctx, alg, arity);
  t.add(Key{Mono::one(), Mono::one(), Mono::one()}, JetScalar::one(ctx));
  return t;
}

void EnvTensor::add(const Key& k, const JetScalar& coeff) {
  if (coeff.is_zero()) return;
  auto it = terms_.find(k);
  if (it == terms_.end()) {
    terms_.emplace(k, coeff);
  } else {
    it->second += coeff;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

bool EnvTensor::is_zero_mod(int hbar_order) const {
  for (auto& kv : terms_)
    if (!kv.second.truncate_hbar(hbar_order).is_zero_upto()) return false;
  return true;
}

bool EnvTensor::equals_mod(const EnvTensor& o, int hbar_order) const {
  return (*this - o).is_zero_mod(hbar_order);
}

EnvTensor operator+(const EnvTensor& a, const EnvTensor& b) {
  EnvTensor r = a;
  if (r.ctx_ == nullptr) return b;
  for (auto& kv : b.terms_) r.add(kv.first, kv.second);
  return r;
}

EnvTensor EnvTensor::operator-() const {
  EnvTensor r = *this;
  for (auto& kv : r.terms_) kv.second = -kv.second;
  return r;
}

EnvTensor operator-(const EnvTensor& a, const EnvTensor& b) { return a + (-b); }

EnvTensor EnvTensor::scaled(const JetScalar& c) const {
  EnvTensor r(ctx_, alg_, arity_);
  for (auto& kv : terms_) r.add(kv.first, kv.second * c);
  return r;
}

EnvTensor EnvTensor::product(const EnvTensor& a, const EnvTensor& b, const SymMap& base,
                             ProductMode mode) {
  if (a.arity_ != b.arity_) throw InternalError("EnvTensor: arity mismatch in product");
  EnvTensor r(a.ctx_, a.alg_, a.arity_);
  for (auto& ta : a.terms_) {
    for (auto& tb : b.terms_) {
      JetScalar coeff = coefficient_star(ta.second, tb.second, base);
      if (coeff.is_zero()) continue;
      // Slotwise monomial products, each a sum of normal-ordered terms.
      std::vector<std::vector<PbwTerm>> slots;
      slots.reserve(size_t(a.arity_));
      for (int s = 0; s < a.arity_; ++s)
        slots.push_back(a.alg_->mono_product(ta.first[size_t(s)], tb.first[size_t(s)]));
      // Expand the (at most 3-fold) product of sums.
      std::vector<std::pair<Key, JetScalar>> acc;
      acc.push_back({Key{Mono::one(), Mono::one(), Mono::one()}, coeff});
      for (int s = 0; s < a.arity_; ++s) {
        std::vector<std::pair<Key, JetScalar>> next;
        for (auto& partial : acc) {
          for (auto& t : slots[size_t(s)]) {
            Key k = partial.first;
            k[size_t(s)] = t.m;
            JetScalar c2 = partial.second.scaled(t.c);
            if (mode == ProductMode::HbarScaled) c2 = c2.mul_hbar(t.hpow);
            if (!c2.is_zero()) next.push_back({k, c2});
          }
        }
        acc = std::move(next);
      }
      for (auto& kv : acc) r.add(kv.first, kv.second);
    }
  }
  return r;
}

EnvTensor EnvTensor::coproduct_on_slot(int slot) const {
  EnvTensor r(ctx_, alg_, arity_ + 1);
  if (arity_ + 1 > 3) throw InternalError("EnvTensor: arity cap exceeded");
  for (auto& kv : terms_) {
    const Mono& m = kv.first[size_t(slot)];
    // Delta(e^alpha) = sum_{beta <= alpha} prod C(alpha_i, beta_i) e^beta (x) e^(alpha-beta)
    std::vector<std::pair<Mono, Mono>> splits;
    std::vector<Rational> weights;
    splits.push_back({Mono::one(), Mono::one()});
    weights.push_back(Rational(1));
    for (int v = 0; v < kMaxVars; ++v) {
      int a = m.e[size_t(v)];
      if (!a) continue;
      std::vector<std::pair<Mono, Mono>> ns;
      std::vector<Rational> nw;
      // binomials C(a, j)
      std::vector<Rational> binom(size_t(a) + 1, Rational(1));
      for (int j = 1; j <= a; ++j)
        binom[size_t(j)] = binom[size_t(j - 1)] * Rational(a - j + 1) / Rational(j);
      for (size_t s = 0; s < splits.size(); ++s) {
        for (int j = 0; j <= a; ++j) {
          Mono l = splits[s].first, rmono = splits[s].second;
          l.e[size_t(v)] = uint8_t(j);
          rmono.e[size_t(v)] = uint8_t(a - j);
          ns.push_back({l, rmono});
          nw.push_back(weights[s] * binom[size_t(j)]);
        }
      }
      splits = std::move(ns);
      weights = std::move(nw);
    }
    for (size_t s = 0; s < splits.size(); ++s) {
      Key k{Mono::one(), Mono::one(), Mono::one()};
      int out = 0;
      for (int in = 0; in < arity_; ++in) {
        if (in == slot) {
          k[size_t(out++)] = splits[s].first;
          k[size_t(out++)] = splits[s].second;
        } else {
          k[size_t(out++)] = kv.first[size_t(in)];
        }
      }
      r.add(k, kv.second.scaled(weights[s]));
    }
  }
  return r;
}

EnvTensor EnvTensor::antipode_all() const {
  EnvTensor r(ctx_, alg_, arity_);
  for (auto& kv : terms_) {
    std::vector<std::pair<Key, JetScalar>> acc;
    acc.push_back({Key{Mono::one(), Mono::one(), Mono::one()}, kv.second});
    for (int s = 0; s < arity_; ++s) {
      std::vector<int> w = PbwAlgebra::mono_to_word(kv.first[size_t(s)]);
      std::reverse(w.begin(), w.end());
      int sign = (w.size() % 2) ? -1 : 1;
      auto terms = alg_->normalize(w);
      std::vector<std::pair<Key, JetScalar>> next;
      for (auto& partial : acc) {
        for (auto& t : terms) {
          Key k = partial.first;
          k[size_t(s)] = t.m;
          JetScalar c2 = partial.second.scaled(sign < 0 ? -t.c : t.c).mul_hbar(t.hpow);
          if (!c2.is_zero()) next.push_back({k, c2});
        }
      }
      acc = std::move(next);
    }
    for (auto& p : acc) r.add(p.first, p.second);
  }
  return r;
}

EnvTensor EnvTensor::swap_slots(int s1, int s2) const {
  EnvTensor r(ctx_, alg_, arity_);
  for (auto& kv : terms_) {
    Key k = kv.first;
    std::swap(k[size_t(s1)], k[size_t(s2)]);
    r.add(k, kv.second);
  }
  return r;
}

EnvTensor EnvTensor::extend(int front, int back) const {
  EnvTensor r(ctx_, alg_, arity_ + front + back);
  if (r.arity_ > 3) throw InternalError("EnvTensor: arity cap exceeded");
  for (auto& kv : terms_) {
    Key k{Mono::one(), Mono::one(), Mono::one()};
    for (int s = 0; s < arity_; ++s) k[size_t(s + front)] = kv.first[size_t(s)];
    r.add(k, kv.second);
  }
  return r;
}

EnvTensor EnvTensor::hbar_shift(int target_slot, const SymMap& base,
                                ProductMode mode) const {
  EnvTensor out = *this;
  EnvTensor layer = *this;  // r-th lambda-derivative layer, all i-sums folded
  Rational factorial(1);
  for (int r = 1; r <= ctx_->Nh; ++r) {
    factorial *= Rational(r);
    EnvTensor next(ctx_, alg_, arity_);
    // next = sum_i d(layer)/dlambda_i with letter h_i appended to target slot
    for (size_t j = 0; j < base.letters.size(); ++j) {
      int letter = base.letters[j];
      for (auto& kv : layer.terms_) {
        JetScalar d = kv.second.derivative(int(j));
        if (d.is_zero()) continue;
        // multiply target slot by the letter on the right
        std::vector<int> w = PbwAlgebra::mono_to_word(kv.first[size_t(target_slot)]);
        w.push_back(letter);
        for (auto& t : alg_->normalize(w)) {
          Key k = kv.first;
          k[size_t(target_slot)] = t.m;
          JetScalar c2 = d.scaled(t.c);
          if (mode == ProductMode::HbarScaled) c2 = c2.mul_hbar(t.hpow);
          next.add(k, c2);
        }
      }
    }
    layer = next;
    EnvTensor contrib(ctx_, alg_, arity_);
    for (auto& kv : layer.terms_)
      contrib.add(kv.first, kv.second.mul_hbar(r).scaled(factorial.inv()));
    out = out + contrib;
  }
  return out;
}

EnvTensor EnvTensor::ad_action(int basis_index, ProductMode mode) const {
  const LieAlgebraData* L = alg_->lie();
  EnvTensor r(ctx_, alg_, arity_);
  for (auto& kv : terms_) {
    for (int s = 0; s < arity_; ++s) {
      std::vector<int> w = PbwAlgebra::mono_to_word(kv.first[size_t(s)]);
      for (size_t p = 0; p < w.size(); ++p) {
        for (int k = 0; k < L->n; ++k) {
          const Rational& c = L->c3(k, basis_index, w[p]);
          if (c.is_zero()) continue;
          std::vector<int> w2 = w;
          w2[p] = k;
          for (auto& t : alg_->normalize(w2)) {
            Key key = kv.first;
            key[size_t(s)] = t.m;
            JetScalar c2 = kv.second.scaled(t.c * c);
            if (mode == ProductMode::HbarScaled) c2 = c2.mul_hbar(t.hpow);
            r.add(key, c2);
          }
        }
      }
    }
  }
  return r;
}

EnvTensor EnvTensor::derivative_base(int var) const {
  EnvTensor r(ctx_, alg_, arity_);
  for (auto& kv : terms_) r.add(kv.first, kv.second.derivative(var));
  return r;
}

EnvTensor EnvTensor::truncate_hbar(int maxpow) const {
  EnvTensor r(ctx_, alg_, arity_);
  for (auto& kv : terms_) r.add(kv.first, kv.second.truncate_hbar(maxpow));
  return r;
}

std::string EnvTensor::to_string() const {
  if (terms_.empty()) return "0";
  const LieAlgebraData* L = alg_->lie();
  std::string out;
  for (auto& kv : terms_) {
    if (!out.empty()) out += " + ";
    out += "[" + kv.second.to_string() + "] ";
    for (int s = 0; s < arity_; ++s) {
      if (s) out += " (x) ";
      const Mono& m = kv.first[size_t(s)];
      if (m.is_one()) {
        out += "1";
        continue;
      }
      bool first = true;
      for (int v = 0; v < kMaxVars; ++v) {
        for (int rep = 0; rep < m.e[size_t(v)]; ++rep) {
          if (!first) out += ".";
          out += L->basis_names[size_t(v)];
          first = false;
        }
      }
    }
  }
  return out;
}

EnvTensor sym_map(const JetScalar& u, const JetContext* ctx, const SymMap& base) {
  EnvTensor out(ctx, base.alg, 1);
  for (auto& term : u.num().terms()) {
    // Split off base exponents; keep hbar on the coefficient.
    std::vector<int> word;
    for (size_t j = 0; j < base.letters.size(); ++j)
      for (int rep = 0; rep < term.m.e[j]; ++rep) word.push_back(base.letters[j]);
    Mono rest = term.m;
    for (size_t j = 0; j < base.letters.size(); ++j) rest.e[j] = 0;
    if (rest.deg(0, ctx->hbar_index()) > 0)
      throw InternalError("sym_map: input must be a polynomial in the base variables");
    JetScalar coeff(ctx, SPoly(term.c).mul_mono(rest, Rational(1)));  // hbar part
    if (word.empty()) {
      out.add(EnvTensor::Key{Mono::one(), Mono::one(), Mono::one()}, coeff);
      continue;
    }
    // Average over the distinct permutations of the multiset.
    std::sort(word.begin(), word.end());
    long count = 0;
    EnvTensor acc(ctx, base.alg, 1);
    do {
      ++count;
      for (auto& t : base.alg->normalize(word))
        acc.add(EnvTensor::Key{t.m, Mono::one(), Mono::one()},
                JetScalar(ctx, SPoly(t.c)).mul_hbar(t.hpow));
    } while (std::next_permutation(word.begin(), word.end()));
    JetScalar inv_count(ctx, SPoly(Rational(BigInt(1), BigInt(count))));
    out = out + acc.scaled(inv_count * coeff);
  }
  return out;
}

JetScalar sym_inverse(const EnvTensor& t, const SymMap& base) {
  const JetContext* ctx = t.ctx();
  std::map<int, size_t> letter_to_var;
  for (size_t j = 0; j < base.letters.size(); ++j) letter_to_var[base.letters[j]] = j;
  JetScalar out = JetScalar::zero(ctx);
  EnvTensor rest = t;
  while (!rest.terms().empty()) {
    int dmax = -1;
    for (auto& kv : rest.terms()) dmax = std::max(dmax, kv.first[0].deg_all());
    // Peel the top PBW degree: it agrees with the symmetric-algebra symbol.
    JetScalar layer = JetScalar::zero(ctx);
    for (auto& kv : rest.terms()) {
      if (kv.first[0].deg_all() != dmax) continue;
      Mono lam;
      for (int v = 0; v < kMaxVars; ++v) {
        int p = kv.first[0].e[size_t(v)];
        if (!p) continue;
        auto it = letter_to_var.find(v);
        if (it == letter_to_var.end())
          throw InternalError("sym_inverse: tensor not supported on the base subalgebra");
        lam.e[it->second] = uint8_t(p);
      }
      JetScalar coeff = kv.second;
      layer += JetScalar(ctx, SPoly(Rational(1)).mul_mono(lam, Rational(1))) * coeff;
    }
    out += layer;
    rest = rest - sym_map(layer, ctx, base);
    if (dmax == 0 && !rest.terms().empty())
      throw InternalError("sym_inverse: triangular elimination failed");
  }
  return out;
}

JetScalar pbw_star(const JetScalar& u, const JetScalar& v, const SymMap& base) {
  EnvTensor su = sym_map(u, u.ctx(), base);
  EnvTensor sv = sym_map(v, v.ctx(), base);
  // Slot product; coefficients here are hbar-polynomials only.
  EnvTensor prod(u.ctx(), base.alg, 1);
  for (auto& a : su.terms())
    for (auto& b : sv.terms()) {
      JetScalar coeff = a.second * b.second;
      if (coeff.is_zero()) continue;
      for (auto& t : base.alg->mono_product(a.first[0], b.first[0]))
        prod.add(EnvTensor::Key{t.m, Mono::one(), Mono::one()},
                 coeff.scaled(t.c).mul_hbar(t.hpow));
    }
  return sym_inverse(prod, base);
}

JetScalar coefficient_star(const JetScalar& u, const JetScalar& v, const SymMap& base) {
  if (base.letters.empty() || base.abelian(*base.alg->lie())) return u * v;
  if (u.has_denominator() || v.has_denominator())
    throw InternalError(
        "coefficient_star: rational coefficients over a nonabelian base are not supported");
  return pbw_star(u, v, base);
}

}  // namespace dyt
