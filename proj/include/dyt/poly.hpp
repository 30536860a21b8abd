// Sparse multivariate polynomials over exact rationals.
//
// A Mono is a packed exponent vector over at most kMaxVars variables.
// Variable meaning (base vs group-jet vs hbar) is assigned by JetContext;
// this layer only needs degree ranges for truncation.

#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "dyt/bigint.hpp"

namespace dyt {

constexpr int kMaxVars = 16;

struct Mono {
  std::array<uint8_t, kMaxVars> e{};

  static Mono one() { return Mono{}; }
  static Mono var(int i, uint8_t p = 1) {
    Mono m;
    m.e[size_t(i)] = p;
    return m;
  }

  bool is_one() const {
    for (auto v : e)
      if (v) return false;
    return true;
  }
  int deg(int lo, int hi) const {  // total degree over vars [lo, hi)
    int d = 0;
    for (int i = lo; i < hi; ++i) d += e[size_t(i)];
    return d;
  }
  int deg_all() const { return deg(0, kMaxVars); }

  // Throws on per-variable exponent overflow (255 cap).
  friend Mono operator*(const Mono& a, const Mono& b);
  // Componentwise a/b; valid only if divides(b, a).
  friend Mono operator/(const Mono& a, const Mono& b);
  static bool divides(const Mono& a, const Mono& b) {  // a | b
    for (int i = 0; i < kMaxVars; ++i)
      if (a.e[size_t(i)] > b.e[size_t(i)]) return false;
    return true;
  }

  friend bool operator==(const Mono& a, const Mono& b) { return a.e == b.e; }
  friend bool operator!=(const Mono& a, const Mono& b) { return !(a.e == b.e); }
  // Graded-lex: by total degree, then lex on exponents. Any fixed total
  // order works for canonical form; graded makes truncation scans easy.
  friend bool operator<(const Mono& a, const Mono& b);

  size_t hash() const {
    uint64_t h = 0xcbf29ce484222325ull;
    for (auto v : e) h = (h ^ v) * 0x100000001b3ull;
    return size_t(h);
  }
};

struct MonoHash {
  size_t operator()(const Mono& m) const { return m.hash(); }
};

struct Term {
  Mono m;
  Rational c;
};

// Invariant: terms sorted ascending by Mono order, no zero coefficients,
// no duplicate monomials.
class SPoly {
public:
  SPoly() = default;
  explicit SPoly(Rational c) {
    if (!c.is_zero()) terms_.push_back({Mono::one(), std::move(c)});
  }
  static SPoly variable(int i) {
    SPoly p;
    p.terms_.push_back({Mono::var(i), Rational(1)});
    return p;
  }
  static SPoly from_terms(std::vector<Term> t);  // canonicalizes

  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && terms_[0].m.is_one());
  }
  Rational constant_value() const {
    return terms_.empty() ? Rational(0) : terms_[0].c;
  }
  size_t size() const { return terms_.size(); }
  int total_degree() const;
  int degree_in(int lo, int hi) const;

  friend SPoly operator+(const SPoly& a, const SPoly& b);
  friend SPoly operator-(const SPoly& a, const SPoly& b);
  SPoly operator-() const;
  friend SPoly operator*(const SPoly& a, const SPoly& b);
  SPoly& operator+=(const SPoly& o) { *this = *this + o; return *this; }
  SPoly& operator-=(const SPoly& o) { *this = *this - o; return *this; }

  SPoly scaled(const Rational& c) const;
  SPoly mul_mono(const Mono& m, const Rational& c) const;

  // Product with truncation: drops any result monomial for which
  // keep(mono) is false. Dispatches serial/OpenMP per exec_mode().
  static SPoly mul_filtered(const SPoly& a, const SPoly& b,
                            const std::function<bool(const Mono&)>& keep);
  static SPoly mul_filtered_serial(const SPoly& a, const SPoly& b,
                                   const std::function<bool(const Mono&)>& keep);
  static SPoly mul_filtered_parallel(const SPoly& a, const SPoly& b,
                                     const std::function<bool(const Mono&)>& keep);
  // Concrete truncation bounds (the hot path used by JetScalar).
  struct TruncSpec {
    int group_lo = 0, group_hi = 0, Dx = 1 << 20;
    int hvar = -1, Nh = 1 << 20;
    bool keep(const Mono& m) const {
      return m.deg(group_lo, group_hi) <= Dx &&
             (hvar < 0 || m.e[size_t(hvar)] <= Nh);
    }
  };
  static SPoly mul_truncated(const SPoly& a, const SPoly& b, const TruncSpec& spec);
  SPoly filter_spec(const TruncSpec& spec) const;

  SPoly derivative(int var) const;
  // Substitute polynomials for variables: vars[i] == nullptr keeps x_i.
  // keep() truncates intermediate products.
  SPoly substitute(const std::vector<const SPoly*>& vars,
                   const std::function<bool(const Mono&)>& keep) const;
  // Evaluate some variables at rational points (others must not occur).
  Rational evaluate(const std::vector<Rational>& point) const;
  // Partial evaluation of variables [lo,hi) at the given values.
  SPoly evaluate_range(int lo, const std::vector<Rational>& vals) const;
  // Drop all terms with deg over [lo,hi) exceeding bound.
  SPoly truncate_range(int lo, int hi, int bound) const;

  // Exact division test: if d divides *this exactly, set q and return true.
  bool div_exact(const SPoly& d, SPoly& q) const;
  // Rational content (gcd of coefficients, sign of leading term).
  Rational content() const;

  friend bool operator==(const SPoly& a, const SPoly& b) {
    if (a.terms_.size() != b.terms_.size()) return false;
    for (size_t i = 0; i < a.terms_.size(); ++i)
      if (a.terms_[i].m != b.terms_[i].m || a.terms_[i].c != b.terms_[i].c) return false;
    return true;
  }
  friend bool operator!=(const SPoly& a, const SPoly& b) { return !(a == b); }
  // Total order for canonical containers (compares term lists).
  static int cmp(const SPoly& a, const SPoly& b);

  std::string to_string(const std::vector<std::string>& names) const;
  size_t hash() const;

private:
  std::vector<Term> terms_;
};

SPoly spoly_pow(const SPoly& base, int e, const std::function<bool(const Mono&)>& keep);

}  // namespace dyt
