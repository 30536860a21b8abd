// Coefficient ring of the whole workbench: exact rational functions in the
// base variables tensored with truncated power series in the group-jet
// variables and a truncated polynomial in hbar.
//
// A JetScalar is stored as num / prod(factor_i ^ e_i) where num is a sparse
// polynomial in (base, group, hbar) and every denominator factor is a
// primitive polynomial in the base variables only. Denominators are kept
// factored (they arise as powers of determinants), so gcd reduction is a
// sequence of exact trial divisions rather than a multivariate gcd.
//
// The watermark records the group-jet order up to which the value is exact;
// consuming a group derivative lowers it by one.

#pragma once

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "dyt/errors.hpp"
#include "dyt/poly.hpp"

namespace dyt {

struct JetContext {
  int n_base = 0;    // variables 0 .. n_base-1 (rational functions allowed)
  int n_group = 0;   // variables n_base .. n_base+n_group-1 (series, truncated)
  int Dx = 0;        // group-jet truncation order
  int Nh = 0;        // hbar truncation order
  std::vector<Rational> base_point;     // size n_base
  std::vector<std::string> var_names;   // size n_vars()

  int n_vars() const { return n_base + n_group + 1; }
  int hbar_index() const { return n_base + n_group; }
  int group_lo() const { return n_base; }
  int group_hi() const { return n_base + n_group; }

  bool keep_mono(const Mono& m) const {
    return m.deg(group_lo(), group_hi()) <= Dx && m.e[size_t(hbar_index())] <= Nh;
  }
  std::function<bool(const Mono&)> keeper() const {
    return [this](const Mono& m) { return keep_mono(m); };
  }

  static JetContext make(int n_base, int n_group, int Dx, int Nh,
                         std::vector<Rational> base_point,
                         std::vector<std::string> base_names = {},
                         std::vector<std::string> group_names = {});
};

// One denominator factor: primitive, positive leading coefficient, base
// variables only.
struct DenFactor {
  SPoly poly;
  int exp = 0;
};

class JetScalar {
public:
  JetScalar() = default;
  JetScalar(const JetContext* ctx, Rational c)
      : ctx_(ctx), num_(std::move(c)), watermark_(ctx->Dx) {}
  JetScalar(const JetContext* ctx, SPoly num, int watermark = -1)
      : ctx_(ctx), num_(std::move(num)),
        watermark_(watermark < 0 ? ctx->Dx : watermark) {}

  static JetScalar zero(const JetContext* ctx) { return JetScalar(ctx, Rational(0)); }
  static JetScalar one(const JetContext* ctx) { return JetScalar(ctx, Rational(1)); }
  static JetScalar variable(const JetContext* ctx, int v) {
    return JetScalar(ctx, SPoly::variable(v));
  }
  static JetScalar hbar(const JetContext* ctx) {
    return variable(ctx, ctx->hbar_index());
  }
  // num / den with den a base-only polynomial.
  static JetScalar fraction(const JetContext* ctx, SPoly num, SPoly den);

  const JetContext* ctx() const { return ctx_; }
  const SPoly& num() const { return num_; }
  const std::vector<DenFactor>& den_factors() const { return den_; }
  int watermark() const { return watermark_; }
  JetScalar with_watermark(int w) const {
    JetScalar r = *this;
    r.watermark_ = std::min(w, ctx_->Dx);
    return r;
  }

  bool is_zero() const { return num_.is_zero(); }
  // True if every monomial of group-degree <= min(watermark, through) vanishes.
  bool is_zero_upto(int through = std::numeric_limits<int>::max()) const;
  bool is_base_only() const;    // no group variables, no hbar
  bool is_hbar_free() const;
  // Terms of num with zero (group, hbar) degree, same denominator/watermark.
  JetScalar base_part() const;
  // Terms with zero group degree (hbar kept): the restriction to x = 0.
  JetScalar at_group_zero() const;
  bool has_denominator() const { return !den_.empty(); }

  friend JetScalar operator+(const JetScalar& a, const JetScalar& b);
  friend JetScalar operator-(const JetScalar& a, const JetScalar& b);
  friend JetScalar operator*(const JetScalar& a, const JetScalar& b);
  friend JetScalar operator/(const JetScalar& a, const JetScalar& b);
  JetScalar operator-() const;
  JetScalar& operator+=(const JetScalar& o) { *this = *this + o; return *this; }
  JetScalar& operator-=(const JetScalar& o) { *this = *this - o; return *this; }
  JetScalar& operator*=(const JetScalar& o) { *this = *this * o; return *this; }

  JetScalar scaled(const Rational& c) const;
  JetScalar mul_hbar(int k = 1) const;       // multiply by hbar^k (truncating)
  JetScalar div_hbar() const;                // exact; throws if not divisible
  JetScalar truncate_hbar(int maxpow) const;
  JetScalar hbar_coefficient(int k) const;   // coefficient of hbar^k (hbar-free)
  int hbar_degree() const;

  JetScalar derivative(int var) const;       // base: quotient rule; group: wm-1

  // Substitute a subset of variables (polynomial values, shared context).
  // values[v] == nullptr keeps variable v. Throws if a denominator factor
  // involves a substituted variable.
  JetScalar substitute(const std::vector<const JetScalar*>& values) const;

  // Move the value to another context along an injective variable map
  // (varmap[old_var] = new_var for the non-hbar variables; hbar follows).
  JetScalar remap(const JetContext* to, const std::vector<int>& varmap) const;

  // lambda := base_point, x := 0; returns coefficients of hbar^0..hbar^Nh.
  std::vector<Rational> evaluate_at_base(bool normalize_first = true) const;

  void normalize();                          // cancel factors into num
  // Cheap partial reduction: cancels monomial denominator factors against
  // the numerator content (no polynomial division). Called automatically by
  // the arithmetic to keep base-variable degrees bounded.
  void reduce_monomial_factors();
  JetScalar normalized() const {
    JetScalar r = *this;
    r.normalize();
    return r;
  }
  // Drop num terms of group-degree above the watermark (sound: they are not
  // trusted anyway). Keeps values compact deep in pipelines.
  void trim_to_watermark();

  bool equals_upto(const JetScalar& o, int through = std::numeric_limits<int>::max()) const {
    return (*this - o).is_zero_upto(through);
  }

  std::string to_string() const;
  // Deterministic structural key (used for canonical report output).
  std::string canonical_key() const;

private:
  const JetContext* ctx_ = nullptr;
  SPoly num_;
  std::vector<DenFactor> den_;
  int watermark_ = 0;

  void push_den_factor(SPoly f, int e);  // content-normalizes, folds into num
  SPoly den_expanded() const;
  static void align(const JetScalar& a, const JetScalar& b, SPoly& na, SPoly& nb,
                    std::vector<DenFactor>& den);
  friend class JetBuilder;
};

using JetMatrix = std::vector<std::vector<JetScalar>>;

// coeff-core public operation names (thin wrappers used by the CLI layer).
enum class ScalarOp { Add, Sub, Mul, Div };
JetScalar scalar_arith(const JetScalar& a, const JetScalar& b, ScalarOp op);

}  // namespace dyt
