// Arbitrary-precision signed integers and rationals.
//
// BigInt keeps values in a plain int64 fast path and promotes to a shared
// immutable limb vector only on overflow, so the bulk of the arithmetic in
// the jet kernels never allocates. All operations are exact.

#pragma once

#include <cstdint>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

namespace dyt {

struct BigRep {
  int sign = 0;                 // -1 or +1, never 0
  std::vector<uint32_t> mag;    // little-endian base 2^32, no leading zeros
};

class BigInt {
public:
  BigInt() = default;
  BigInt(int v) : s_(v) {}
  BigInt(long v) : s_(v) {}
  BigInt(long long v) : s_(v) {}
  explicit BigInt(const std::string& decimal);

  bool is_small() const { return !big_; }
  bool is_zero() const { return !big_ && s_ == 0; }
  bool is_one() const { return !big_ && s_ == 1; }
  int sign() const;
  int64_t small_value() const { return s_; }  // valid only if is_small()

  friend BigInt operator+(const BigInt& a, const BigInt& b);
  friend BigInt operator-(const BigInt& a, const BigInt& b);
  friend BigInt operator*(const BigInt& a, const BigInt& b);
  BigInt operator-() const;

  // Truncated division (C semantics): a = q*b + r with |r| < |b|, sign(r)=sign(a).
  static void divmod(const BigInt& a, const BigInt& b, BigInt& q, BigInt& r);
  friend BigInt operator/(const BigInt& a, const BigInt& b);
  friend BigInt operator%(const BigInt& a, const BigInt& b);

  static BigInt gcd(BigInt a, BigInt b);  // result >= 0
  BigInt pow(uint32_t e) const;

  static int cmp(const BigInt& a, const BigInt& b);
  friend bool operator==(const BigInt& a, const BigInt& b) { return cmp(a, b) == 0; }
  friend bool operator!=(const BigInt& a, const BigInt& b) { return cmp(a, b) != 0; }
  friend bool operator<(const BigInt& a, const BigInt& b) { return cmp(a, b) < 0; }
  friend bool operator>(const BigInt& a, const BigInt& b) { return cmp(a, b) > 0; }
  friend bool operator<=(const BigInt& a, const BigInt& b) { return cmp(a, b) <= 0; }
  friend bool operator>=(const BigInt& a, const BigInt& b) { return cmp(a, b) >= 0; }

  std::string to_string() const;
  size_t hash() const;

private:
  int64_t s_ = 0;
  std::shared_ptr<const BigRep> big_;

  static BigInt from_rep(int sign, std::vector<uint32_t> mag);
  std::vector<uint32_t> magnitude() const;  // copies small into limbs
  friend struct BigOps;
};

// Exact rational number, always normalized: den > 0, gcd(num, den) = 1.
class Rational {
public:
  Rational() : num_(0), den_(1) {}
  Rational(int v) : num_(v), den_(1) {}
  Rational(long long v) : num_(v), den_(1) {}
  Rational(BigInt n) : num_(std::move(n)), den_(1) {}
  Rational(BigInt n, BigInt d);
  // Parses "p", "-p", "p/q".
  static Rational parse(const std::string& text);

  const BigInt& num() const { return num_; }
  const BigInt& den() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }
  bool is_one() const { return num_.is_one() && den_.is_one(); }
  bool is_integer() const { return den_.is_one(); }
  int sign() const { return num_.sign(); }

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);  // b != 0
  Rational operator-() const;
  Rational inv() const;  // *this != 0
  Rational pow(int e) const;

  Rational& operator+=(const Rational& o) { *this = *this + o; return *this; }
  Rational& operator-=(const Rational& o) { *this = *this - o; return *this; }
  Rational& operator*=(const Rational& o) { *this = *this * o; return *this; }
  Rational& operator/=(const Rational& o) { *this = *this / o; return *this; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  static int cmp(const Rational& a, const Rational& b);
  friend bool operator<(const Rational& a, const Rational& b) { return cmp(a, b) < 0; }

  std::string to_string() const;  // "p" or "p/q"
  size_t hash() const;

private:
  BigInt num_, den_;
  void normalize();
};

// Deterministic RNG for the randomized batteries (splitmix64).
class Rng {
public:
  explicit Rng(uint64_t seed) : state_(seed) {}
  uint64_t next();
  // Uniform in [lo, hi] inclusive.
  int64_t range(int64_t lo, int64_t hi);
  // Small random rational with numerator in [-bound, bound], denominator in [1, dbound].
  Rational rational(int64_t bound, int64_t dbound);

private:
  uint64_t state_;
};

}  // namespace dyt
