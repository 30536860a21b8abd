#include "dyt/bigint.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

namespace dyt {

namespace {

constexpr uint64_t kBase = uint64_t(1) << 32;

void trim(std::vector<uint32_t>& m) {
  while (!m.empty() && m.back() == 0) m.pop_back();
}

int cmp_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  for (size_t i = a.size(); i-- > 0;) {
    if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
  }
  return 0;
}

std::vector<uint32_t> add_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
  const std::vector<uint32_t>* x = &a;
  const std::vector<uint32_t>* y = &b;
  if (x->size() < y->size()) std::swap(x, y);
  std::vector<uint32_t> r(x->size() + 1, 0);
  uint64_t carry = 0;
  for (size_t i = 0; i < x->size(); ++i) {
    uint64_t t = carry + (*x)[i] + (i < y->size() ? (*y)[i] : 0);
    r[i] = uint32_t(t);
    carry = t >> 32;
  }
  r[x->size()] = uint32_t(carry);
  trim(r);
  return r;
}

// a - b, requires |a| >= |b|.
std::vector<uint32_t> sub_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
  std::vector<uint32_t> r(a.size(), 0);
  int64_t borrow = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    int64_t t = int64_t(a[i]) - borrow - (i < b.size() ? int64_t(b[i]) : 0);
    if (t < 0) {
      t += int64_t(kBase);
      borrow = 1;
    } else {
      borrow = 0;
    }
    r[i] = uint32_t(t);
  }
  trim(r);
  return r;
}

std::vector<uint32_t> mul_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
  if (a.empty() || b.empty()) return {};
  std::vector<uint32_t> r(a.size() + b.size(), 0);
  for (size_t i = 0; i < a.size(); ++i) {
    uint64_t carry = 0;
    uint64_t ai = a[i];
    for (size_t j = 0; j < b.size(); ++j) {
      uint64_t t = uint64_t(r[i + j]) + ai * b[j] + carry;
      r[i + j] = uint32_t(t);
      carry = t >> 32;
    }
    size_t k = i + b.size();
    while (carry) {
      uint64_t t = uint64_t(r[k]) + carry;
      r[k] = uint32_t(t);
      carry = t >> 32;
      ++k;
    }
  }
  trim(r);
  return r;
}

std::vector<uint32_t> shl_mag(const std::vector<uint32_t>& a, unsigned bits) {
  if (a.empty()) return {};
  unsigned words = bits / 32, rem = bits % 32;
  std::vector<uint32_t> r(a.size() + words + 1, 0);
  for (size_t i = 0; i < a.size(); ++i) {
    uint64_t t = uint64_t(a[i]) << rem;
    r[i + words] |= uint32_t(t);
    r[i + words + 1] |= uint32_t(t >> 32);
  }
  trim(r);
  return r;
}

// Knuth-style long division on 32-bit limbs via 64-bit arithmetic.
void divmod_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b,
                std::vector<uint32_t>& q, std::vector<uint32_t>& r) {
  if (b.empty()) throw std::domain_error("BigInt: division by zero");
  q.clear();
  r.clear();
  if (cmp_mag(a, b) < 0) {
    r = a;
    return;
  }
  if (b.size() == 1) {
    uint64_t d = b[0];
    q.assign(a.size(), 0);
    uint64_t rem = 0;
    for (size_t i = a.size(); i-- > 0;) {
      uint64_t cur = (rem << 32) | a[i];
      q[i] = uint32_t(cur / d);
      rem = cur % d;
    }
    trim(q);
    if (rem) r.push_back(uint32_t(rem));
    return;
  }
  // Normalize so the divisor's top limb has its high bit set.
  unsigned shift = 0;
  for (uint32_t top = b.back(); !(top & 0x80000000u); top <<= 1) ++shift;
  std::vector<uint32_t> u = shl_mag(a, shift);
  std::vector<uint32_t> v = shl_mag(b, shift);
  size_t n = v.size(), m = u.size() - n;
  u.resize(u.size() + 1, 0);
  q.assign(m + 1, 0);
  uint64_t vtop = v[n - 1], vsec = v[n - 2];
  for (size_t j = m + 1; j-- > 0;) {
    uint64_t num = (uint64_t(u[j + n]) << 32) | u[j + n - 1];
    uint64_t qhat = num / vtop, rhat = num % vtop;
    while (qhat >= kBase || qhat * vsec > ((rhat << 32) | u[j + n - 2])) {
      --qhat;
      rhat += vtop;
      if (rhat >= kBase) break;
    }
    // u[j..j+n] -= qhat * v
    int64_t borrow = 0;
    uint64_t carry = 0;
    for (size_t i = 0; i < n; ++i) {
      uint64_t p = qhat * v[i] + carry;
      carry = p >> 32;
      int64_t t = int64_t(u[i + j]) - borrow - int64_t(uint32_t(p));
      if (t < 0) {
        t += int64_t(kBase);
        borrow = 1;
      } else {
        borrow = 0;
      }
      u[i + j] = uint32_t(t);
    }
    int64_t t = int64_t(u[j + n]) - borrow - int64_t(carry);
    if (t < 0) {
      // qhat was one too large; add v back.
      t += int64_t(kBase);
      --qhat;
      uint64_t c2 = 0;
      for (size_t i = 0; i < n; ++i) {
        uint64_t s = uint64_t(u[i + j]) + v[i] + c2;
        u[i + j] = uint32_t(s);
        c2 = s >> 32;
      }
      t += int64_t(c2);
    }
    u[j + n] = uint32_t(t);
    q[j] = uint32_t(qhat);
  }
  trim(q);
  u.resize(n);
  // Undo normalization shift.
  if (shift) {
    for (size_t i = 0; i < n; ++i) {
      uint64_t hi = (i + 1 < n) ? u[i + 1] : 0;
      u[i] = uint32_t((((hi << 32) | u[i]) >> shift));
    }
  }
  trim(u);
  r = std::move(u);
}

}  // namespace

BigInt BigInt::from_rep(int sign, std::vector<uint32_t> mag) {
  trim(mag);
  BigInt r;
  if (mag.empty()) return r;
  if (mag.size() <= 2) {
    uint64_t v = mag[0];
    if (mag.size() == 2) v |= uint64_t(mag[1]) << 32;
    if (v <= uint64_t(INT64_MAX)) {
      r.s_ = sign < 0 ? -int64_t(v) : int64_t(v);
      return r;
    }
  }
  auto rep = std::make_shared<BigRep>();
  rep->sign = sign;
  rep->mag = std::move(mag);
  r.big_ = std::move(rep);
  return r;
}

std::vector<uint32_t> BigInt::magnitude() const {
  if (big_) return big_->mag;
  uint64_t v = s_ < 0 ? uint64_t(-(s_ + 1)) + 1 : uint64_t(s_);
  std::vector<uint32_t> m;
  if (v) m.push_back(uint32_t(v));
  if (v >> 32) m.push_back(uint32_t(v >> 32));
  return m;
}

int BigInt::sign() const {
  if (big_) return big_->sign;
  return s_ < 0 ? -1 : (s_ > 0 ? 1 : 0);
}

BigInt::BigInt(const std::string& decimal) {
  size_t i = 0;
  int sg = 1;
  if (i < decimal.size() && (decimal[i] == '-' || decimal[i] == '+')) {
    if (decimal[i] == '-') sg = -1;
    ++i;
  }
  if (i >= decimal.size()) throw std::invalid_argument("BigInt: empty literal");
  BigInt acc;
  for (; i < decimal.size(); ++i) {
    char c = decimal[i];
    if (c < '0' || c > '9') throw std::invalid_argument("BigInt: bad digit in literal");
    acc = acc * BigInt(10) + BigInt(c - '0');
  }
  *this = sg < 0 ? -acc : acc;
}

BigInt BigInt::operator-() const {
  if (!big_) {
    if (s_ != INT64_MIN) {
      BigInt r;
      r.s_ = -s_;
      return r;
    }
    return from_rep(1, magnitude());
  }
  return from_rep(-big_->sign, big_->mag);
}

BigInt operator+(const BigInt& a, const BigInt& b) {
  if (a.is_small() && b.is_small()) {
    int64_t r;
    if (!__builtin_add_overflow(a.s_, b.s_, &r)) {
      BigInt out;
      out.s_ = r;
      return out;
    }
  }
  int sa = a.sign(), sb = b.sign();
  if (sa == 0) return b;
  if (sb == 0) return a;
  auto ma = a.magnitude(), mb = b.magnitude();
  if (sa == sb) return BigInt::from_rep(sa, add_mag(ma, mb));
  int c = cmp_mag(ma, mb);
  if (c == 0) return BigInt();
  if (c > 0) return BigInt::from_rep(sa, sub_mag(ma, mb));
  return BigInt::from_rep(sb, sub_mag(mb, ma));
}

BigInt operator-(const BigInt& a, const BigInt& b) { return a + (-b); }

BigInt operator*(const BigInt& a, const BigInt& b) {
  if (a.is_small() && b.is_small()) {
    __int128 p = __int128(a.s_) * b.s_;
    if (p >= INT64_MIN && p <= INT64_MAX) {
      BigInt out;
      out.s_ = int64_t(p);
      return out;
    }
  }
  int s = a.sign() * b.sign();
  if (s == 0) return BigInt();
  return BigInt::from_rep(s, mul_mag(a.magnitude(), b.magnitude()));
}

void BigInt::divmod(const BigInt& a, const BigInt& b, BigInt& q, BigInt& r) {
  if (b.is_zero()) throw std::domain_error("BigInt: division by zero");
  if (a.is_small() && b.is_small() && !(a.s_ == INT64_MIN && b.s_ == -1)) {
    q = BigInt();
    r = BigInt();
    q.s_ = a.s_ / b.s_;
    r.s_ = a.s_ % b.s_;
    return;
  }
  std::vector<uint32_t> qm, rm;
  divmod_mag(a.magnitude(), b.magnitude(), qm, rm);
  q = from_rep(a.sign() * b.sign(), std::move(qm));
  r = from_rep(a.sign(), std::move(rm));
}

BigInt operator/(const BigInt& a, const BigInt& b) {
  BigInt q, r;
  BigInt::divmod(a, b, q, r);
  return q;
}

BigInt operator%(const BigInt& a, const BigInt& b) {
  BigInt q, r;
  BigInt::divmod(a, b, q, r);
  return r;
}

BigInt BigInt::gcd(BigInt a, BigInt b) {
  if (a.sign() < 0) a = -a;
  if (b.sign() < 0) b = -b;
  if (a.is_small() && b.is_small()) {
    uint64_t x = uint64_t(a.s_), y = uint64_t(b.s_);
    while (y) {
      uint64_t t = x % y;
      x = y;
      y = t;
    }
    BigInt r;
    r.s_ = int64_t(x);
    return r;
  }
  while (!b.is_zero()) {
    BigInt q, r;
    divmod(a, b, q, r);
    a = b;
    b = r;
    if (a.is_small() && b.is_small()) return gcd(a, b);
  }
  return a;
}

BigInt BigInt::pow(uint32_t e) const {
  BigInt base = *this, acc = 1;
  while (e) {
    if (e & 1) acc = acc * base;
    base = base * base;
    e >>= 1;
  }
  return acc;
}

int BigInt::cmp(const BigInt& a, const BigInt& b) {
  if (a.is_small() && b.is_small()) return a.s_ < b.s_ ? -1 : (a.s_ > b.s_ ? 1 : 0);
  int sa = a.sign(), sb = b.sign();
  if (sa != sb) return sa < sb ? -1 : 1;
  int c = cmp_mag(a.magnitude(), b.magnitude());
  return sa >= 0 ? c : -c;
}

std::string BigInt::to_string() const {
  if (is_small()) return std::to_string(s_);
  std::string out;
  BigInt v = *this;
  bool neg = v.sign() < 0;
  if (neg) v = -v;
  BigInt ten(1000000000);
  std::vector<int64_t> chunks;
  while (!v.is_zero()) {
    BigInt q, r;
    divmod(v, ten, q, r);
    chunks.push_back(r.s_);
    v = q;
  }
  out = std::to_string(chunks.back());
  for (size_t i = chunks.size() - 1; i-- > 0;) {
    std::string part = std::to_string(chunks[i]);
    out += std::string(9 - part.size(), '0') + part;
  }
  return neg ? "-" + out : out;
}

size_t BigInt::hash() const {
  if (is_small()) {
    uint64_t x = uint64_t(s_) * 0x9e3779b97f4a7c15ull;
    return size_t(x ^ (x >> 31));
  }
  uint64_t h = big_->sign < 0 ? 0x5851f42d4c957f2dull : 0x14057b7ef767814full;
  for (uint32_t w : big_->mag) h = (h ^ w) * 0x100000001b3ull;
  return size_t(h);
}

Rational::Rational(BigInt n, BigInt d) : num_(std::move(n)), den_(std::move(d)) {
  if (den_.is_zero()) throw std::domain_error("Rational: zero denominator");
  normalize();
}

void Rational::normalize() {
  if (den_.sign() < 0) {
    num_ = -num_;
    den_ = -den_;
  }
  if (num_.is_zero()) {
    den_ = 1;
    return;
  }
  BigInt g = BigInt::gcd(num_, den_);
  if (!g.is_one()) {
    num_ = num_ / g;
    den_ = den_ / g;
  }
}

Rational Rational::parse(const std::string& text) {
  auto slash = text.find('/');
  if (slash == std::string::npos) return Rational(BigInt(text));
  return Rational(BigInt(text.substr(0, slash)), BigInt(text.substr(slash + 1)));
}

Rational operator+(const Rational& a, const Rational& b) {
  return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) {
  return Rational(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
}

Rational operator*(const Rational& a, const Rational& b) {
  return Rational(a.num_ * b.num_, a.den_ * b.den_);
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.is_zero()) throw std::domain_error("Rational: division by zero");
  return Rational(a.num_ * b.den_, a.den_ * b.num_);
}

Rational Rational::operator-() const {
  Rational r = *this;
  r.num_ = -r.num_;
  return r;
}

Rational Rational::inv() const {
  if (is_zero()) throw std::domain_error("Rational: inverse of zero");
  return Rational(den_, num_);
}

Rational Rational::pow(int e) const {
  if (e >= 0) return Rational(num_.pow(uint32_t(e)), den_.pow(uint32_t(e)));
  return inv().pow(-e);
}

int Rational::cmp(const Rational& a, const Rational& b) {
  return BigInt::cmp(a.num_ * b.den_, b.num_ * a.den_);
}

std::string Rational::to_string() const {
  if (den_.is_one()) return num_.to_string();
  return num_.to_string() + "/" + den_.to_string();
}

size_t Rational::hash() const {
  return num_.hash() * 0x9ddfea08eb382d69ull + den_.hash();
}

uint64_t Rng::next() {
  state_ += 0x9e3779b97f4a7c15ull;
  uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

int64_t Rng::range(int64_t lo, int64_t hi) {
  return lo + int64_t(next() % uint64_t(hi - lo + 1));
}

Rational Rng::rational(int64_t bound, int64_t dbound) {
  return Rational(BigInt(range(-bound, bound)), BigInt(range(1, dbound)));
}

}  // namespace dyt
