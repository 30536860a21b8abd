#include "dyt/lie.hpp"

#include <algorithm>

namespace dyt {

LieAlgebraData LieAlgebraData::make(int n, std::vector<std::string> names) {
  LieAlgebraData L;
  L.n = n;
  L.basis_names = std::move(names);
  while (int(L.basis_names.size()) < n)
    L.basis_names.push_back("e" + std::to_string(L.basis_names.size() + 1));
  L.c.assign(size_t(n) * size_t(n) * size_t(n), Rational(0));
  return L;
}

LieAlgebraData LieAlgebraData::so3() {
  LieAlgebraData L = make(3, {"e1", "e2", "e3"});
  L.set_bracket(0, 1, 2, Rational(1));
  L.set_bracket(1, 2, 0, Rational(1));
  L.set_bracket(2, 0, 1, Rational(1));
  return L;
}

LieAlgebraData LieAlgebraData::sl2() {
  LieAlgebraData L = make(3, {"h", "e", "f"});
  L.set_bracket(0, 1, 1, Rational(2));   // [h,e] = 2e
  L.set_bracket(0, 2, 2, Rational(-2));  // [h,f] = -2f
  L.set_bracket(1, 2, 0, Rational(1));   // [e,f] = h
  return L;
}

LieAlgebraData LieAlgebraData::abelian(int n) { return make(n, {}); }

JacobiReport LieAlgebraData::jacobi_check() const {
  JacobiReport rep;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        if (c3(k, i, j) != -c3(k, j, i)) {
          rep.ok = false;
          rep.antisymmetry = false;
          rep.witness = {i, j, 0, 0};
          rep.message = "antisymmetry fails at basis pair (" + std::to_string(i + 1) +
                        "," + std::to_string(j + 1) + ")";
          return rep;
        }
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int k = j + 1; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
          Rational s(0);
          for (int m = 0; m < n; ++m) {
            s += c3(m, i, j) * c3(l, m, k);
            s += c3(m, j, k) * c3(l, m, i);
            s += c3(m, k, i) * c3(l, m, j);
          }
          if (!s.is_zero()) {
            rep.ok = false;
            rep.witness = {i, j, k, l};
            rep.message = "Jacobi fails at (" + std::to_string(i + 1) + "," +
                          std::to_string(j + 1) + "," + std::to_string(k + 1) + ";" +
                          std::to_string(l + 1) + ")";
            return rep;
          }
        }
      }
    }
  }
  return rep;
}

bool LieAlgebraData::subalgebra_closed(const std::vector<int>& idx) const {
  auto inside = [&](int k) { return std::find(idx.begin(), idx.end(), k) != idx.end(); };
  for (int i : idx)
    for (int j : idx)
      for (int k = 0; k < n; ++k)
        if (!c3(k, i, j).is_zero() && !inside(k)) return false;
  return true;
}

bool LieAlgebraData::splitting_reductive() const {
  auto in_m = [&](int k) {
    return std::find(comp_m.begin(), comp_m.end(), k) != comp_m.end();
  };
  for (int i : sub_h)
    for (int j : comp_m)
      for (int k = 0; k < n; ++k)
        if (!c3(k, i, j).is_zero() && !in_m(k)) return false;
  return true;
}

bool LieAlgebraData::is_abelian_on(const std::vector<int>& idx) const {
  for (int i : idx)
    for (int j : idx)
      for (int k = 0; k < n; ++k)
        if (!c3(k, i, j).is_zero()) return false;
  return true;
}

LieAlgebraData LieAlgebraData::restricted(const std::vector<int>& idx,
                                          std::vector<int> new_sub_h,
                                          std::vector<int> new_comp_m) const {
  std::vector<std::string> names;
  for (int i : idx) names.push_back(basis_names[size_t(i)]);
  LieAlgebraData R = make(int(idx.size()), names);
  std::map<int, int> pos;
  for (size_t a = 0; a < idx.size(); ++a) pos[idx[a]] = int(a);
  for (size_t a = 0; a < idx.size(); ++a) {
    for (size_t b = 0; b < idx.size(); ++b) {
      for (int k = 0; k < n; ++k) {
        const Rational& v = c3(k, idx[a], idx[b]);
        if (v.is_zero()) continue;
        auto it = pos.find(k);
        if (it == pos.end())
          throw InputInvalid("restricted: subset is not a subalgebra");
        R.c[size_t((it->second * R.n + int(a)) * R.n + int(b))] = v;
      }
    }
  }
  R.sub_h = std::move(new_sub_h);
  R.comp_m = std::move(new_comp_m);
  return R;
}

void WedgePoly::add_term(std::vector<int> idx, JetScalar coeff) {
  if (int(idx.size()) != degree_) throw InternalError("WedgePoly: degree mismatch");
  if (coeff.is_zero()) return;
  // Signed insertion sort; repeated index kills the term.
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

WedgePoly WedgePoly::basis_vector(const JetContext* ctx, const LieAlgebraData* L, int i) {
  WedgePoly w(ctx, L, 1);
  w.add_term({i}, JetScalar::one(ctx));
  return w;
}

WedgePoly operator+(const WedgePoly& a, const WedgePoly& b) {
  if (a.terms_.empty()) return b;
  if (b.terms_.empty()) return a;
  if (a.degree_ != b.degree_) throw InternalError("WedgePoly: adding mixed degrees");
  WedgePoly r = a;
  for (auto& kv : b.terms_) r.add_term(kv.first, kv.second);
  return r;
}

WedgePoly WedgePoly::operator-() const {
  WedgePoly r = *this;
  for (auto& kv : r.terms_) kv.second = -kv.second;
  return r;
}

WedgePoly operator-(const WedgePoly& a, const WedgePoly& b) { return a + (-b); }

WedgePoly WedgePoly::scaled(const JetScalar& c) const {
  WedgePoly r(ctx_, L_, degree_);
  for (auto& kv : terms_) r.add_term(kv.first, kv.second * c);
  return r;
}

WedgePoly WedgePoly::wedge(const WedgePoly& a, const WedgePoly& b) {
  WedgePoly r(a.ctx_ ? a.ctx_ : b.ctx_, a.L_ ? a.L_ : b.L_, a.degree_ + b.degree_);
  for (auto& ta : a.terms_) {
    for (auto& tb : b.terms_) {
      std::vector<int> idx = ta.first;
      idx.insert(idx.end(), tb.first.begin(), tb.first.end());
      r.add_term(std::move(idx), ta.second * tb.second);
    }
  }
  return r;
}

WedgePoly WedgePoly::schouten(const WedgePoly& a, const WedgePoly& b) {
  const JetContext* ctx = a.ctx_ ? a.ctx_ : b.ctx_;
  const LieAlgebraData* L = a.L_ ? a.L_ : b.L_;
  WedgePoly r(ctx, L, a.degree_ + b.degree_ - 1);
  if (a.degree_ == 0 || b.degree_ == 0) return r;  // coefficients are parameters
  for (auto& ta : a.terms_) {
    for (auto& tb : b.terms_) {
      JetScalar coeff = ta.second * tb.second;
      if (coeff.is_zero()) continue;
      for (size_t k = 0; k < ta.first.size(); ++k) {
        for (size_t l = 0; l < tb.first.size(); ++l) {
          int sgn = ((k + 1 + l + 1) % 2 == 0) ? 1 : -1;
          // [x_k, y_l] = sum_m c^m
          for (int m = 0; m < L->n; ++m) {
            const Rational& s = L->c3(m, ta.first[k], tb.first[l]);
            if (s.is_zero()) continue;
            std::vector<int> idx;
            idx.reserve(ta.first.size() + tb.first.size() - 1);
            idx.push_back(m);
            for (size_t t = 0; t < ta.first.size(); ++t)
              if (t != k) idx.push_back(ta.first[t]);
            for (size_t t = 0; t < tb.first.size(); ++t)
              if (t != l) idx.push_back(tb.first[t]);
            r.add_term(std::move(idx), coeff.scaled(sgn < 0 ? -s : s));
          }
        }
      }
    }
  }
  return r;
}

WedgePoly WedgePoly::derivative_base(int var) const {
  WedgePoly r(ctx_, L_, degree_);
  for (auto& kv : terms_) r.add_term(kv.first, kv.second.derivative(var));
  return r;
}

bool WedgePoly::is_zero_upto(int through) const {
  for (auto& kv : terms_)
    if (!kv.second.is_zero_upto(through)) return false;
  return true;
}

bool WedgePoly::equals_upto(const WedgePoly& o, int through) const {
  return (*this - o).is_zero_upto(through);
}

std::string WedgePoly::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (auto& kv : terms_) {
    if (!out.empty()) out += " + ";
    out += "[" + kv.second.to_string() + "]";
    for (size_t i = 0; i < kv.first.size(); ++i) {
      out += (i ? "^" : " ");
      out += L_->basis_names[size_t(kv.first[i])];
    }
  }
  return out;
}

bool invariance_check(const WedgePoly& Z) {
  for (int i = 0; i < Z.lie()->n; ++i) {
    WedgePoly x = WedgePoly::basis_vector(Z.ctx(), Z.lie(), i);
    if (!WedgePoly::schouten(x, Z).is_zero_upto()) return false;
  }
  return true;
}

}  // namespace dyt
