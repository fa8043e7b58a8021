#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "divergence/error.hpp"
#include "divergence/rational.hpp"

namespace divergence {

// Univariate polynomial, coefficient index = degree. Trailing zeros are
// trimmed so that degree() is the true degree.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<Rational> coeffs) : c_(std::move(coeffs)) { trim(); }

  static Polynomial constant(const Rational& v) { return Polynomial({v}); }
  static Polynomial from_ints(const std::vector<long>& coeffs) {
    std::vector<Rational> c;
    for (long v : coeffs) c.emplace_back(v);
    return Polynomial(std::move(c));
  }

  const std::vector<Rational>& coeffs() const { return c_; }
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_constant() const { return c_.size() <= 1; }
  Rational coeff(int i) const { return i >= 0 && i < static_cast<int>(c_.size()) ? c_[i] : Rational(0); }
  Rational leading() const { return c_.empty() ? Rational(0) : c_.back(); }

  template <typename T>
  Rational operator()(const T& x) const {
    Rational v(0), xr(x);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) v = v * xr + *it;
    return v;
  }

  bool non_negative_coeffs() const {
    for (const auto& v : c_)
      if (v < 0) return false;
    return true;
  }

  // Non-negative coefficients, positive constant term.
  bool is_positive() const { return !c_.empty() && non_negative_coeffs() && c_[0] > 0; }

  bool integral() const {
    for (const auto& v : c_)
      if (v.get_den() != 1) return false;
    return true;
  }

  bool operator==(const Polynomial&) const = default;

  Polynomial operator+(const Polynomial& o) const {
    std::vector<Rational> r(std::max(c_.size(), o.c_.size()), Rational(0));
    for (std::size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
    for (std::size_t i = 0; i < o.c_.size(); ++i) r[i] += o.c_[i];
    return Polynomial(std::move(r));
  }

  Polynomial operator-(const Polynomial& o) const {
    std::vector<Rational> r(std::max(c_.size(), o.c_.size()), Rational(0));
    for (std::size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
    for (std::size_t i = 0; i < o.c_.size(); ++i) r[i] -= o.c_[i];
    return Polynomial(std::move(r));
  }

  Polynomial operator*(const Polynomial& o) const {
    if (c_.empty() || o.c_.empty()) return Polynomial();
    std::vector<Rational> r(c_.size() + o.c_.size() - 1, Rational(0));
    for (std::size_t i = 0; i < c_.size(); ++i)
      for (std::size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
    return Polynomial(std::move(r));
  }

  Polynomial scaled(const Rational& k) const {
    std::vector<Rational> r = c_;
    for (auto& v : r) v *= k;
    return Polynomial(std::move(r));
  }

  std::string str() const {
    std::string s;
    for (int i = degree(); i >= 0; --i) {
      if (c_[i] == 0) continue;
      if (!s.empty()) s += " + ";
      s += c_[i].get_str();
      if (i >= 1) s += "*n";
      if (i >= 2) s += "^" + std::to_string(i);
    }
    return s.empty() ? "0" : s;
  }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }
  std::vector<Rational> c_;
};

// Every real root of p lies in |x| < 1 + max |c_i / c_d|; returns an integer
// beyond which p has the sign of its leading coefficient.
inline Integer cauchy_root_bound(const Polynomial& p) {
  if (p.degree() <= 0) return Integer(0);
  Rational m(0);
  Rational lead = abs(p.leading());
  for (int i = 0; i < p.degree(); ++i) {
    Rational r = abs(p.coeff(i)) / lead;
    if (r > m) m = r;
  }
  return ceil_int(m) + 1;
}

// Smallest n >= lo with p(n') >= 0 for every integer n' >= n. Requires a
// positive leading coefficient (or a non-negative constant).
inline Integer eventual_nonneg_start(const Polynomial& p, const Integer& lo) {
  if (p.degree() < 0) return lo;
  if (p.leading() < 0) throw Error(ErrorCode::PreconditionViolated, "polynomial is eventually negative");
  Integer n = cauchy_root_bound(p);
  if (n < lo) n = lo;
  while (n > lo && p(Integer(n - 1)) >= 0) n -= 1;
  return n;
}

// Sparse multivariate polynomial over place markings: exponent vector ->
// coefficient.
class MultiPolynomial {
 public:
  using Exponents = std::vector<std::uint32_t>;

  MultiPolynomial() = default;
  MultiPolynomial(std::size_t vars, std::map<Exponents, Rational> terms) : vars_(vars) {
    for (auto& [e, c] : terms) {
      if (e.size() != vars) throw Error(ErrorCode::ValidationError, "exponent vector has wrong length");
      if (c != 0) terms_[e] = c;
    }
  }
  static MultiPolynomial constant(std::size_t vars, const Rational& v) {
    return MultiPolynomial(vars, {{Exponents(vars, 0), v}});
  }

  std::size_t vars() const { return vars_; }
  const std::map<Exponents, Rational>& terms() const { return terms_; }

  bool is_constant() const {
    for (const auto& [e, c] : terms_)
      for (auto x : e)
        if (x) return false;
    return true;
  }

  bool is_positive() const {
    bool has_const = false;
    for (const auto& [e, c] : terms_) {
      if (c < 0) return false;
      bool zero = true;
      for (auto x : e) zero &= (x == 0);
      if (zero && c > 0) has_const = true;
    }
    return has_const;
  }

  Rational operator()(const std::vector<std::uint64_t>& point) const {
    if (point.size() != vars_) throw Error(ErrorCode::ValidationError, "marking has wrong dimension");
    Rational v(0);
    for (const auto& [e, c] : terms_) {
      Integer t(1);
      for (std::size_t i = 0; i < vars_; ++i) {
        if (!e[i]) continue;
        Integer b;
        mpz_ui_pow_ui(b.get_mpz_t(), point[i], e[i]);
        t *= b;
      }
      v += c * Rational(t);
    }
    return v;
  }

  MultiPolynomial scaled(const Rational& k) const {
    MultiPolynomial r = *this;
    for (auto& [e, c] : r.terms_) c *= k;
    return r;
  }

  bool operator==(const MultiPolynomial&) const = default;

 private:
  std::size_t vars_ = 0;
  std::map<Exponents, Rational> terms_;
};

}  // namespace divergence
