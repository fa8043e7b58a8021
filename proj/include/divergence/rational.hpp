#pragma once
//
// Exact rational arithmetic on top of GMP, plus the directed-rounding
// helpers (dyadic rounding, integer roots, rational powers, e^{-x} brackets)
// that the certified bound computations rely on.
//

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

#include "divergence/error.hpp"

namespace divergence {

using Integer = mpz_class;
using Rational = mpq_class;

inline Rational make_rational(long num, long den = 1) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

inline Rational make_rational(const Integer& num, const Integer& den) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

// Accepts "p/q", "-p/q" or a plain integer. Denominator must be positive.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto bad = [&] { return Error(ErrorCode::ParseError, "not a rational: '" + s + "'"); };
  if (s.empty()) throw bad();
  auto slash = s.find('/');
  auto digits_ok = [](std::string_view part, bool allow_sign) {
    if (part.empty()) return false;
    std::size_t i = 0;
    if (allow_sign && (part[0] == '-' || part[0] == '+')) i = 1;
    if (i == part.size()) return false;
    for (; i < part.size(); ++i)
      if (part[i] < '0' || part[i] > '9') return false;
    return true;
  };
  std::string num = s.substr(0, slash);
  std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
  if (!digits_ok(num, true) || !digits_ok(den, false)) throw bad();
  if (num[0] == '+') num.erase(0, 1);
  Integer n(num, 10), d(den, 10);
  if (d == 0) throw bad();
  return make_rational(n, d);
}

// Always "p/q", with q >= 1.
inline std::string to_string(const Rational& r) {
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

inline Integer floor_int(const Rational& r) {
  Integer q;
  mpz_fdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  return q;
}

inline Integer ceil_int(const Rational& r) {
  Integer q;
  mpz_cdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  return q;
}

inline Integer pow2(unsigned long bits) {
  Integer p;
  mpz_ui_pow_ui(p.get_mpz_t(), 2, bits);
  return p;
}

inline Integer pow10(unsigned long digits) {
  Integer p;
  mpz_ui_pow_ui(p.get_mpz_t(), 10, digits);
  return p;
}

inline Rational round_down_dyadic(const Rational& r, unsigned long bits) {
  return make_rational(floor_int(r * Rational(pow2(bits))), pow2(bits));
}

inline Rational round_up_dyadic(const Rational& r, unsigned long bits) {
  return make_rational(ceil_int(r * Rational(pow2(bits))), pow2(bits));
}

// Fixed-point decimal rendering, rounded toward -inf (down) or +inf (up).
inline std::string to_decimal(const Rational& r, unsigned digits, bool round_up) {
  Integer scale = pow10(digits);
  Integer scaled = round_up ? ceil_int(r * Rational(scale)) : floor_int(r * Rational(scale));
  bool negative = scaled < 0;
  if (negative) scaled = -scaled;
  std::string body = scaled.get_str();
  if (body.size() <= digits) body.insert(0, digits + 1 - body.size(), '0');
  std::string out = body.substr(0, body.size() - digits);
  if (digits > 0) out += "." + body.substr(body.size() - digits);
  return negative ? "-" + out : out;
}

inline Rational pow_int(const Rational& base, unsigned long exponent) {
  Rational out;
  mpz_pow_ui(out.get_num_mpz_t(), base.get_num_mpz_t(), exponent);
  mpz_pow_ui(out.get_den_mpz_t(), base.get_den_mpz_t(), exponent);
  if (out.get_den() < 0) {
    out.get_num() = -out.get_num();
    out.get_den() = -out.get_den();
  }
  return out;
}

inline Integer iroot_floor(const Integer& x, unsigned long k) {
  Integer r;
  mpz_root(r.get_mpz_t(), x.get_mpz_t(), k);
  return r;
}

inline Integer iroot_ceil(const Integer& x, unsigned long k) {
  Integer r;
  int exact = mpz_root(r.get_mpz_t(), x.get_mpz_t(), k);
  if (!exact) r += 1;
  return r;
}

// x^(p/q) for x >= 0 and a non-negative rational exponent, bracketed by
// dyadic rationals with `bits` fractional bits.
inline Rational pow_frac_down(const Rational& x, const Rational& exponent, unsigned long bits = 64) {
  if (x < 0 || exponent < 0)
    throw Error(ErrorCode::PreconditionViolated, "pow_frac_down needs x >= 0 and exponent >= 0");
  if (exponent == 0) return Rational(1);
  if (x == 0) return Rational(0);
  unsigned long p = exponent.get_num().get_ui();
  unsigned long q = exponent.get_den().get_ui();
  Rational xp = pow_int(x, p);
  Integer scaled = floor_int(xp * Rational(pow2(bits * q)));
  return make_rational(iroot_floor(scaled, q), pow2(bits));
}

inline Rational pow_frac_up(const Rational& x, const Rational& exponent, unsigned long bits = 64) {
  if (x < 0 || exponent < 0)
    throw Error(ErrorCode::PreconditionViolated, "pow_frac_up needs x >= 0 and exponent >= 0");
  if (exponent == 0) return Rational(1);
  if (x == 0) return Rational(0);
  unsigned long p = exponent.get_num().get_ui();
  unsigned long q = exponent.get_den().get_ui();
  Rational xp = pow_int(x, p);
  Integer scaled = ceil_int(xp * Rational(pow2(bits * q)));
  return make_rational(iroot_ceil(scaled, q), pow2(bits));
}

inline Rational sqrt_up(const Rational& x, unsigned long bits = 64) {
  return pow_frac_up(x, make_rational(1, 2), bits);
}

// ln 2 < 6931471805599454/10^16.
inline Rational ln2_upper() { return make_rational(Integer("6931471805599454"), pow10(16)); }

// Crude but certified: ln t <= ceil(log2 t) * ln 2 for t >= 1.
inline Rational ln_upper(const Rational& t) {
  if (t < 1) throw Error(ErrorCode::PreconditionViolated, "ln_upper needs t >= 1");
  Integer c = ceil_int(t);
  unsigned long bits = mpz_sizeinbase(c.get_mpz_t(), 2);
  if (c == pow2(bits - 1)) bits -= 1;  // exact power of two
  return Rational(static_cast<long>(bits)) * ln2_upper();
}

// Encloses e^{-x}, x >= 0, in [lo, hi]: Taylor series on x / 2^m with
// dyadic terms rounded outward (alternating, so partial sums ending on an odd
// term bound from below and on an even term from above), then m outward-rounded
// squarings.
inline std::pair<Rational, Rational> exp_neg_bracket(const Rational& x, unsigned long bits) {
  if (x < 0) throw Error(ErrorCode::PreconditionViolated, "exp_neg_bracket needs x >= 0");
  if (x == 0) return {Rational(1), Rational(1)};
  unsigned long m = 0;
  Rational y = x;
  while (y > make_rational(1, 2)) {
    y /= 2;
    ++m;
  }
  const unsigned long work = bits + 2 * m + 16;
  const unsigned long fine = work + 8;
  const Rational tiny = make_rational(Integer(1), pow2(work + 2));
  // e^{-y} is decreasing: the lower bound uses y rounded up, the upper y rounded down.
  const Rational y_hi = round_up_dyadic(y, fine), y_lo = round_down_dyadic(y, fine);
  auto partial = [&](const Rational& z, bool lower) {
    Rational t_up(1), t_dn(1), sum(1);
    for (unsigned long k = 1;; ++k) {
      t_up = round_up_dyadic(t_up * z / static_cast<long>(k), fine);
      t_dn = round_down_dyadic(t_dn * z / static_cast<long>(k), fine);
      const bool odd = k % 2 == 1;
      // lower: add small even terms, subtract large odd ones; upper: the reverse
      if (odd) sum -= lower ? t_up : t_dn;
      else sum += lower ? t_dn : t_up;
      if (odd == lower && t_up < tiny) return sum;
    }
  };
  Rational lo = round_down_dyadic(partial(y_hi, true), work);
  Rational hi = round_up_dyadic(partial(y_lo, false), work);
  if (lo < 0) lo = 0;
  if (hi > 1) hi = 1;
  for (unsigned long i = 0; i < m; ++i) {
    lo = round_down_dyadic(lo * lo, work);
    hi = round_up_dyadic(hi * hi, work);
  }
  return {lo, hi};
}

// r with e^{-x} <= r <= e^{-x} + slack, r <= 1.
inline Rational exp_neg_upper(const Rational& x, const Rational& slack) {
  if (slack <= 0) throw Error(ErrorCode::PreconditionViolated, "exp_neg_upper needs slack > 0");
  if (x == 0) return Rational(1);
  unsigned long bits = 32;
  while (Rational(pow2(bits)) * slack < 4) bits += 16;
  for (;;) {
    auto [lo, hi] = exp_neg_bracket(x, bits);
    if (hi - lo <= slack) return hi;
    bits *= 2;
  }
}

inline Rational exp_neg_lower(const Rational& x, const Rational& slack) {
  if (x == 0) return Rational(1);
  unsigned long bits = 32;
  while (Rational(pow2(bits)) * slack < 4) bits += 16;
  for (;;) {
    auto [lo, hi] = exp_neg_bracket(x, bits);
    if (hi - lo <= slack) return lo;
    bits *= 2;
  }
}

}  // namespace divergence
