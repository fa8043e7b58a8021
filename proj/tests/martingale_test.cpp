#include <gtest/gtest.h>
#include <mpfr.h>

#include <random>

#include "support.hpp"

using namespace divergence;

namespace {

Rational q(long n, long d = 1) { return make_rational(n, d); }

// e^{-x} evaluated by MPFR at 300 bits, rounded in the requested direction.
class MpfrExp {
 public:
  MpfrExp() { mpfr_inits2(300, t_, v_, static_cast<mpfr_ptr>(nullptr)); }
  ~MpfrExp() { mpfr_clears(t_, v_, static_cast<mpfr_ptr>(nullptr)); }

  // Lower (resp. upper) bound on e^{-x}, returned as an exact rational.
  Rational bound(const Rational& x, bool upper) {
    mpfr_set_q(t_, x.get_mpq_t(), upper ? MPFR_RNDD : MPFR_RNDU);
    mpfr_neg(t_, t_, MPFR_RNDN);
    mpfr_exp(v_, t_, upper ? MPFR_RNDU : MPFR_RNDD);
    return to_rational(v_);
  }

  static Rational to_rational(mpfr_t v) {
    mpz_t m;
    mpz_init(m);
    mpfr_exp_t e = mpfr_get_z_2exp(m, v);
    Integer mant(m);
    mpz_clear(m);
    if (e >= 0) return Rational(mant * pow2(e));
    return make_rational(mant, pow2(-e));
  }

 private:
  mpfr_t t_, v_;
};

// Sum of e^{-lambda n^r} for n = 1..N, each term rounded down.
Rational series_partial_lower(const Rational& lambda, const Rational& r, int N) {
  mpfr_t acc, term, nr, lam, rr;
  mpfr_inits2(200, acc, term, nr, lam, rr, static_cast<mpfr_ptr>(nullptr));
  mpfr_set_zero(acc, 1);
  mpfr_set_q(lam, lambda.get_mpq_t(), MPFR_RNDU);
  mpfr_set_q(rr, r.get_mpq_t(), MPFR_RNDU);
  for (int n = 1; n <= N; ++n) {
    mpfr_set_ui(nr, n, MPFR_RNDN);
    mpfr_pow(nr, nr, rr, MPFR_RNDU);
    mpfr_mul(term, nr, lam, MPFR_RNDU);
    mpfr_neg(term, term, MPFR_RNDN);
    mpfr_exp(term, term, MPFR_RNDD);
    mpfr_add(acc, acc, term, MPFR_RNDD);
  }
  Rational out = MpfrExp::to_rational(acc);
  mpfr_clears(acc, term, nr, lam, rr, static_cast<mpfr_ptr>(nullptr));
  return out;
}

}  // namespace

TEST(ExpNeg, Examples) {
  EXPECT_EQ(exp_neg_upper(q(0), q(1, 10)), 1);
  Rational e1 = exp_neg_upper(q(1), q(1, 1000000));
  EXPECT_GE(e1, q(367879, 1000000));
  EXPECT_LE(e1, q(367881, 1000000));
  MpfrExp m;
  EXPECT_LE(exp_neg_upper(q(100), q(1, 1000000)), q(1, 1000000) + m.bound(q(100), true));
}

TEST(ExpNeg, DirectedAgainstMpfr) {
  MpfrExp m;
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<long> num(0, 400000), den(1, 10000);
  for (int i = 0; i < 100; ++i) {
    Rational x = q(num(rng), den(rng));
    Rational slack = q(1, 1000000000);
    Rational up = exp_neg_upper(x, slack);
    Rational lo = exp_neg_lower(x, slack);
    EXPECT_GE(up, m.bound(x, false)) << to_string(x);
    EXPECT_LE(up, m.bound(x, true) + slack) << to_string(x);
    EXPECT_LE(lo, m.bound(x, true)) << to_string(x);
    EXPECT_GE(lo, 0);
  }
}

TEST(BasicConstants, Examples) {
  auto bc = basic_constants(DriftSpec::basic(q(1), q(1)));
  EXPECT_EQ(bc.c2_low, q(1, 4));
  // e^{-1/8} / (1 - e^{-1/8}) = 7.5166...
  EXPECT_GE(bc.c1_up, q(751, 100));
  EXPECT_LE(bc.c1_up, q(752, 100));
  EXPECT_EQ(basic_constants(DriftSpec::basic(q(1), q(3))).c2_low, q(1, 16));
  EXPECT_EQ(basic_constants(DriftSpec::basic(q(1, 100), q(1))).c2_low, q(10000, 1020100));
}

TEST(BasicConstants, C1IsAnUpperBound) {
  MpfrExp m;
  for (auto [e, k] : {std::pair{q(1), q(1)}, {q(1, 3), q(1)}, {q(1, 100), q(1)}, {q(2), q(5)}}) {
    auto bc = basic_constants(DriftSpec::basic(e, k));
    Rational s = e + k;
    Rational a = e * e / (2 * s * s);
    Rational x = m.bound(a, false);  // e^{-a} rounded down
    EXPECT_GE(bc.c1_up, x / (1 - x));
  }
}

TEST(DriftSpecTest, Validation) {
  EXPECT_THROW(DriftSpec::basic(q(0), q(1)).validate(), Error);
  EXPECT_THROW(DriftSpec::sublinear(q(2), q(2), q(0), q(1, 4)).validate(), Error);
  EXPECT_THROW(DriftSpec::sublinear(q(1), q(1), q(0), q(1, 4)).validate(), Error);
  EXPECT_THROW(DriftSpec::sublinear(q(1), q(2), q(0), q(1, 2)).validate(), Error);
  EXPECT_NO_THROW(DriftSpec::sublinear(q(1), q(2), q(1), q(1, 4)).validate());
  try {
    DriftSpec::basic(q(-1), q(1)).validate();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateDrift);
  }
}

TEST(TransienceBound, DominatesBirthDeath) {
  for (auto p : {q(3, 5), q(2, 3), q(3, 4)}) {
    DriftSpec spec = DriftSpec::basic(2 * p - 1, q(1));
    const Rational rho = (1 - p) / p;
    for (long n = 1; n <= 30; ++n) EXPECT_GE(transience_bound(spec, q(n)), pow_int(rho, n)) << to_string(p) << " " << n;
  }
}

TEST(TransienceBound, DStepDomain) {
  DriftSpec spec = DriftSpec::dstep(q(1, 3), q(1), 3);
  EXPECT_THROW(transience_bound(spec, q(3)), Error);
  EXPECT_NO_THROW(transience_bound(spec, q(4)));
}

TEST(TransienceBound, Monotone) {
  for (DriftSpec spec : {DriftSpec::basic(q(1, 3), q(1)), DriftSpec::dstep(q(1, 24), q(1), 3),
                         DriftSpec::sublinear(q(1), q(2), q(1), q(1, 4))}) {
    auto bc = bound_constants(spec);
    Rational prev(2);
    for (long n = 4; n <= 400; n += 7) {
      Rational v = transience_bound(spec, bc, q(n));
      EXPECT_LE(v, prev) << n;
      EXPECT_GE(v, 0);
      EXPECT_LE(v, 1);
      prev = v;
    }
  }
}

TEST(TransienceBound, SublinearAtAlphaZeroCoversBasic) {
  DriftSpec sub = DriftSpec::sublinear(q(1), q(2), q(0), q(0));
  DriftSpec basic = DriftSpec::basic(q(1), q(2));
  EXPECT_GE(transience_bound(sub, q(10)), transience_bound(basic, q(10)));
}

TEST(SublinearConstants, SeriesDominatesPartialSum) {
  for (auto alpha : {q(0), q(1, 8), q(1, 4), q(3, 8)}) {
    auto bc = sublinear_constants(DriftSpec::sublinear(q(1), q(2), q(1, 2), alpha));
    Rational partial = series_partial_lower(bc.lambda_low, 1 - 2 * alpha, 10000);
    EXPECT_GE(bc.series_up, partial) << to_string(alpha);
  }
}

TEST(SublinearConstants, UpperGammaBracketsMpfr) {
  mpfr_t sv, uv, g;
  mpfr_inits2(200, sv, uv, g, static_cast<mpfr_ptr>(nullptr));
  for (auto s : {q(1), q(4, 3), q(2), q(4)})
    for (auto u : {q(0), q(1, 2), q(3), q(20)}) {
      mpfr_set_q(sv, s.get_mpq_t(), MPFR_RNDN);
      mpfr_set_q(uv, u.get_mpq_t(), MPFR_RNDN);
      mpfr_gamma_inc(g, sv, uv, MPFR_RNDD);
      Rational exact = MpfrExp::to_rational(g);
      Rational up = detail::upper_gamma_up(s, u, q(1, 1000000000));
      EXPECT_GE(up, exact) << to_string(s) << " " << to_string(u);
      EXPECT_LE(up, exact * q(3, 2)) << to_string(s) << " " << to_string(u);
    }
  mpfr_clears(sv, uv, g, static_cast<mpfr_ptr>(nullptr));
}

TEST(WitnessFromDrift, WalkExamples) {
  StateFunction f = [](const StateKey& k) { return Rational(static_cast<unsigned long>(walk_position(k))); };
  Witness wit = witness_from_drift(f, DriftSpec::basic(q(1, 3), q(1)), q(0), q(0));
  EXPECT_GE(wit.f1(walk_key(5)), q(1, 32));
  EXPECT_EQ(wit.f1(walk_key(0)), 1);
  EXPECT_TRUE(wit.f0_is_one);

  Witness shifted = witness_from_drift(f, DriftSpec::dstep(q(1, 3), q(1), 2), q(1), q(3));
  EXPECT_EQ(shifted.f1(walk_key(6)), 1);  // 6 - 1 - 3 = 2 <= dK
  EXPECT_LT(shifted.f1(walk_key(600)), 1);
}
