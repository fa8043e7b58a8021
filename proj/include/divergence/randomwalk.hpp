#pragma once
//
// Random walks on the naturals whose up/down weights are polynomials in the
// current position. Includes the recurrence/transience case analysis and
// upper bounds on the probability of reaching a lower target.
//

#include <cstdint>
#include <optional>
#include <string>

#include "divergence/chain.hpp"
#include "divergence/crp.hpp"
#include "divergence/error.hpp"
#include "divergence/polynomial.hpp"
#include "divergence/rational.hpp"

namespace divergence {

inline void require_pos_int_polynomial(const Polynomial& p, const std::string& what) {
  if (p.degree() < 0 || !p.integral() || !p.non_negative_coeffs() || p.coeff(0) <= 0)
    throw Error(ErrorCode::ValidationError,
                what + " must have non-negative integer coefficients and a positive constant term");
}

struct RandomWalk {
  Polynomial up;    // weight of n -> n+1
  Polynomial down;  // weight of n -> n-1

  RandomWalk() = default;
  RandomWalk(Polynomial u, Polynomial d) : up(std::move(u)), down(std::move(d)) {
    require_pos_int_polynomial(up, "up weight");
    require_pos_int_polynomial(down, "down weight");
  }

  bool operator==(const RandomWalk&) const = default;
};

inline StateKey walk_key(std::uint64_t n) { return encode_tuple({n}); }

inline std::uint64_t walk_position(const StateKey& k) {
  auto t = decode_tuple(k);
  if (t.size() != 1) throw Error(ErrorCode::MalformedChain, "not a walk position");
  return t[0];
}

inline ProbDist rw_successors(const RandomWalk& w, std::uint64_t n) {
  if (n == 0) return ProbDist::dirac(walk_key(1));
  return normalize_weights({{walk_key(n + 1), w.up(n)}, {walk_key(n - 1), w.down(n)}});
}

inline EffectiveChain walk_chain(const RandomWalk& w) {
  return {[w](const StateKey& k) { return rw_successors(w, walk_position(k)); },
          [](const StateKey& k) { return std::to_string(walk_position(k)); }};
}

enum class Verdict { Recurrent, Transient };

enum class WalkCase { DownDominates, EqualWeights, LowOrderGap, SubleadingSmall, SubleadingGap, LeadingUp };

inline const char* to_string(Verdict v) { return v == Verdict::Recurrent ? "Recurrent" : "Transient"; }

inline const char* to_string(WalkCase c) {
  switch (c) {
    case WalkCase::DownDominates: return "down-dominates";
    case WalkCase::EqualWeights: return "equal-weights";
    case WalkCase::LowOrderGap: return "low-order-gap";
    case WalkCase::SubleadingSmall: return "subleading-small";
    case WalkCase::SubleadingGap: return "subleading-gap";
    case WalkCase::LeadingUp: return "leading-up";
  }
  return "unknown";
}

struct WalkClass {
  Verdict verdict = Verdict::Recurrent;
  WalkCase case_id = WalkCase::EqualWeights;
  Integer n0{0};
  Rational alpha{0};        // leading-up: rho_n <= alpha; subleading-gap: the gap ratio
  Rational alpha_prime{0};  // subleading-gap only
};

inline WalkClass rw_classify(const RandomWalk& w) {
  const int d = w.down.degree();
  const int dp = w.up.degree();
  WalkClass c;
  auto leading_up = [&](const Rational& alpha) {
    c.verdict = Verdict::Transient;
    c.case_id = WalkCase::LeadingUp;
    c.alpha = alpha;
    c.n0 = eventual_nonneg_start(w.up.scaled(alpha) - w.down, Integer(1));
    return c;
  };

  if (w.up == w.down) {
    c.case_id = WalkCase::EqualWeights;
    return c;
  }
  if (dp < d) {
    c.case_id = WalkCase::DownDominates;
    return c;
  }
  if (d < dp) return leading_up(make_rational(1, 2));

  int i0 = d;
  while (w.down.coeff(i0) == w.up.coeff(i0)) --i0;
  const Rational ai = w.down.coeff(i0), api = w.up.coeff(i0);
  if (ai > api) {
    c.case_id = WalkCase::DownDominates;
    return c;
  }
  if (i0 == d) {
    // rho_n -> a_d / a'_d < 1; use the limit itself when it is eventually an
    // upper bound, otherwise the midpoint towards 1.
    Rational limit = w.down.leading() / w.up.leading();
    Polynomial diff = w.up.scaled(limit) - w.down;
    if (diff.degree() < 0 || diff.leading() > 0) return leading_up(limit);
    return leading_up((limit + 1) / 2);
  }
  if (i0 <= d - 2) {
    c.case_id = WalkCase::LowOrderGap;
    return c;
  }
  c.alpha = (api - ai) / w.down.leading();
  if (c.alpha <= 1) {
    c.case_id = WalkCase::SubleadingSmall;
    return c;
  }
  c.verdict = Verdict::Transient;
  c.case_id = WalkCase::SubleadingGap;
  c.alpha_prime = (1 + c.alpha) / 2;
  // (n - alpha') up(n) - n down(n) >= 0  <=>  rho_n <= 1 - alpha'/n
  Polynomial shifted_n = Polynomial({-c.alpha_prime, Rational(1)});
  Polynomial n = Polynomial({Rational(0), Rational(1)});
  c.n0 = eventual_nonneg_start(shifted_n * w.up - n * w.down, Integer(1));
  return c;
}

// Upper bound on Pr_n(F {n_f}) for n_f below the start. Positions at or below
// max(n_f, n0) get the trivial bound 1.
inline std::function<Rational(std::uint64_t)> rw_f1(const RandomWalk& w, const WalkClass& cls, std::uint64_t n_f) {
  if (cls.verdict != Verdict::Transient) throw Error(ErrorCode::NotTransient, "walk is recurrent");
  Integer M = cls.n0 > Integer(static_cast<unsigned long>(n_f)) ? cls.n0 : Integer(static_cast<unsigned long>(n_f));
  const std::uint64_t m = M.get_ui();
  Rational p0(1);
  for (std::uint64_t k = n_f + 1; k <= m; ++k) p0 *= w.down(k) / w.up(k);

  if (cls.case_id == WalkCase::LeadingUp) {
    const Rational alpha = cls.alpha;
    const Rational scale = p0 / (1 - alpha);
    return [m, alpha, scale](std::uint64_t n) {
      if (n <= m) return Rational(1);
      Rational v = scale * pow_int(alpha, n - m);
      return v > 1 ? Rational(1) : v;
    };
  }
  const Rational ap = cls.alpha_prime;
  const Rational scale = p0 * pow_frac_up(Rational(M + 1), ap) / (ap - 1);
  return [m, ap, scale](std::uint64_t n) {
    if (n <= m) return Rational(1);
    Rational v = scale / pow_frac_down(Rational(Integer(static_cast<unsigned long>(n))), ap - 1);
    return v > 1 ? Rational(1) : v;
  };
}

struct WalkDivergence {
  bool divergent = false;
  WalkClass cls;
  Witness witness;
};

inline WalkDivergence rw_divergence(const RandomWalk& w, std::uint64_t s0, std::uint64_t n_f) {
  if (s0 <= n_f) throw Error(ErrorCode::PreconditionViolated, "only start positions above the target are supported");
  WalkDivergence res;
  res.cls = rw_classify(w);
  if (res.cls.verdict == Verdict::Recurrent) {
    res.witness = identity_witness();
    return res;
  }
  res.divergent = true;
  auto f1 = rw_f1(w, res.cls, n_f);
  res.witness = witness_from_single([f1](const StateKey& k) { return f1(walk_position(k)); }, WitnessSide::AsF1);
  return res;
}

}  // namespace divergence
