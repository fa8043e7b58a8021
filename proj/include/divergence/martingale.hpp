#pragma once
//
// Transience bounds from drift conditions, evaluated with every rounding
// directed so that the final probability bound is an over-approximation.
//

#include <map>
#include <memory>
#include <mutex>
#include <optional>

#include "divergence/chain.hpp"
#include "divergence/crp.hpp"
#include "divergence/error.hpp"
#include "divergence/rational.hpp"

namespace divergence {

enum class DriftVariant { Basic, DStep, Sublinear };

struct DriftSpec {
  Rational epsilon{1};
  Rational K{1};
  unsigned d = 1;
  Rational Kprime{0};
  Rational alpha{0};
  DriftVariant variant = DriftVariant::Basic;

  static DriftSpec basic(const Rational& eps, const Rational& k) { return {eps, k, 1, 0, 0, DriftVariant::Basic}; }
  static DriftSpec dstep(const Rational& eps, const Rational& k, unsigned d) {
    return {eps, k, d, 0, 0, DriftVariant::DStep};
  }
  static DriftSpec sublinear(const Rational& eps, const Rational& k, const Rational& kp, const Rational& a) {
    return {eps, k, 1, kp, a, DriftVariant::Sublinear};
  }

  void validate() const {
    if (epsilon <= 0) throw Error(ErrorCode::DegenerateDrift, "epsilon must be positive");
    if (K <= 0) throw Error(ErrorCode::PreconditionViolated, "K must be positive");
    if (d < 1) throw Error(ErrorCode::PreconditionViolated, "d must be at least 1");
    switch (variant) {
      case DriftVariant::Basic:
        if (d != 1 || Kprime != 0 || alpha != 0)
          throw Error(ErrorCode::PreconditionViolated, "basic variant needs d = 1, K' = 0, alpha = 0");
        break;
      case DriftVariant::DStep:
        if (Kprime != 0 || alpha != 0)
          throw Error(ErrorCode::PreconditionViolated, "d-step variant needs K' = 0, alpha = 0");
        break;
      case DriftVariant::Sublinear:
        if (d != 1 || epsilon > 1 || K < 2 || Kprime < 0 || alpha < 0 || alpha >= make_rational(1, 2))
          throw Error(ErrorCode::PreconditionViolated,
                      "sublinear variant needs d = 1, epsilon <= 1, K >= 2, K' >= 0, 0 <= alpha < 1/2");
        break;
    }
  }
};

struct BoundConstants {
  Rational c1_up{0};
  Rational c2_low{0};
  // sublinear only
  Rational D_up{0};
  Rational lambda_low{0};  // -ln(gamma), rounded down
  Rational beta_up{0};
  Rational gamma_up{0};
  Rational series_up{0};
  std::size_t series_terms = 0;
};

namespace detail {
inline const Rational& default_slack() {
  static const Rational s = make_rational(Integer(1), pow2(96));
  return s;
}

// Upper bound on Gamma(s, u) = int_u^inf t^{s-1} e^{-t} dt for s >= 1:
// right-endpoint steps up to w, then t^{s-1} <= w^{s-1} e^{(s-1)(t/w - 1)}
// beyond w > s - 1.
inline Rational upper_gamma_up(const Rational& s, const Rational& u, const Rational& slack) {
  const Rational a = s - 1;
  const Rational h = make_rational(1, 16);
  Rational w = (u > 2 * a ? u : 2 * a) + 1;
  Rational total(0);
  for (Rational t = u; t < w;) {
    Rational t2 = t + h < w ? t + h : w;
    total += (t2 - t) * pow_frac_up(t2, a) * exp_neg_upper(t, slack);
    t = t2;
  }
  total += pow_frac_up(w, a) * exp_neg_upper(w, slack) / (1 - a / w);
  return total;
}

}  // namespace detail

inline BoundConstants basic_constants(const DriftSpec& spec) {
  spec.validate();
  if (spec.variant == DriftVariant::Sublinear)
    throw Error(ErrorCode::PreconditionViolated, "basic_constants needs the basic or d-step variant");
  const Rational s = spec.epsilon + spec.K;
  const Rational a = spec.epsilon * spec.epsilon / (2 * s * s);
  // 1 - e^{-a} >= a/2 here (a < 1/2), so this slack keeps x below 1.
  Rational slack = std::min<Rational>(detail::default_slack(), a / Rational(pow2(40)));
  Rational x = exp_neg_upper(a, slack);
  BoundConstants bc;
  bc.c1_up = x / (1 - x);
  bc.c2_low = spec.epsilon / (s * s);
  return bc;
}

inline BoundConstants sublinear_constants(const DriftSpec& spec, std::size_t max_terms = 20000) {
  spec.validate();
  if (spec.variant != DriftVariant::Sublinear)
    throw Error(ErrorCode::PreconditionViolated, "sublinear_constants needs the sublinear variant");
  const Rational& eps = spec.epsilon;
  const Rational& K = spec.K;
  const Rational& Kp = spec.Kprime;
  const Rational& al = spec.alpha;
  const Rational r = 1 - 2 * al;

  const Rational Ka_up = pow_frac_up(K, al);
  const Rational K2a_up = pow_frac_up(K, 2 * al);
  const Rational e1a_low = pow_frac_down(eps, 1 + al);
  const Rational e12a_low = pow_frac_down(eps, 1 + 2 * al);
  Rational D = 2 * (eps + K) * Ka_up / eps;
  if (Kp != 0) {
    D += 4 * Kp * (eps + K) * Ka_up / (e1a_low * (1 + al));
    D += 2 * Kp * Kp * K2a_up * (1 + 2 * al) / e12a_low;
  }

  BoundConstants bc;
  bc.D_up = D;
  bc.lambda_low = pow_frac_down(eps, r) / D;
  bc.beta_up = exp_neg_upper(1 / D, detail::default_slack());
  bc.gamma_up = exp_neg_upper(bc.lambda_low, std::min<Rational>(detail::default_slack(), bc.lambda_low / Rational(pow2(40))));

  if (r == 1) {
    bc.series_up = bc.gamma_up / (1 - bc.gamma_up);
    return bc;
  }

  // sum_{n>N} e^{-lam n^r} <= int_N^inf e^{-lam x^r} dx
  //                         = lam^{-s} Gamma(s, lam N^r) / r, s = 1/r.
  const Rational lam = bc.lambda_low;
  const Rational s = 1 / r;
  Integer N = ceil_int(pow_frac_up(80 / lam, s));
  if (N > Integer(static_cast<unsigned long>(max_terms))) N = Integer(static_cast<unsigned long>(max_terms));
  if (N < 1) N = 1;

  const Rational term_slack = make_rational(Integer(1), pow2(80));
  Rational sum(0);
  for (Integer n = 1; n <= N; ++n) {
    Rational arg = lam * pow_frac_down(Rational(n), r);
    sum += exp_neg_upper(arg, term_slack);
  }
  const Rational u = lam * pow_frac_down(Rational(N), r);
  sum += pow_frac_up(1 / lam, s) * detail::upper_gamma_up(s, u, term_slack) / r;
  bc.series_up = sum;
  bc.series_terms = N.get_ui();
  return bc;
}

inline BoundConstants bound_constants(const DriftSpec& spec) {
  return spec.variant == DriftVariant::Sublinear ? sublinear_constants(spec) : basic_constants(spec);
}

inline bool in_bound_domain(const DriftSpec& spec, const Rational& fs) {
  switch (spec.variant) {
    case DriftVariant::Basic: return fs > 0;
    case DriftVariant::DStep: return fs > spec.d * spec.K;
    case DriftVariant::Sublinear: return fs >= 2;
  }
  return false;
}

// Upper bound on the probability of ever reaching {f <= 0} from a state with
// f = fs, using precomputed constants.
inline Rational transience_bound(const DriftSpec& spec, const BoundConstants& bc, const Rational& fs) {
  if (!in_bound_domain(spec, fs)) throw Error(ErrorCode::PreconditionViolated, "f(s) outside the bound's domain");
  Rational v;
  const Rational& slack = detail::default_slack();
  switch (spec.variant) {
    case DriftVariant::Basic: v = bc.c1_up * exp_neg_upper(bc.c2_low * fs, slack); break;
    case DriftVariant::DStep: v = bc.c1_up * exp_neg_upper(bc.c2_low * (fs - spec.d * spec.K), slack); break;
    case DriftVariant::Sublinear:
      v = exp_neg_upper(pow_frac_down(fs, 1 - 2 * spec.alpha) / bc.D_up, slack) * bc.series_up;
      break;
  }
  return v > 1 ? Rational(1) : v;
}

inline Rational transience_bound(const DriftSpec& spec, const Rational& fs) {
  spec.validate();
  if (!in_bound_domain(spec, fs)) throw Error(ErrorCode::PreconditionViolated, "f(s) outside the bound's domain");
  return transience_bound(spec, bound_constants(spec), fs);
}

// f0 = 1, f1(s) = min(1, bound(f(s) - a - shift)) inside the bound's domain
// and 1 elsewhere. Evaluations are memoised by the shifted f value.
inline Witness witness_from_drift(StateFunction f, const DriftSpec& spec, const Rational& a, const Rational& shift) {
  spec.validate();
  if (shift < 0) throw Error(ErrorCode::PreconditionViolated, "shift must be non-negative");
  struct Memo {
    std::mutex mu;
    std::map<Rational, Rational> values;
  };
  auto bc = std::make_shared<const BoundConstants>(bound_constants(spec));
  auto memo = std::make_shared<Memo>();
  const Rational offset = (a > 0 ? a : Rational(0)) + shift;
  StateFunction f1 = [f = std::move(f), spec, bc, memo, offset](const StateKey& s) {
    Rational fs = f(s) - offset;
    if (!in_bound_domain(spec, fs)) return Rational(1);
    {
      std::lock_guard<std::mutex> lock(memo->mu);
      auto it = memo->values.find(fs);
      if (it != memo->values.end()) return it->second;
    }
    Rational v = transience_bound(spec, *bc, fs);
    std::lock_guard<std::mutex> lock(memo->mu);
    memo->values.emplace(fs, v);
    return v;
  };
  return witness_from_single(std::move(f1), WitnessSide::AsF1);
}

}  // namespace divergence
