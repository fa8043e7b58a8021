#pragma once
//
// Probabilistic pushdown automata with stack-height dependent weights.
// Stacks are written bottom to top; the top letter is the last one.
//

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "divergence/chain.hpp"
#include "divergence/crp.hpp"
#include "divergence/error.hpp"
#include "divergence/martingale.hpp"
#include "divergence/polynomial.hpp"

namespace divergence {

struct PdaRule {
  std::string from;
  std::optional<std::string> pop;  // nullopt: only fires on the empty stack
  std::string to;
  std::vector<std::string> push;   // appended on top, at most two letters
  Polynomial weight;               // in the stack height before firing

  bool operator==(const PdaRule&) const = default;
};

struct PdaConfig {
  std::string state;
  std::vector<std::string> stack;

  bool operator==(const PdaConfig&) const = default;
};

struct PPDA {
  std::vector<std::string> states;
  std::vector<std::string> alphabet;
  std::vector<PdaRule> delta;

  bool operator==(const PPDA&) const = default;

  void validate() const {
    auto has = [](const std::vector<std::string>& v, const std::string& x) {
      return std::find(v.begin(), v.end(), x) != v.end();
    };
    for (const auto& a : alphabet)
      if (has(states, a)) throw Error(ErrorCode::ValidationError, "'" + a + "' is both a state and a letter");
    for (const auto& r : delta) {
      if (!has(states, r.from) || !has(states, r.to))
        throw Error(ErrorCode::ValidationError, "rule uses an unknown state");
      if (r.pop && !has(alphabet, *r.pop)) throw Error(ErrorCode::ValidationError, "rule pops an unknown letter");
      for (const auto& l : r.push)
        if (!has(alphabet, l)) throw Error(ErrorCode::ValidationError, "rule pushes an unknown letter");
      if (r.push.size() > 2) throw Error(ErrorCode::ValidationError, "rules push at most two letters");
      if (!r.pop && r.push.size() > 1)
        throw Error(ErrorCode::ValidationError, "a rule on the empty stack pushes at most one letter");
      if (!r.weight.is_positive())
        throw Error(ErrorCode::ValidationError, "rule weight needs non-negative coefficients and a positive constant");
    }
  }
};

class PpdaCompiled {
 public:
  explicit PpdaCompiled(PPDA m) : m_(std::move(m)) {
    m_.validate();
    for (std::size_t i = 0; i < m_.states.size(); ++i) state_ix_[m_.states[i]] = static_cast<std::uint32_t>(i);
    for (std::size_t i = 0; i < m_.alphabet.size(); ++i) letter_ix_[m_.alphabet[i]] = static_cast<std::uint32_t>(i);
    for (const auto& r : m_.delta) {
      Rule c;
      c.from = state_ix_.at(r.from);
      c.to = state_ix_.at(r.to);
      c.pop = r.pop ? static_cast<int>(letter_ix_.at(*r.pop)) : -1;
      for (const auto& l : r.push) c.push.push_back(letter_ix_.at(l));
      c.weight = r.weight;
      rules_.push_back(std::move(c));
    }
  }

  const PPDA& automaton() const { return m_; }

  struct Config {
    std::uint32_t q = 0;
    std::vector<std::uint32_t> stack;
  };

  StateKey encode(const Config& c) const {
    KeyWriter w;
    w.u32(c.q);
    w.u32(static_cast<std::uint32_t>(c.stack.size()));
    for (auto l : c.stack) w.word(m_.alphabet[l]);
    return w.finish();
  }

  Config decode(const StateKey& k) const {
    KeyReader r(k);
    Config c;
    c.q = r.u32();
    c.stack.resize(r.u32());
    for (auto& l : c.stack) l = letter_ix_.at(r.word());
    return c;
  }

  StateKey key(const PdaConfig& pc) const {
    Config c;
    auto it = state_ix_.find(pc.state);
    if (it == state_ix_.end()) throw Error(ErrorCode::ValidationError, "unknown state " + pc.state);
    c.q = it->second;
    for (const auto& l : pc.stack) {
      auto li = letter_ix_.find(l);
      if (li == letter_ix_.end()) throw Error(ErrorCode::ValidationError, "unknown letter " + l);
      c.stack.push_back(li->second);
    }
    return encode(c);
  }

  PdaConfig config(const StateKey& k) const {
    Config c = decode(k);
    PdaConfig pc;
    pc.state = m_.states[c.q];
    for (auto l : c.stack) pc.stack.push_back(m_.alphabet[l]);
    return pc;
  }

  ProbDist successors(const StateKey& k) const {
    Config c = decode(k);
    const int top = c.stack.empty() ? -1 : static_cast<int>(c.stack.back());
    const auto height = static_cast<unsigned long>(c.stack.size());
    std::vector<std::pair<StateKey, Rational>> weighted;
    for (const auto& r : rules_) {
      if (r.from != c.q || r.pop != top) continue;
      Config next;
      next.q = r.to;
      next.stack = c.stack;
      if (top >= 0) next.stack.pop_back();
      next.stack.insert(next.stack.end(), r.push.begin(), r.push.end());
      weighted.emplace_back(encode(next), r.weight(height));
    }
    if (weighted.empty()) return ProbDist::dirac(k);
    return normalize_weights(std::move(weighted));
  }

  std::string render(const StateKey& k) const {
    PdaConfig pc = config(k);
    std::string s = "(" + pc.state + ", ";
    if (pc.stack.empty()) s += "lambda";
    for (const auto& l : pc.stack) s += l;
    return s + ")";
  }

 private:
  struct Rule {
    std::uint32_t from, to;
    int pop;
    std::vector<std::uint32_t> push;
    Polynomial weight;
  };
  PPDA m_;
  std::unordered_map<std::string, std::uint32_t> state_ix_, letter_ix_;
  std::vector<Rule> rules_;
};

inline ProbDist ppda_successors(const PPDA& m, const PdaConfig& cfg) {
  PpdaCompiled c(m);
  return c.successors(c.key(cfg));
}

inline EffectiveChain ppda_chain(std::shared_ptr<const PpdaCompiled> c) {
  return {[c](const StateKey& k) { return c->successors(k); }, [c](const StateKey& k) { return c->render(k); }};
}

using StateLetter = std::pair<std::string, std::string>;

// Pairs that can reach, without changing the stack height, a pair with a
// rule pushing two letters. Backward saturation from those seeds.
inline std::set<StateLetter> inc_pairs(const PPDA& m) {
  std::set<StateLetter> inc;
  std::vector<StateLetter> work;
  for (const auto& r : m.delta)
    if (r.pop && r.push.size() == 2 && inc.insert({r.from, *r.pop}).second) work.push_back({r.from, *r.pop});
  while (!work.empty()) {
    StateLetter target = work.back();
    work.pop_back();
    for (const auto& r : m.delta) {
      if (!r.pop || r.push.size() != 1) continue;
      if (r.to == target.first && r.push[0] == target.second && inc.insert({r.from, *r.pop}).second)
        work.push_back({r.from, *r.pop});
    }
  }
  return inc;
}

struct PdaViolation {
  int condition;  // 1..4
  std::string message;
};

inline std::string describe(const PdaRule& r) {
  std::string s = r.from + " ?" + r.pop.value_or("") + "!";
  for (const auto& l : r.push) s += l;
  return s + " -> " + r.to;
}

inline std::vector<PdaViolation> increasing_check(const PPDA& m) {
  std::vector<PdaViolation> out;
  auto inc = inc_pairs(m);
  for (const auto& q : m.states)
    for (const auto& a : m.alphabet)
      if (!inc.count({q, a})) out.push_back({1, "(" + q + ", " + a + ") is not an increasing pair"});
  for (const auto& r : m.delta) {
    if (r.push.size() <= 1) {
      if (!r.weight.is_constant() || !r.weight.integral() || r.weight.coeff(0) <= 0)
        out.push_back({2, "rule " + describe(r) + " needs a constant positive integer weight"});
    } else if (r.weight.is_constant() || !r.weight.integral() || !r.weight.is_positive()) {
      out.push_back({3, "rule " + describe(r) + " needs a non-constant positive integer polynomial weight"});
    }
    if (r.pop && r.push.empty()) {
      bool matched = false;
      for (const auto& p : m.delta) matched |= p.from == r.from && p.pop == r.pop && p.push.size() == 2;
      if (!matched) out.push_back({4, "pop rule " + describe(r) + " has no push rule from the same pair"});
    }
  }
  return out;
}

struct PdaDrift {
  Integer B{1};
  unsigned d = 1;
  Rational epsilon{0};
  Integer n0{0};
};

inline PdaDrift ppda_drift(const PPDA& m) {
  auto v = increasing_check(m);
  if (!v.empty()) throw Error(ErrorCode::NotIncreasing, v.front().message);
  PdaDrift dr;
  Integer B = 0;
  for (const auto& r : m.delta)
    if (r.push.size() <= 1) B = std::max(B, r.weight.coeff(0).get_num());
  if (B < 1) B = 1;
  dr.B = B;
  dr.d = static_cast<unsigned>(m.states.size() * m.alphabet.size());
  dr.epsilon = 1 / (3 * Rational(pow_int(Rational(B), dr.d)));
  const Rational need = Rational(2 * static_cast<long>(m.delta.size())) * Rational(B);
  // Push weights are non-decreasing in the height.
  for (const auto& r : m.delta) {
    if (r.push.size() != 2) continue;
    Integer lo = 0, hi = 1;
    while (r.weight(hi) < need) hi *= 2;
    if (r.weight(lo) >= need) hi = lo;
    while (lo < hi) {
      Integer mid = (lo + hi) / 2;
      if (r.weight(mid) >= need) hi = mid; else lo = mid + 1;
    }
    if (hi > dr.n0) dr.n0 = hi;
  }
  return dr;
}

// f = stack height, d-step drift with K = 1, translated by the largest
// target height and n0 + d.
inline Witness ppda_witness(std::shared_ptr<const PpdaCompiled> c, const std::vector<PdaConfig>& target) {
  PdaDrift dr = ppda_drift(c->automaton());
  std::uint64_t a = 0;
  for (const auto& t : target) a = std::max<std::uint64_t>(a, t.stack.size());
  StateFunction f = [c](const StateKey& k) {
    KeyReader r(k);
    r.u32();
    return Rational(static_cast<unsigned long>(r.u32()));
  };
  return witness_from_drift(std::move(f), DriftSpec::dstep(dr.epsilon, 1, dr.d),
                            Rational(static_cast<unsigned long>(a)), Rational(dr.n0 + dr.d));
}

}  // namespace divergence
