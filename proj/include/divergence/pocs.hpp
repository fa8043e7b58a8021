#pragma once
//
// Probabilistic open channel systems: FIFO channels, one input channel fed
// by anonymous arrivals ($), and the uncontrolled subclass whose arrival
// weights grow with the total channel content.
//

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "divergence/chain.hpp"
#include "divergence/crp.hpp"
#include "divergence/error.hpp"
#include "divergence/martingale.hpp"
#include "divergence/polynomial.hpp"

namespace divergence {

inline const std::string kArrivalLetter = "$";

struct PocsTransition {
  std::string from;
  std::string recv_channel;
  std::optional<std::string> recv;  // nullopt = lambda
  std::string send_channel;
  std::optional<std::string> send;  // nullopt = lambda
  std::string to;
  Polynomial weight;                // in the total content size |nu|

  bool is_arrival() const { return !recv.has_value(); }
  bool operator==(const PocsTransition&) const = default;
};

struct PocsConfig {
  std::string state;
  std::map<std::string, std::vector<std::string>> channels;  // head at the left

  bool operator==(const PocsConfig&) const = default;
};

struct POCS {
  std::vector<std::string> states;
  std::vector<std::string> channels;
  std::string input_channel;
  std::vector<std::string> alphabet;
  std::vector<PocsTransition> delta;

  bool operator==(const POCS&) const = default;
};

struct PocsViolation {
  int condition;  // 0 = structural, 1..3 = definition conditions
  std::string message;
};

inline std::string describe(const PocsTransition& t) {
  return "(" + t.from + ", " + t.recv_channel + ", " + t.recv.value_or("lambda") + ", " + t.send_channel + ", " +
         t.send.value_or("lambda") + ", " + t.to + ")";
}

inline std::vector<PocsViolation> pocs_validate(const POCS& s) {
  std::vector<PocsViolation> out;
  auto has = [](const std::vector<std::string>& v, const std::string& x) {
    return std::find(v.begin(), v.end(), x) != v.end();
  };
  if (!has(s.channels, s.input_channel)) out.push_back({0, "input channel is not a declared channel"});
  if (!has(s.alphabet, kArrivalLetter)) out.push_back({0, "alphabet must contain $"});
  for (const auto& t : s.delta) {
    if (!has(s.states, t.from) || !has(s.states, t.to)) out.push_back({0, "unknown state in " + describe(t)});
    if (!has(s.channels, t.recv_channel) || !has(s.channels, t.send_channel))
      out.push_back({0, "unknown channel in " + describe(t)});
    if ((t.recv && !has(s.alphabet, *t.recv)) || (t.send && !has(s.alphabet, *t.send)))
      out.push_back({0, "unknown letter in " + describe(t)});
    if (!t.weight.is_positive())
      out.push_back({0, "weight of " + describe(t) + " needs non-negative coefficients and a positive constant"});
    if (!t.recv && !(t.send == kArrivalLetter && t.recv_channel == s.input_channel &&
                     t.send_channel == s.input_channel))
      out.push_back({2, "lambda reception must be an arrival on the input channel: " + describe(t)});
    if (t.recv_channel != s.input_channel && t.send_channel == s.input_channel)
      out.push_back({3, "only the input channel may feed the input channel: " + describe(t)});
  }
  for (const auto& q : s.states) {
    bool found = false;
    for (const auto& t : s.delta)
      found |= t.from == q && t.to == q && !t.recv && t.recv_channel == s.input_channel &&
               t.send_channel == s.input_channel && t.send == kArrivalLetter;
    if (!found) out.push_back({1, "missing arrival loop at state " + q});
  }
  return out;
}

inline void pocs_require_valid(const POCS& s) {
  auto v = pocs_validate(s);
  if (v.empty()) return;
  std::string msg;
  for (const auto& x : v) msg += (msg.empty() ? "" : "; ") + std::string("condition ") + std::to_string(x.condition) + ": " + x.message;
  throw Error(ErrorCode::ValidationError, msg);
}

// Index-based form used by the successor function.
class PocsCompiled {
 public:
  explicit PocsCompiled(POCS s) : sys_(std::move(s)) {
    pocs_require_valid(sys_);
    for (std::size_t i = 0; i < sys_.states.size(); ++i) state_ix_[sys_.states[i]] = static_cast<std::uint32_t>(i);
    for (std::size_t i = 0; i < sys_.channels.size(); ++i) chan_ix_[sys_.channels[i]] = static_cast<std::uint32_t>(i);
    for (std::size_t i = 0; i < sys_.alphabet.size(); ++i) letter_ix_[sys_.alphabet[i]] = static_cast<std::uint32_t>(i);
    for (const auto& t : sys_.delta) {
      Rule r;
      r.from = state_ix_.at(t.from);
      r.to = state_ix_.at(t.to);
      r.c = chan_ix_.at(t.recv_channel);
      r.cp = chan_ix_.at(t.send_channel);
      r.a = t.recv ? static_cast<int>(letter_ix_.at(*t.recv)) : -1;
      r.ap = t.send ? static_cast<int>(letter_ix_.at(*t.send)) : -1;
      r.weight = t.weight;
      rules_.push_back(std::move(r));
    }
  }

  const POCS& system() const { return sys_; }

  struct Config {
    std::uint32_t q = 0;
    std::vector<std::vector<std::uint32_t>> nu;
  };

  StateKey encode(const Config& c) const {
    KeyWriter w;
    w.u32(c.q);
    for (const auto& word : c.nu) {
      w.u32(static_cast<std::uint32_t>(word.size()));
      for (auto l : word) w.word(sys_.alphabet[l]);
    }
    return w.finish();
  }

  Config decode(const StateKey& k) const {
    KeyReader r(k);
    Config c;
    c.q = r.u32();
    c.nu.resize(sys_.channels.size());
    for (auto& word : c.nu) {
      word.resize(r.u32());
      for (auto& l : word) l = letter_ix_.at(r.word());
    }
    return c;
  }

  StateKey key(const PocsConfig& pc) const {
    Config c;
    auto it = state_ix_.find(pc.state);
    if (it == state_ix_.end()) throw Error(ErrorCode::ValidationError, "unknown state " + pc.state);
    c.q = it->second;
    c.nu.resize(sys_.channels.size());
    for (const auto& [name, word] : pc.channels) {
      auto ch = chan_ix_.find(name);
      if (ch == chan_ix_.end()) throw Error(ErrorCode::ValidationError, "unknown channel " + name);
      for (const auto& l : word) {
        auto li = letter_ix_.find(l);
        if (li == letter_ix_.end()) throw Error(ErrorCode::ValidationError, "unknown letter " + l);
        c.nu[ch->second].push_back(li->second);
      }
    }
    return encode(c);
  }

  PocsConfig config(const StateKey& k) const {
    Config c = decode(k);
    PocsConfig pc;
    pc.state = sys_.states[c.q];
    for (std::size_t i = 0; i < c.nu.size(); ++i) {
      auto& word = pc.channels[sys_.channels[i]];
      for (auto l : c.nu[i]) word.push_back(sys_.alphabet[l]);
    }
    return pc;
  }

  static std::uint64_t size(const Config& c) {
    std::uint64_t n = 0;
    for (const auto& w : c.nu) n += w.size();
    return n;
  }

  ProbDist successors(const StateKey& k) const {
    Config c = decode(k);
    const std::uint64_t n = size(c);
    std::vector<std::pair<StateKey, Rational>> weighted;
    for (const auto& r : rules_) {
      if (r.from != c.q) continue;
      const auto& src = c.nu[r.c];
      if (r.a >= 0 && (src.empty() || src.front() != static_cast<std::uint32_t>(r.a))) continue;
      Config next = c;
      next.q = r.to;
      if (r.a >= 0) next.nu[r.c].erase(next.nu[r.c].begin());
      if (r.ap >= 0) next.nu[r.cp].push_back(static_cast<std::uint32_t>(r.ap));
      weighted.emplace_back(encode(next), r.weight(n));
    }
    if (weighted.empty()) return ProbDist::dirac(k);
    return normalize_weights(std::move(weighted));
  }

  std::string render(const StateKey& k) const {
    PocsConfig pc = config(k);
    std::string s = pc.state + " {";
    bool first = true;
    for (const auto& [name, word] : pc.channels) {
      s += (first ? "" : ", ") + name + ":";
      first = false;
      for (const auto& l : word) s += l;
    }
    return s + "}";
  }

 private:
  struct Rule {
    std::uint32_t from, to, c, cp;
    int a, ap;
    Polynomial weight;
  };
  POCS sys_;
  std::unordered_map<std::string, std::uint32_t> state_ix_, chan_ix_, letter_ix_;
  std::vector<Rule> rules_;
};

inline ProbDist pocs_successors(const POCS& s, const PocsConfig& cfg) {
  PocsCompiled c(s);
  return c.successors(c.key(cfg));
}

inline EffectiveChain pocs_chain(std::shared_ptr<const PocsCompiled> c) {
  return {[c](const StateKey& k) { return c->successors(k); }, [c](const StateKey& k) { return c->render(k); }};
}

inline std::uint64_t pocs_size(const PocsConfig& c) {
  std::uint64_t n = 0;
  for (const auto& [name, w] : c.channels) n += w.size();
  return n;
}

// Non-arrival weights constant, arrival weights non-constant polynomials
// with positive constant term; every lambda transition is an arrival loop.
inline bool pocs_uncontrolled_check(const POCS& s) {
  for (const auto& t : s.delta) {
    if (t.is_arrival()) {
      if (t.from != t.to || t.weight.is_constant() || !t.weight.is_positive()) return false;
    } else if (!t.weight.is_constant()) {
      return false;
    }
  }
  return true;
}

struct PocsDrift {
  Rational nonarrival_sum{0};
  Rational epsilon{0};
  Integer n0{0};
};

inline PocsDrift pocs_drift(const POCS& s) {
  if (!pocs_uncontrolled_check(s)) throw Error(ErrorCode::NotUncontrolled, "pOCS is not uncontrolled");
  PocsDrift d;
  for (const auto& t : s.delta)
    if (!t.is_arrival()) d.nonarrival_sum += t.weight.coeff(0);
  d.epsilon = 1 / (1 + 2 * d.nonarrival_sum);
  const Rational need = 1 + d.nonarrival_sum;
  for (const auto& q : s.states) {
    Polynomial win;
    for (const auto& t : s.delta)
      if (t.is_arrival() && t.from == q) win = win + t.weight;
    // win is non-decreasing on the naturals: the least n with win(n) >= need
    // works for every larger n as well.
    Integer lo = 0, hi = 1;
    while (win(hi) < need) hi *= 2;
    if (win(lo) >= need) hi = lo;
    while (lo < hi) {
      Integer mid = (lo + hi) / 2;
      if (win(mid) >= need) hi = mid; else lo = mid + 1;
    }
    if (hi > d.n0) d.n0 = hi;
  }
  return d;
}

// f = |nu|, basic drift with K = 1, translated by max target size and n0.
inline Witness pocs_witness(std::shared_ptr<const PocsCompiled> c, const std::vector<PocsConfig>& target) {
  PocsDrift d = pocs_drift(c->system());
  std::uint64_t a = 0;
  for (const auto& t : target) a = std::max(a, pocs_size(t));
  StateFunction f = [c](const StateKey& k) {
    return Rational(static_cast<unsigned long>(PocsCompiled::size(c->decode(k))));
  };
  return witness_from_drift(std::move(f), DriftSpec::basic(d.epsilon, 1), Rational(static_cast<unsigned long>(a)),
                            Rational(d.n0));
}

}  // namespace divergence
