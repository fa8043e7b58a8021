#pragma once
//
// Witnesses and the two framing algorithms: crp_basic explores until every
// frontier state is discarded by the witness or lies in the target;
// crp_with_reach additionally uses a reachability oracle so that the
// returned interval excludes 0.
//

#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "divergence/chain.hpp"
#include "divergence/error.hpp"
#include "divergence/rational.hpp"
#include "divergence/solver.hpp"

namespace divergence {

using StateFunction = std::function<Rational(const StateKey&)>;

struct Witness {
  StateFunction f0;
  StateFunction f1;
  bool f0_is_one = false;
  bool f1_is_one = false;
};

inline StateFunction constant_one() {
  return [](const StateKey&) { return Rational(1); };
}

enum class WitnessSide { AsF0, AsF1 };

inline Witness witness_from_single(StateFunction f, WitnessSide side, bool f_is_one = false) {
  Witness w;
  if (side == WitnessSide::AsF1) {
    w.f0 = constant_one();
    w.f0_is_one = true;
    w.f1 = std::move(f);
    w.f1_is_one = f_is_one;
  } else {
    w.f1 = constant_one();
    w.f1_is_one = true;
    w.f0 = std::move(f);
    w.f0_is_one = f_is_one;
  }
  return w;
}

inline Witness identity_witness() { return witness_from_single(constant_one(), WitnessSide::AsF1, true); }

struct AnalysisBudget {
  std::size_t max_states = 100000;
  std::optional<Rational> max_seconds;
};

using ReachOracle = std::function<bool(const StateKey&)>;

struct CrpResult {
  Interval interval;
  std::size_t explored = 0;
  bool exact_solve = true;
  Rational theta_used{0};
};

namespace detail {

class Deadline {
 public:
  explicit Deadline(const std::optional<Rational>& seconds) {
    if (seconds) {
      if (*seconds <= 0) throw Error(ErrorCode::PreconditionViolated, "max_seconds must be positive");
      auto micros = static_cast<long long>(floor_int(*seconds * 1000000).get_si());
      end_ = std::chrono::steady_clock::now() + std::chrono::microseconds(micros);
    }
  }
  bool expired() {
    if (!end_ || (++tick_ & 0xFF) != 0) return false;
    return std::chrono::steady_clock::now() > *end_;
  }

 private:
  std::optional<std::chrono::steady_clock::time_point> end_;
  std::uint32_t tick_ = 0;
};

enum Frozen : std::uint8_t { kExpanded, kTarget, kLoose0, kLoose1, kLoose };

// Shared exploration loop of both algorithms. `reach` may be empty.
inline CrpResult explore_and_frame(const EffectiveChain& chain, const StateKey& s0, const TargetSpec& target,
                                   const Witness& w, const Rational& theta, const AnalysisBudget& budget,
                                   const std::function<bool(const StateKey&)>& reach) {
  const Rational half = theta / 2;
  Deadline deadline(budget.max_seconds);

  std::unordered_map<StateKey, std::uint32_t, StateKeyHash> index;
  std::vector<StateKey> keys;
  std::vector<Frozen> kind;
  std::vector<std::vector<std::pair<std::uint32_t, Rational>>> rows;
  auto intern = [&](const StateKey& k) {
    auto [it, fresh] = index.try_emplace(k, static_cast<std::uint32_t>(keys.size()));
    if (fresh) keys.push_back(k);
    return it->second;
  };

  intern(s0);
  std::size_t head = 0;  // keys[head..] is the FIFO frontier
  while (head < keys.size()) {
    if (head >= budget.max_states)
      throw BudgetExceeded(head, "explored " + std::to_string(head) + " states without emptying the frontier");
    if (deadline.expired()) throw BudgetExceeded(head, "time budget exhausted");
    const StateKey s = keys[head];
    Frozen k;
    if (reach && !reach(s))
      k = kLoose;
    else if (!w.f0_is_one && w.f0(s) <= half)
      k = kLoose0;
    else if (!w.f1_is_one && w.f1(s) <= half)
      k = kLoose1;
    else if (target.contains(s))
      k = kTarget;
    else
      k = kExpanded;
    kind.push_back(k);
    rows.emplace_back();
    if (k == kExpanded) {
      ProbDist d = chain.successors(s);
      auto& row = rows.back();
      row.reserve(d.support.size());
      for (auto& [sk, p] : d.support) row.emplace_back(intern(sk), std::move(p));
    } else {
      rows.back().emplace_back(static_cast<std::uint32_t>(head), Rational(1));
    }
    ++head;
  }

  CrpResult res;
  res.explored = keys.size();
  res.theta_used = theta;
  bool any_target = false;
  for (auto k : kind) any_target |= (k == kTarget);
  if (!any_target) {
    res.interval = Interval{Rational(0), theta};
    return res;
  }

  FiniteChain fc;
  fc.states = std::move(keys);
  fc.rows = std::move(rows);
  fc.absorbing_classes = {{"target", {}}, {"loose0", {}}, {"loose1", {}}, {"loose", {}}};
  for (std::uint32_t i = 0; i < kind.size(); ++i) {
    switch (kind[i]) {
      case kTarget: fc.absorbing_classes[0].second.push_back(i); break;
      case kLoose0: fc.absorbing_classes[1].second.push_back(i); break;
      case kLoose1: fc.absorbing_classes[2].second.push_back(i); break;
      case kLoose: fc.absorbing_classes[3].second.push_back(i); break;
      case kExpanded: break;
    }
  }

  SolveOptions opt;
  opt.gap_target = theta * theta / 16;
  AbsorbBounds r = absorb(fc, 0, opt);
  res.exact_solve = r.exact;
  Rational low = r.low["target"];
  // Missing mass is charged at the largest coefficient of the sum, which is 1.
  Rational up = r.low["target"] + r.low["loose0"] + half * r.low["loose1"] + r.gap;
  if (up > 1) up = 1;
  res.interval = Interval{low, up};
  return res;
}

inline void check_theta(const Rational& theta) {
  if (theta <= 0 || theta >= 1) throw Error(ErrorCode::PreconditionViolated, "theta must lie in (0,1)");
}

}  // namespace detail

inline CrpResult crp_basic(const EffectiveChain& chain, const StateKey& s0, const TargetSpec& target,
                           const Witness& w, const Rational& theta, const AnalysisBudget& budget = {}) {
  detail::check_theta(theta);
  return detail::explore_and_frame(chain, s0, target, w, theta, budget, {});
}

inline CrpResult crp_with_reach(const EffectiveChain& chain, const StateKey& s0, const TargetSpec& target,
                                const Witness& w, const Rational& theta, const ReachOracle& oracle,
                                const AnalysisBudget& budget = {}) {
  detail::check_theta(theta);
  std::unordered_map<StateKey, bool, StateKeyHash> cache;
  auto reach = [&](const StateKey& s) {
    auto it = cache.find(s);
    if (it != cache.end()) return it->second;
    bool v = oracle(s);
    cache.emplace(s, v);
    return v;
  };

  CrpResult res;
  if (!reach(s0)) {
    res.interval = Interval{Rational(0), Rational(0)};
    res.explored = 1;
    res.theta_used = theta;
    return res;
  }

  // Phase 1: breadth-first search for a path to the target through states
  // from which the target stays reachable.
  std::unordered_map<StateKey, StateKey, StateKeyHash> parent;
  std::deque<StateKey> queue{s0};
  parent.emplace(s0, s0);
  detail::Deadline deadline(budget.max_seconds);
  std::size_t visited = 0;
  std::optional<StateKey> hit;
  while (!queue.empty()) {
    if (visited >= budget.max_states)
      throw BudgetExceeded(visited, "no path to the target within the state budget");
    if (deadline.expired()) throw BudgetExceeded(visited, "time budget exhausted");
    StateKey s = std::move(queue.front());
    queue.pop_front();
    ++visited;
    if (target.contains(s)) {
      if (!reach(s)) throw Error(ErrorCode::OracleInconsistent, "oracle denies reachability at a target state");
      hit = s;
      break;
    }
    if (!reach(s)) continue;
    for (const auto& [succ, p] : chain.successors(s).support)
      if (parent.try_emplace(succ, s).second) queue.push_back(succ);
  }
  if (!hit) throw Error(ErrorCode::OracleInconsistent, "oracle claims the target is reachable but no path exists");

  Rational th = theta;
  for (StateKey s = *hit;; s = parent.at(s)) {
    if (!reach(s)) throw Error(ErrorCode::OracleInconsistent, "oracle denies reachability on a path to the target");
    if (!w.f0_is_one) th = std::min(th, w.f0(s));
    if (!w.f1_is_one) th = std::min(th, w.f1(s));
    if (s == s0) break;
  }
  if (th <= 0) throw Error(ErrorCode::PreconditionViolated, "witness vanishes on a path to the target");

  res = detail::explore_and_frame(chain, s0, target, w, th, budget, reach);
  res.explored = std::max(res.explored, visited);
  return res;
}

}  // namespace divergence
