#pragma once
//
// Witness-free reference computations: a truncation bracket (explore a
// finite region, count the frontier as unknown) and a Monte Carlo sampler
// with exact inversion over rational distributions.
//

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "divergence/chain.hpp"
#include "divergence/error.hpp"
#include "divergence/rational.hpp"
#include "divergence/solver.hpp"

namespace divergence {

struct TruncationResult {
  Interval interval;
  std::size_t explored = 0;
  Rational frontier_mass{0};
  bool exact_solve = true;
};

inline TruncationResult truncation_bracket(const EffectiveChain& chain, const StateKey& s0, const TargetSpec& target,
                                           std::size_t max_states) {
  if (max_states < 1) throw Error(ErrorCode::PreconditionViolated, "max_states must be at least 1");
  std::unordered_map<StateKey, std::uint32_t, StateKeyHash> index;
  FiniteChain fc;
  fc.absorbing_classes = {{"target", {}}, {"frontier", {}}};
  auto intern = [&](const StateKey& k) {
    auto [it, fresh] = index.try_emplace(k, static_cast<std::uint32_t>(fc.states.size()));
    if (fresh) fc.states.push_back(k);
    return it->second;
  };
  intern(s0);
  std::size_t expanded = 0;
  for (std::uint32_t i = 0; i < fc.states.size(); ++i) {
    const StateKey s = fc.states[i];
    fc.rows.emplace_back();
    if (target.contains(s)) {
      fc.absorbing_classes[0].second.push_back(i);
      fc.rows.back().emplace_back(i, Rational(1));
    } else if (expanded < max_states) {
      ++expanded;
      std::vector<std::pair<std::uint32_t, Rational>> row;
      for (auto& [k, p] : chain.successors(s).support) row.emplace_back(intern(k), std::move(p));
      fc.rows.back() = std::move(row);
    } else {
      fc.absorbing_classes[1].second.push_back(i);
      fc.rows.back().emplace_back(i, Rational(1));
    }
  }

  SolveOptions opt;
  opt.gap_target = make_rational(Integer(1), pow2(50));
  AbsorbBounds r = absorb(fc, 0, opt);
  TruncationResult res;
  res.explored = expanded;
  res.exact_solve = r.exact;
  res.interval.low = r.low["target"];
  res.interval.up = 1 - r.never;
  res.frontier_mass = res.interval.up - res.interval.low;
  return res;
}

// SplitMix64 (Steele, Lea, Flood).
class SplitMix64 {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next() { return mix(state_ += kGamma); }

  // Independent stream for run `index` of a sampling job seeded by `seed`.
  static SplitMix64 substream(std::uint64_t seed, std::uint64_t index) {
    return SplitMix64(mix(seed ^ mix(index + kGamma)));
  }

 private:
  std::uint64_t state_;
};

struct SampleResult {
  std::uint64_t hits = 0;
  std::uint64_t runs = 0;
  std::uint64_t step_cap = 0;
  Rational ci99_low{0};
  Rational ci99_up{1};
};

// Upper bound on the 99% Hoeffding radius sqrt(ln(200) / (2 runs)).
inline Rational hoeffding99_radius(std::uint64_t runs) {
  const Rational ln200_up = make_rational(52983174, 10000000);
  return sqrt_up(ln200_up / (2 * Rational(static_cast<unsigned long>(runs))));
}

namespace detail {

// A uniform real U in [0,1) revealed 64 bits at a time.
class LazyUniform {
 public:
  LazyUniform(SplitMix64& rng, std::uint64_t first_word) : rng_(rng) { words_.push_back(first_word); }

  // U < c for a rational c in (0,1), drawing more words only when the
  // revealed prefix cannot decide.
  bool less_than(const Rational& c) {
    Rational frac = c;
    for (std::size_t k = 0;; ++k) {
      frac *= Rational(pow2(64));
      Integer digit = floor_int(frac);
      if (k == words_.size()) words_.push_back(rng_.next());
      Integer w(static_cast<unsigned long>(words_[k]));
      if (w < digit) return true;
      if (w > digit) return false;
      frac -= Rational(digit);
      if (frac == 0) return false;
    }
  }

 private:
  SplitMix64& rng_;
  std::vector<std::uint64_t> words_;
};

// Lazily interned copy of the reachable part of a chain, with 64-bit
// floor/ceil thresholds of the cumulative probabilities.
class SampleGraph {
 public:
  SampleGraph(const EffectiveChain& chain, const TargetSpec& target) : chain_(chain), target_(target) {}

  std::uint32_t intern(const StateKey& k) {
    auto [it, fresh] = index_.try_emplace(k, static_cast<std::uint32_t>(nodes_.size()));
    if (fresh) {
      Node n;
      n.target = target_.contains(k);
      nodes_.push_back(n);
      keys_.push_back(k);
    }
    return it->second;
  }

  bool is_target(std::uint32_t v) const { return nodes_[v].target; }

  std::uint32_t step(std::uint32_t v, SplitMix64& rng) {
    if (!nodes_[v].expanded) expand(v);
    const Node& n = nodes_[v];
    const std::uint32_t last = n.first + n.count - 1;
    std::uint32_t e = last;
    if (n.count > 1) {
      const std::uint64_t r = rng.next();
      std::optional<LazyUniform> u;
      for (std::uint32_t i = n.first; i < last; ++i) {
        const Edge& ed = edges_[i];
        if (r < ed.lo) {  // (r+1)/2^64 <= cum
          e = i;
          break;
        }
        if (r > ed.hi_m1) continue;  // r/2^64 >= cum
        if (!u) u.emplace(rng, r);
        if (u->less_than(cum_[i])) {
          e = i;
          break;
        }
      }
    }
    Edge& chosen = edges_[e];
    if (chosen.succ == kUnresolved) chosen.succ = intern(succ_keys_[e]);
    return chosen.succ;
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  static constexpr std::uint32_t kUnresolved = 0xFFFFFFFFu;
  struct Node {
    bool target = false;
    bool expanded = false;
    std::uint32_t first = 0, count = 0;
  };
  struct Edge {
    std::uint64_t lo = 0, hi_m1 = 0;  // floor(cum * 2^64), ceil(cum * 2^64) - 1
    std::uint32_t succ = kUnresolved;
  };

  void expand(std::uint32_t v) {
    ProbDist d = chain_.successors(keys_[v]);
    if (d.support.empty()) throw Error(ErrorCode::EmptySupport, "state without successors");
    const auto first = static_cast<std::uint32_t>(edges_.size());
    const Rational scale(pow2(64));
    const Integer cap = pow2(64) - 1;
    Rational cum(0);
    for (auto& [k, p] : d.support) {
      cum += p;
      Edge e;
      Integer lo = floor_int(cum * scale), hi_m1 = ceil_int(cum * scale) - 1;
      e.lo = lo > cap ? ~std::uint64_t{0} : lo.get_ui();
      e.hi_m1 = hi_m1 > cap ? ~std::uint64_t{0} : hi_m1.get_ui();
      edges_.push_back(e);
      cum_.push_back(cum);
      succ_keys_.push_back(k);
    }
    nodes_[v].first = first;
    nodes_[v].count = static_cast<std::uint32_t>(d.support.size());
    nodes_[v].expanded = true;
  }

  const EffectiveChain& chain_;
  const TargetSpec& target_;
  std::unordered_map<StateKey, std::uint32_t, StateKeyHash> index_;
  std::vector<Node> nodes_;
  std::vector<StateKey> keys_;
  std::vector<Edge> edges_;
  std::vector<Rational> cum_;
  std::vector<StateKey> succ_keys_;
};

}  // namespace detail

inline SampleResult monte_carlo(const EffectiveChain& chain, const StateKey& s0, const TargetSpec& target,
                                std::uint64_t step_cap, std::uint64_t runs, std::uint64_t seed) {
  if (runs < 1 || step_cap < 1) throw Error(ErrorCode::PreconditionViolated, "runs and step_cap must be positive");
  detail::SampleGraph g(chain, target);
  const std::uint32_t root = g.intern(s0);
  SampleResult res;
  res.runs = runs;
  res.step_cap = step_cap;
  for (std::uint64_t run = 0; run < runs; ++run) {
    SplitMix64 rng = SplitMix64::substream(seed, run);
    std::uint32_t v = root;
    bool hit = g.is_target(v);
    for (std::uint64_t t = 0; t < step_cap && !hit; ++t) {
      v = g.step(v, rng);
      hit = g.is_target(v);
    }
    res.hits += hit;
  }
  Rational mean = make_rational(Integer(static_cast<unsigned long>(res.hits)), Integer(static_cast<unsigned long>(runs)));
  Rational r = hoeffding99_radius(runs);
  res.ci99_low = mean - r < 0 ? Rational(0) : Rational(mean - r);
  res.ci99_up = mean + r > 1 ? Rational(1) : Rational(mean + r);
  return res;
}

}  // namespace divergence
