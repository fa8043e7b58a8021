#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "divergence/chain.hpp"
#include "divergence/crp.hpp"
#include "divergence/error.hpp"
#include "divergence/polynomial.hpp"

namespace divergence {

using Marking = std::vector<std::uint64_t>;

struct PPN {
  std::vector<std::string> places;
  std::vector<std::string> transitions;
  std::vector<std::vector<std::uint64_t>> pre;   // [place][transition]
  std::vector<std::vector<std::uint64_t>> post;  // [place][transition]
  std::vector<MultiPolynomial> weights;          // per transition
  Marking m0;

  std::size_t num_places() const { return places.size(); }
  std::size_t num_transitions() const { return transitions.size(); }

  void validate() const {
    const std::size_t P = places.size(), T = transitions.size();
    auto check_matrix = [&](const auto& m, const char* name) {
      if (m.size() != P) throw Error(ErrorCode::ValidationError, std::string(name) + " must have one row per place");
      for (const auto& row : m)
        if (row.size() != T)
          throw Error(ErrorCode::ValidationError, std::string(name) + " must have one column per transition");
    };
    check_matrix(pre, "pre");
    check_matrix(post, "post");
    if (weights.size() != T) throw Error(ErrorCode::ValidationError, "one weight per transition required");
    for (std::size_t t = 0; t < T; ++t) {
      if (weights[t].vars() != P)
        throw Error(ErrorCode::ValidationError, "weight of " + transitions[t] + " has wrong arity");
      if (!weights[t].is_positive())
        throw Error(ErrorCode::ValidationError,
                    "weight of " + transitions[t] + " needs non-negative coefficients and a positive constant");
    }
    if (m0.size() != P) throw Error(ErrorCode::ValidationError, "initial marking has wrong dimension");
  }

  bool enabled(const Marking& m, std::size_t t) const {
    for (std::size_t p = 0; p < places.size(); ++p)
      if (m[p] < pre[p][t]) return false;
    return true;
  }

  Marking fire(const Marking& m, std::size_t t) const {
    Marking out = m;
    for (std::size_t p = 0; p < places.size(); ++p) out[p] = out[p] - pre[p][t] + post[p][t];
    return out;
  }
};

inline StateKey marking_key(const Marking& m) { return encode_tuple(m); }
inline Marking key_marking(const StateKey& k) { return decode_tuple(k); }

inline ProbDist ppn_successors(const PPN& net, const Marking& m) {
  std::vector<std::pair<StateKey, Rational>> weighted;
  for (std::size_t t = 0; t < net.num_transitions(); ++t)
    if (net.enabled(m, t)) weighted.emplace_back(marking_key(net.fire(m, t)), net.weights[t](m));
  if (weighted.empty()) return ProbDist::dirac(marking_key(m));
  return normalize_weights(std::move(weighted));
}

inline EffectiveChain ppn_chain(const PPN& net) {
  return {[net](const StateKey& k) { return ppn_successors(net, key_marking(k)); },
          [](const StateKey& k) {
            std::string s = "(";
            auto m = key_marking(k);
            for (std::size_t i = 0; i < m.size(); ++i) s += (i ? "," : "") + std::to_string(m[i]);
            return s + ")";
          }};
}

inline bool covers(const Marking& m, const Marking& b) {
  for (std::size_t i = 0; i < b.size(); ++i)
    if (m[i] < b[i]) return false;
  return true;
}

struct UpwardClosedSet {
  std::vector<Marking> basis;

  // Drops non-minimal elements so the basis is an antichain.
  void minimize() {
    std::sort(basis.begin(), basis.end());
    basis.erase(std::unique(basis.begin(), basis.end()), basis.end());
    std::vector<Marking> keep;
    for (std::size_t i = 0; i < basis.size(); ++i) {
      bool dominated = false;
      for (std::size_t j = 0; j < basis.size() && !dominated; ++j)
        dominated = j != i && covers(basis[i], basis[j]);
      if (!dominated) keep.push_back(basis[i]);
    }
    basis = std::move(keep);
  }
};

inline bool upward_contains(const UpwardClosedSet& u, const Marking& m) {
  for (const auto& b : u.basis)
    if (covers(m, b)) return true;
  return false;
}

inline TargetSpec upward_target(const UpwardClosedSet& u) {
  TargetSpec t;
  t.kind = TargetKind::UpwardClosed;
  t.contains = [u](const StateKey& k) { return upward_contains(u, key_marking(k)); };
  return t;
}

// Backward coverability: the set of markings from which u can be covered is
// upward closed; its basis is the fixpoint of minimal predecessors.
inline UpwardClosedSet coverability_basis(const PPN& net, UpwardClosedSet u) {
  u.minimize();
  const std::size_t P = net.num_places();
  std::deque<Marking> work(u.basis.begin(), u.basis.end());
  while (!work.empty()) {
    Marking b = std::move(work.front());
    work.pop_front();
    if (std::find(u.basis.begin(), u.basis.end(), b) == u.basis.end()) continue;  // superseded
    for (std::size_t t = 0; t < net.num_transitions(); ++t) {
      Marking m(P);
      for (std::size_t p = 0; p < P; ++p)
        m[p] = net.pre[p][t] + (b[p] > net.post[p][t] ? b[p] - net.post[p][t] : 0);
      if (upward_contains(u, m)) continue;
      std::vector<Marking> kept;
      for (auto& x : u.basis)
        if (!covers(x, m)) kept.push_back(std::move(x));
      kept.push_back(m);
      u.basis = std::move(kept);
      work.push_back(m);
    }
  }
  std::sort(u.basis.begin(), u.basis.end());
  return u;
}

inline ReachOracle coverability_oracle(const PPN& net, const UpwardClosedSet& u) {
  auto basis = std::make_shared<const UpwardClosedSet>(coverability_basis(net, u));
  return [basis](const StateKey& k) { return upward_contains(*basis, key_marking(k)); };
}

}  // namespace divergence
