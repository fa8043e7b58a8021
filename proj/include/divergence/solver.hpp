#pragma once
//
// Absorption probabilities on a FiniteChain.
//
// absorb_probabilities is exact: sparse elimination over the states that are
// reachable from `from` and can reach an absorbing class. absorb_bounds is a
// certified under-approximation in 2^-62 fixed point, for chains too large
// to eliminate; absorb picks between them.
//

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "divergence/chain.hpp"
#include "divergence/error.hpp"
#include "divergence/rational.hpp"

namespace divergence {

namespace detail {

struct ChainShape {
  std::vector<int> cls;                // class index or -1
  std::vector<char> reachable;         // forward from `from`
  std::vector<char> reaches_abs;       // backward from absorbing states
  std::vector<std::uint32_t> bfs;      // reachable states in BFS order
};

inline ChainShape analyse(const FiniteChain& fc, std::uint32_t from) {
  const auto n = static_cast<std::uint32_t>(fc.states.size());
  ChainShape s;
  s.cls.assign(n, -1);
  for (std::size_t c = 0; c < fc.absorbing_classes.size(); ++c)
    for (auto i : fc.absorbing_classes[c].second) s.cls[i] = static_cast<int>(c);

  s.reachable.assign(n, 0);
  s.reachable[from] = 1;
  s.bfs.push_back(from);
  for (std::size_t h = 0; h < s.bfs.size(); ++h)
    for (const auto& [j, p] : fc.rows[s.bfs[h]])
      if (!s.reachable[j]) {
        s.reachable[j] = 1;
        s.bfs.push_back(j);
      }

  std::vector<std::vector<std::uint32_t>> pred(n);
  for (auto i : s.bfs)
    for (const auto& [j, p] : fc.rows[i])
      if (j != i) pred[j].push_back(i);
  s.reaches_abs.assign(n, 0);
  std::vector<std::uint32_t> stack;
  for (auto i : s.bfs)
    if (s.cls[i] >= 0) {
      s.reaches_abs[i] = 1;
      stack.push_back(i);
    }
  while (!stack.empty()) {
    auto j = stack.back();
    stack.pop_back();
    for (auto i : pred[j])
      if (!s.reaches_abs[i]) {
        s.reaches_abs[i] = 1;
        stack.push_back(i);
      }
  }
  return s;
}

inline std::uint32_t require_index(const FiniteChain& fc, const StateKey& from) {
  auto idx = fc.index_of(from);
  if (!idx) throw Error(ErrorCode::MalformedChain, "start state is not in the chain");
  return *idx;
}

}  // namespace detail

// Exact elimination. Returns nullopt if the number of stored coefficients
// would exceed fill_cap (0 means no cap).
inline std::optional<std::map<std::string, Rational>> absorb_probabilities_capped(const FiniteChain& fc,
                                                                                   std::uint32_t from,
                                                                                   std::size_t fill_cap) {
  const std::size_t nclass = fc.absorbing_classes.size();
  std::map<std::string, Rational> out;
  for (const auto& [name, members] : fc.absorbing_classes) out[name] = 0;

  auto shape = detail::analyse(fc, from);
  if (shape.cls[from] >= 0) {
    out[fc.absorbing_classes[shape.cls[from]].first] = 1;
    return out;
  }
  if (!shape.reaches_abs[from]) return out;

  // Unknowns in BFS order; position 0 is `from`.
  std::unordered_map<std::uint32_t, std::uint32_t> var;
  std::vector<std::uint32_t> vars;
  for (auto i : shape.bfs)
    if (shape.cls[i] < 0 && shape.reaches_abs[i]) {
      var.emplace(i, static_cast<std::uint32_t>(vars.size()));
      vars.push_back(i);
    }
  const auto m = static_cast<std::uint32_t>(vars.size());

  // Row v: x_v = sum_w q[v][w] x_w + b[v]. Diagonal kept inside q.
  std::vector<std::map<std::uint32_t, Rational>> q(m);
  std::vector<std::vector<Rational>> b(m, std::vector<Rational>(nclass, Rational(0)));
  std::vector<std::vector<std::uint32_t>> users(m);
  std::size_t fill = 0;
  for (std::uint32_t v = 0; v < m; ++v) {
    for (const auto& [j, p] : fc.rows[vars[v]]) {
      if (shape.cls[j] >= 0) {
        b[v][shape.cls[j]] += p;
      } else if (auto it = var.find(j); it != var.end()) {
        auto [pos, fresh] = q[v].try_emplace(it->second, 0);
        pos->second += p;
        if (fresh) {
          users[it->second].push_back(v);
          ++fill;
        }
      }
    }
  }

  std::vector<char> gone(m, 0);
  // Eliminate in reverse BFS order; `from` (variable 0) is never eliminated.
  for (std::uint32_t k = m - 1; k >= 1; --k) {
    Rational diag = 1;
    if (auto it = q[k].find(k); it != q[k].end()) {
      diag -= it->second;
      q[k].erase(it);
    }
    if (diag <= 0) throw Error(ErrorCode::MalformedChain, "singular pivot during elimination");
    for (auto& [w, c] : q[k]) c /= diag;
    for (auto& c : b[k]) c /= diag;
    gone[k] = 1;

    std::vector<std::uint32_t> us = std::move(users[k]);
    std::sort(us.begin(), us.end());
    us.erase(std::unique(us.begin(), us.end()), us.end());
    for (auto i : us) {
      if (gone[i]) continue;
      auto it = q[i].find(k);
      if (it == q[i].end()) continue;
      Rational f = it->second;
      q[i].erase(it);
      for (const auto& [w, c] : q[k]) {
        auto [pos, fresh] = q[i].try_emplace(w, 0);
        pos->second += f * c;
        if (fresh) {
          users[w].push_back(i);
          ++fill;
        }
      }
      for (std::size_t c = 0; c < nclass; ++c)
        if (b[k][c] != 0) b[i][c] += f * b[k][c];
    }
    q[k].clear();
    if (fill_cap && fill > fill_cap) return std::nullopt;
  }

  Rational diag = 1;
  if (auto it = q[0].find(0); it != q[0].end()) diag -= it->second;
  if (diag <= 0) throw Error(ErrorCode::MalformedChain, "singular pivot during elimination");
  for (std::size_t c = 0; c < nclass; ++c) out[fc.absorbing_classes[c].first] = b[0][c] / diag;
  return out;
}

inline std::map<std::string, Rational> absorb_probabilities(const FiniteChain& fc, const StateKey& from) {
  fc.validate();
  return *absorb_probabilities_capped(fc, detail::require_index(fc, from), 0);
}

struct AbsorbBounds {
  std::map<std::string, Rational> low;
  std::map<std::string, Rational> up;
  Rational never{0};  // lower bound on the mass that is never absorbed
  Rational gap{0};    // 1 - sum(low) - never
  bool exact = false;
};

// Lower bounds by monotone Gauss-Seidel iteration from zero with every
// product rounded down; sound for any number of sweeps.
inline AbsorbBounds absorb_bounds(const FiniteChain& fc, std::uint32_t from, const Rational& gap_target,
                                  std::size_t max_sweeps = 100000) {
  constexpr unsigned kBits = 62;
  constexpr std::uint64_t kOne = std::uint64_t{1} << kBits;
  const std::size_t nclass = fc.absorbing_classes.size();
  const std::size_t width = nclass + 1;  // last slot: never absorbed
  auto shape = detail::analyse(fc, from);

  AbsorbBounds res;
  for (const auto& [name, members] : fc.absorbing_classes) res.low[name] = res.up[name] = 0;
  if (shape.cls[from] >= 0) {
    res.low[fc.absorbing_classes[shape.cls[from]].first] = 1;
    res.up = res.low;
    res.exact = true;
    return res;
  }
  if (!shape.reaches_abs[from]) {
    res.never = 1;
    res.exact = true;
    return res;
  }

  std::vector<std::uint32_t> order;
  std::unordered_map<std::uint32_t, std::uint32_t> slot;
  for (auto i : shape.bfs) slot.emplace(i, static_cast<std::uint32_t>(slot.size()));
  const std::size_t n = shape.bfs.size();
  std::vector<std::uint64_t> val(n * width, 0);
  for (std::size_t s = 0; s < n; ++s) {
    auto i = shape.bfs[s];
    if (shape.cls[i] >= 0)
      val[s * width + shape.cls[i]] = kOne;
    else if (!shape.reaches_abs[i])
      val[s * width + nclass] = kOne;
    else
      order.push_back(static_cast<std::uint32_t>(s));
  }

  std::vector<std::size_t> start{0};
  std::vector<std::uint32_t> target;
  std::vector<std::uint64_t> prob;
  const Rational scale(pow2(kBits));
  for (auto s : order) {
    for (const auto& [j, p] : fc.rows[shape.bfs[s]]) {
      Integer fp = floor_int(p * scale);
      if (fp == 0) continue;
      target.push_back(slot.at(j));
      prob.push_back(fp.get_ui());
    }
    start.push_back(target.size());
  }

  const Integer target_int = floor_int(gap_target * scale);
  const std::uint64_t gap_goal = target_int >= Integer(kOne) ? kOne : (target_int <= 0 ? 0 : target_int.get_ui());
  std::vector<unsigned __int128> acc(width);

  auto sweep = [&](bool forward) {
    bool changed = false;
    const std::size_t cnt = order.size();
    for (std::size_t t = 0; t < cnt; ++t) {
      const std::size_t r = forward ? t : cnt - 1 - t;
      const std::size_t s = order[r];
      std::fill(acc.begin(), acc.end(), 0);
      for (std::size_t e = start[r]; e < start[r + 1]; ++e) {
        const std::uint64_t* src = &val[std::size_t{target[e]} * width];
        for (std::size_t c = 0; c < width; ++c)
          if (src[c]) acc[c] += static_cast<unsigned __int128>(prob[e]) * src[c];
      }
      for (std::size_t c = 0; c < width; ++c) {
        auto v = static_cast<std::uint64_t>(acc[c] >> kBits);
        if (v > val[s * width + c]) {
          val[s * width + c] = v;
          changed = true;
        }
      }
    }
    return changed;
  };

  auto gap_at_from = [&] {
    unsigned __int128 sum = 0;
    for (std::size_t c = 0; c < width; ++c) sum += val[c];  // `from` has slot 0
    return sum >= kOne ? std::uint64_t{0} : static_cast<std::uint64_t>(kOne - sum);
  };

  for (std::size_t k = 0; k < max_sweeps; ++k) {
    bool changed = sweep(k % 2 == 0);
    if (gap_at_from() <= gap_goal || !changed) break;
  }

  Rational total(0);
  for (std::size_t c = 0; c < nclass; ++c) {
    Rational l = make_rational(Integer(val[c]), pow2(kBits));
    res.low[fc.absorbing_classes[c].first] = l;
    total += l;
  }
  res.never = make_rational(Integer(val[nclass]), pow2(kBits));
  total += res.never;
  res.gap = total >= 1 ? Rational(0) : Rational(1 - total);
  for (std::size_t c = 0; c < nclass; ++c) {
    const auto& name = fc.absorbing_classes[c].first;
    Rational u = res.low[name] + res.gap;
    res.up[name] = u > 1 ? Rational(1) : u;
  }
  return res;
}

struct SolveOptions {
  std::size_t exact_limit = 2000;     // unknowns
  std::size_t fill_cap = 400000;      // stored coefficients during elimination
  Rational gap_target = make_rational(1, 1000000000);
};

// Exact when small enough, otherwise certified bounds.
inline AbsorbBounds absorb(const FiniteChain& fc, std::uint32_t from, const SolveOptions& opt = {}) {
  if (fc.states.size() <= opt.exact_limit) {
    if (auto exact = absorb_probabilities_capped(fc, from, opt.fill_cap)) {
      AbsorbBounds res;
      res.low = *exact;
      res.up = *exact;
      Rational sum(0);
      for (const auto& [name, p] : *exact) sum += p;
      res.never = 1 - sum;
      res.exact = true;
      return res;
    }
  }
  return absorb_bounds(fc, from, opt.gap_target);
}

}  // namespace divergence
