#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "divergence.hpp"

namespace divergence::fixtures {

inline std::string model_path(const std::string& name) { return std::string(DIVERGENCE_MODELS_DIR) + "/" + name; }

inline Model load_model(const std::string& name) { return parse_model(cli::read_file(model_path(name))); }

inline RandomWalk constant_walk(long up, long down) {
  return RandomWalk(Polynomial::from_ints({up}), Polynomial::from_ints({down}));
}

inline TargetSpec walk_target(std::uint64_t n) { return TargetSpec::explicit_finite({walk_key(n)}); }

// Birth-death chain on {0..n}, 0 and n absorbing in classes "low"/"high".
inline FiniteChain birth_death(std::uint32_t n, const Rational& p) {
  FiniteChain fc;
  for (std::uint32_t i = 0; i <= n; ++i) {
    fc.states.push_back(encode_tuple({i}));
    if (i == 0 || i == n)
      fc.rows.push_back({{i, Rational(1)}});
    else
      fc.rows.push_back({{i - 1, 1 - p}, {i + 1, p}});
  }
  fc.absorbing_classes = {{"low", {0}}, {"high", {n}}};
  return fc;
}

// Transient polynomial walks with degree <= 3 and coefficients <= 5, drawn
// deterministically from `seed`.
inline std::vector<RandomWalk> transient_walks(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> deg(0, 3), coef(0, 5), pos(1, 5);
  std::vector<RandomWalk> out;
  while (out.size() < count) {
    auto poly = [&] {
      int d = deg(rng);
      std::vector<long> c(d + 1);
      for (int i = 0; i <= d; ++i) c[i] = (i == 0 || i == d) ? pos(rng) : coef(rng);
      return Polynomial::from_ints(c);
    };
    RandomWalk w(poly(), poly());
    if (rw_classify(w).verdict == Verdict::Transient) out.push_back(w);
  }
  return out;
}

struct RandomPda {
  PPDA pda;
  std::size_t states = 0, letters = 0;
};

inline RandomPda random_pda(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nq(1, 6), ns(1, 4), nd(0, 25), kind(0, 3);
  RandomPda r;
  r.states = nq(rng);
  r.letters = ns(rng);
  for (std::size_t i = 0; i < r.states; ++i) r.pda.states.push_back("q" + std::to_string(i));
  for (std::size_t i = 0; i < r.letters; ++i) r.pda.alphabet.push_back("a" + std::to_string(i));
  std::uniform_int_distribution<std::size_t> q(0, r.states - 1), a(0, r.letters - 1);
  const int rules = nd(rng);
  for (int i = 0; i < rules; ++i) {
    PdaRule rule;
    rule.from = r.pda.states[q(rng)];
    rule.to = r.pda.states[q(rng)];
    rule.pop = r.pda.alphabet[a(rng)];
    const int k = kind(rng);
    const std::size_t len = k == 0 ? 0 : k == 1 ? 1 : 2;
    for (std::size_t j = 0; j < len; ++j) rule.push.push_back(r.pda.alphabet[a(rng)]);
    rule.weight = len == 2 ? Polynomial::from_ints({1, 1}) : Polynomial::from_ints({1});
    r.pda.delta.push_back(rule);
  }
  return r;
}

}  // namespace divergence::fixtures
