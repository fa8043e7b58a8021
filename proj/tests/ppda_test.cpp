#include <gtest/gtest.h>

#include <deque>
#include <random>

#include "support.hpp"

using namespace divergence;

namespace {

Rational q(long n, long d = 1) { return make_rational(n, d); }

PdaRule rule(std::string from, std::optional<std::string> pop, std::string to, std::vector<std::string> push,
             Polynomial w = Polynomial::from_ints({1})) {
  return {std::move(from), std::move(pop), std::move(to), std::move(push), std::move(w)};
}

PPDA one_state() {
  PPDA m;
  m.states = {"q"};
  m.alphabet = {"a"};
  m.delta = {rule("q", "a", "q", {}), rule("q", "a", "q", {"a", "a"}, Polynomial::from_ints({1, 1}))};
  return m;
}

// Independent oracle: forward search on the pair graph of height-preserving
// rules, from each pair, looking for a pair with a push-two rule.
std::set<StateLetter> inc_brute_force(const PPDA& m) {
  std::set<StateLetter> seeds;
  for (const auto& r : m.delta)
    if (r.pop && r.push.size() == 2) seeds.insert({r.from, *r.pop});
  std::set<StateLetter> out;
  for (const auto& q_ : m.states)
    for (const auto& a : m.alphabet) {
      std::set<StateLetter> seen{{q_, a}};
      std::deque<StateLetter> work{{q_, a}};
      bool hit = false;
      while (!work.empty() && !hit) {
        StateLetter s = work.front();
        work.pop_front();
        if (seeds.count(s)) hit = true;
        for (const auto& r : m.delta)
          if (r.pop && r.push.size() == 1 && r.from == s.first && *r.pop == s.second) {
            StateLetter n{r.to, r.push[0]};
            if (seen.insert(n).second) work.push_back(n);
          }
      }
      if (hit) out.insert({q_, a});
    }
  return out;
}

}  // namespace

TEST(PpdaSuccessors, Examples) {
  PPDA stuck;
  stuck.states = {"q"};
  stuck.alphabet = {"a"};
  EXPECT_EQ(ppda_successors(stuck, {"q", {}}), ProbDist::dirac(PpdaCompiled(stuck).key({"q", {}})));

  PPDA m;
  m.states = {"q", "q1", "q2"};
  m.alphabet = {"a", "b"};
  m.delta = {rule("q", "a", "q1", {"a", "b"}, Polynomial::from_ints({1, 1})), rule("q", "a", "q2", {})};
  PpdaCompiled c(m);
  auto d = c.successors(c.key({"q", {"a"}}));
  ASSERT_EQ(d.support.size(), 2u);
  for (const auto& [k, p] : d.support) {
    PdaConfig cfg = c.config(k);
    if (cfg.state == "q1") {
      EXPECT_EQ(cfg.stack, (std::vector<std::string>{"a", "b"}));
      EXPECT_EQ(p, q(2, 3));
    } else {
      EXPECT_TRUE(cfg.stack.empty());
      EXPECT_EQ(p, q(1, 3));
    }
  }

  PPDA swap;
  swap.states = {"q", "q1"};
  swap.alphabet = {"a", "b"};
  swap.delta = {rule("q", "a", "q1", {"b"})};
  PpdaCompiled s(swap);
  auto one = s.successors(s.key({"q", {"a"}}));
  ASSERT_EQ(one.support.size(), 1u);
  EXPECT_EQ(s.config(one.support[0].first), (PdaConfig{"q1", {"b"}}));
}

TEST(PpdaSuccessors, ReplacesTopOnly) {
  PPDA m;
  m.states = {"q"};
  m.alphabet = {"a", "b", "c"};
  m.delta = {rule("q", "c", "q", {"a", "b"}, Polynomial::from_ints({1, 1}))};
  PpdaCompiled c(m);
  auto d = c.successors(c.key({"q", {"b", "c"}}));
  EXPECT_EQ(c.config(d.support[0].first).stack, (std::vector<std::string>{"b", "a", "b"}));
}

TEST(PpdaValidate, EmptyStackRulesPushAtMostOne) {
  PPDA m = one_state();
  m.delta.push_back(rule("q", std::nullopt, "q", {"a", "a"}));
  EXPECT_THROW(m.validate(), Error);
}

TEST(IncPairs, Examples) {
  PPDA m;
  m.states = {"q"};
  m.alphabet = {"a", "b", "c"};
  m.delta = {rule("q", "a", "q", {"a", "a"})};
  EXPECT_EQ(inc_pairs(m), (std::set<StateLetter>{{"q", "a"}}));

  m.delta = {rule("q", "a", "q", {"b"}), rule("q", "b", "q", {"b", "c"})};
  EXPECT_EQ(inc_pairs(m), (std::set<StateLetter>{{"q", "a"}, {"q", "b"}}));

  m.delta = {rule("q", "a", "q", {}), rule("q", "b", "q", {})};
  EXPECT_TRUE(inc_pairs(m).empty());
}

TEST(IncPairs, MatchesBruteForce) {
  std::mt19937_64 rng(4242);
  for (int i = 0; i < 200; ++i) {
    auto r = fixtures::random_pda(rng);
    auto inc = inc_pairs(r.pda);
    EXPECT_EQ(inc, inc_brute_force(r.pda)) << i;
    // one more backward step adds nothing
    for (const auto& x : r.pda.delta)
      if (x.pop && x.push.size() == 1 && inc.count({x.to, x.push[0]})) {
        EXPECT_TRUE(inc.count({x.from, *x.pop}));
      }
  }
}

TEST(IncreasingCheck, Violations) {
  Model server = fixtures::load_model("server.json");
  EXPECT_TRUE(increasing_check(server.ppda).empty());

  auto has = [](const std::vector<PdaViolation>& v, int c) {
    for (const auto& x : v)
      if (x.condition == c) return true;
    return false;
  };
  PPDA m;
  m.states = {"q"};
  m.alphabet = {"a", "b"};
  m.delta = {rule("q", "a", "q", {"a", "a"}, Polynomial::from_ints({1, 1})), rule("q", "b", "q", {})};
  EXPECT_TRUE(has(increasing_check(m), 4));
  EXPECT_TRUE(has(increasing_check(m), 1));

  m.alphabet = {"a"};
  m.delta = {rule("q", "a", "q", {"a", "a"}, Polynomial::from_ints({7}))};
  EXPECT_TRUE(has(increasing_check(m), 3));
}

TEST(PpdaDriftTest, Constants) {
  PdaDrift d = ppda_drift(one_state());
  EXPECT_EQ(d.B, 1);
  EXPECT_EQ(d.d, 1u);
  EXPECT_EQ(d.epsilon, q(1, 3));
  EXPECT_EQ(d.n0, 3);

  Model server = fixtures::load_model("server.json");
  PdaDrift s = ppda_drift(server.ppda);
  EXPECT_EQ(s.B, 1);
  EXPECT_EQ(s.d, 3u);
  EXPECT_EQ(s.epsilon, q(1, 3));
  EXPECT_EQ(s.n0, 13);
}

TEST(PpdaWitness, TargetHeightZero) {
  Model server = fixtures::load_model("server.json");
  auto cm = compile_model(server);
  Witness w = ppda_witness(cm.ppda, server.ppda_target);
  EXPECT_EQ(w.f1(cm.ppda->key({"qf", {}})), 1);
  EXPECT_LT(w.f1(cm.ppda->key({"q0", std::vector<std::string>(200, "r")})), 1);
}

TEST(ServerModel, HeightStepAndPushMass) {
  Model server = fixtures::load_model("server.json");
  PpdaCompiled c(server.ppda);
  PdaDrift d = ppda_drift(server.ppda);
  const std::size_t n0 = d.n0.get_ui();
  for (std::size_t h = 0; h <= n0 + 3; ++h)
    for (const auto& st : server.ppda.states) {
      PdaConfig cfg{st, std::vector<std::string>(h, "r")};
      auto dist = c.successors(c.key(cfg));
      EXPECT_EQ(dist.total(), 1);
      Rational up(0);
      for (const auto& [k, p] : dist.support) {
        long nh = static_cast<long>(c.config(k).stack.size());
        EXPECT_LE(std::abs(nh - static_cast<long>(h)), 1);
        if (nh > static_cast<long>(h)) up += p;
      }
      if (h >= n0) {
        EXPECT_GE(up, q(2, 3)) << st << " " << h;
      }
    }
}

TEST(ServerModel, WitnessDominatesSampling) {
  Model server = fixtures::load_model("server.json");
  auto cm = compile_model(server);
  Witness w = ppda_witness(cm.ppda, server.ppda_target);
  for (std::size_t h : {5, 10}) {
    auto s0 = cm.ppda->key({"q0", std::vector<std::string>(h, "r")});
    auto s = monte_carlo(cm.chain, s0, cm.target, 2000, 2000, 9);
    EXPECT_LE(s.ci99_low, w.f1(s0)) << h;
  }
}
