#include <gtest/gtest.h>

#include <deque>
#include <random>
#include <set>

#include "support.hpp"

using namespace divergence;

namespace {

Rational q(long n, long d = 1) { return make_rational(n, d); }

// One place; t1 consumes a token, t2 produces one.
PPN counter(MultiPolynomial w2) {
  PPN n;
  n.places = {"p"};
  n.transitions = {"t1", "t2"};
  n.pre = {{1, 0}};
  n.post = {{0, 1}};
  n.weights = {MultiPolynomial::constant(1, q(1)), std::move(w2)};
  n.m0 = {1};
  return n;
}

bool forward_covers(const PPN& net, const Marking& start, const UpwardClosedSet& u) {
  std::set<Marking> seen{start};
  std::deque<Marking> work{start};
  while (!work.empty()) {
    Marking m = work.front();
    work.pop_front();
    if (upward_contains(u, m)) return true;
    for (std::size_t t = 0; t < net.num_transitions(); ++t)
      if (net.enabled(m, t)) {
        Marking n = net.fire(m, t);
        if (seen.insert(n).second) work.push_back(n);
      }
  }
  return false;
}

}  // namespace

TEST(PpnSuccessors, Examples) {
  PPN n = counter(MultiPolynomial::constant(1, q(1)));
  auto d = ppn_successors(n, {1});
  ASSERT_EQ(d.support.size(), 2u);
  EXPECT_EQ(d.support[0].second, q(1, 2));
  EXPECT_EQ(d.support[1].second, q(1, 2));

  PPN grow = counter(MultiPolynomial(1, {{{0}, q(1)}, {{1}, q(1)}}));
  d = ppn_successors(grow, {3});
  EXPECT_EQ(d.support[0], std::make_pair(marking_key({2}), q(1, 5)));
  EXPECT_EQ(d.support[1], std::make_pair(marking_key({4}), q(4, 5)));
}

TEST(PpnSuccessors, DeadlockSelfLoop) {
  PPN n;
  n.places = {"a", "b"};
  n.transitions = {"t"};
  n.pre = {{1}, {0}};
  n.post = {{0}, {1}};
  n.weights = {MultiPolynomial::constant(2, q(1))};
  n.m0 = {0, 1};
  EXPECT_EQ(ppn_successors(n, {0, 1}), ProbDist::dirac(marking_key({0, 1})));
}

TEST(PpnSuccessors, ScaleInvariant) {
  PPN a = counter(MultiPolynomial(1, {{{0}, q(1)}, {{2}, q(3)}}));
  PPN b = a;
  for (auto& w : b.weights) w = w.scaled(q(7, 3));
  for (std::uint64_t m = 0; m < 6; ++m) EXPECT_EQ(ppn_successors(a, {m}), ppn_successors(b, {m}));
}

TEST(PpnValidate, Dimensions) {
  PPN n = counter(MultiPolynomial::constant(1, q(1)));
  n.pre = {{1, 0, 0}};
  EXPECT_THROW(n.validate(), Error);
  n = counter(MultiPolynomial::constant(1, q(0)));
  EXPECT_THROW(n.validate(), Error);
}

TEST(UpwardContains, Examples) {
  EXPECT_TRUE(upward_contains({{{1, 0}}}, {2, 5}));
  EXPECT_FALSE(upward_contains({{{1, 0}}}, {0, 9}));
  EXPECT_TRUE(upward_contains({{{1, 1}, {0, 3}}}, {0, 3}));
}

TEST(CoverabilityOracle, Examples) {
  PPN move;
  move.places = {"p1", "p2"};
  move.transitions = {"t"};
  move.pre = {{1}, {0}};
  move.post = {{0}, {1}};
  move.weights = {MultiPolynomial::constant(2, q(1))};
  move.m0 = {1, 0};
  UpwardClosedSet u{{{0, 1}}};
  auto oracle = coverability_oracle(move, u);
  EXPECT_TRUE(oracle(marking_key({1, 0})));
  EXPECT_TRUE(oracle(marking_key({0, 2})));
  EXPECT_FALSE(oracle(marking_key({0, 0})));

  PPN idle;
  idle.places = {"p1", "p2"};
  idle.pre = {{}, {}};
  idle.post = {{}, {}};
  idle.m0 = {0, 0};
  auto none = coverability_oracle(idle, u);
  EXPECT_FALSE(none(marking_key({5, 0})));
  EXPECT_TRUE(none(marking_key({0, 1})));
}

TEST(CoverabilityOracle, AgreesWithForwardSearch) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> small(0, 2), places(2, 4), transitions(1, 4);
  for (int trial = 0; trial < 60; ++trial) {
    PPN net;
    const int P = places(rng), T = transitions(rng);
    for (int p = 0; p < P; ++p) net.places.push_back("p" + std::to_string(p));
    for (int t = 0; t < T; ++t) net.transitions.push_back("t" + std::to_string(t));
    net.pre.assign(P, std::vector<std::uint64_t>(T));
    net.post.assign(P, std::vector<std::uint64_t>(T));
    // Conservative nets (pre and post carry equal token counts) keep the
    // reachability sets finite.
    for (int t = 0; t < T; ++t) {
      int tokens = 1 + small(rng);
      for (int k = 0; k < tokens; ++k) {
        net.pre[std::uniform_int_distribution<int>(0, P - 1)(rng)][t]++;
        net.post[std::uniform_int_distribution<int>(0, P - 1)(rng)][t]++;
      }
      net.weights.push_back(MultiPolynomial::constant(P, q(1)));
    }
    net.m0.assign(P, 0);
    UpwardClosedSet u;
    for (int b = 0; b < 2; ++b) {
      Marking m(P);
      for (auto& x : m) x = small(rng);
      u.basis.push_back(m);
    }
    auto oracle = coverability_oracle(net, u);
    Marking m(P, 0);
    // every marking with at most 4 tokens
    std::function<void(int, int)> each = [&](int p, int left) {
      if (p == P) {
        EXPECT_EQ(oracle(marking_key(m)), forward_covers(net, m, u)) << trial;
        return;
      }
      for (int k = 0; k <= left; ++k) {
        m[p] = k;
        each(p + 1, left - k);
      }
      m[p] = 0;
    };
    each(0, 4);
  }
}

TEST(CoverabilityBasis, IsMinimal) {
  PPN n = counter(MultiPolynomial::constant(1, q(1)));
  auto b = coverability_basis(n, UpwardClosedSet{{{5}, {7}}});
  ASSERT_EQ(b.basis.size(), 1u);
  EXPECT_EQ(b.basis[0], Marking{0});
}

TEST(PpnModel, BundledNetBracket) {
  Model m = fixtures::load_model("mutex.json");
  auto c = compile_model(m);
  auto t = truncation_bracket(c.chain, c.s0, c.target, 2000);
  EXPECT_GT(t.interval.low, 0);
  auto oracle = coverability_oracle(m.ppn, m.ppn_target);
  EXPECT_TRUE(oracle(c.s0));
}
