#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "divergence/error.hpp"
#include "divergence/rational.hpp"

namespace divergence {

// Canonical byte encoding of a model state. Frontends are responsible for
// injectivity; the engine only compares, hashes and stores keys.
struct StateKey {
  std::string bytes;

  StateKey() = default;
  explicit StateKey(std::string b) : bytes(std::move(b)) {}

  auto operator<=>(const StateKey&) const = default;
  bool operator==(const StateKey&) const = default;
};

struct StateKeyHash {
  std::size_t operator()(const StateKey& k) const noexcept { return std::hash<std::string>{}(k.bytes); }
};

class KeyWriter {
 public:
  KeyWriter& u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) out_.push_back(static_cast<char>((v >> shift) & 0xFF));
    return *this;
  }
  KeyWriter& u64(std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) out_.push_back(static_cast<char>((v >> shift) & 0xFF));
    return *this;
  }
  KeyWriter& word(std::string_view w) {
    u32(static_cast<std::uint32_t>(w.size()));
    out_.append(w);
    return *this;
  }
  StateKey finish() { return StateKey(std::move(out_)); }

 private:
  std::string out_;
};

class KeyReader {
 public:
  explicit KeyReader(const StateKey& key) : data_(key.bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(data_[pos_++]);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | static_cast<unsigned char>(data_[pos_++]);
    return v;
  }
  std::string word() {
    std::uint32_t n = u32();
    need(n);
    std::string w(data_.substr(pos_, n));
    pos_ += n;
    return w;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw Error(ErrorCode::MalformedChain, "truncated state key");
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

inline StateKey encode_tuple(const std::vector<std::uint64_t>& values) {
  KeyWriter w;
  w.u32(static_cast<std::uint32_t>(values.size()));
  for (auto v : values) w.u64(v);
  return w.finish();
}

inline std::vector<std::uint64_t> decode_tuple(const StateKey& key) {
  KeyReader r(key);
  std::vector<std::uint64_t> out(r.u32());
  for (auto& v : out) v = r.u64();
  if (!r.done()) throw Error(ErrorCode::MalformedChain, "trailing bytes in tuple key");
  return out;
}

// Finite support, sorted by key, probabilities exact and summing to 1.
struct ProbDist {
  std::vector<std::pair<StateKey, Rational>> support;

  bool operator==(const ProbDist&) const = default;

  Rational total() const {
    Rational s(0);
    for (const auto& [k, p] : support) s += p;
    return s;
  }

  static ProbDist dirac(StateKey k) {
    ProbDist d;
    d.support.emplace_back(std::move(k), Rational(1));
    return d;
  }
};

inline ProbDist normalize_weights(std::vector<std::pair<StateKey, Rational>> weighted) {
  if (weighted.empty()) throw Error(ErrorCode::EmptySupport, "no weighted successors");
  std::map<StateKey, Rational> merged;
  Rational total(0);
  for (auto& [k, w] : weighted) {
    if (w <= 0) throw Error(ErrorCode::NonPositiveWeight, "weight " + to_string(w) + " is not positive");
    merged[k] += w;
    total += w;
  }
  ProbDist d;
  d.support.reserve(merged.size());
  for (auto& [k, w] : merged) d.support.emplace_back(k, w / total);
  return d;
}

struct EffectiveChain {
  std::function<ProbDist(const StateKey&)> successors;
  std::function<std::string(const StateKey&)> describe;
};

enum class TargetKind { ExplicitFinite, UpwardClosed, Predicate };

struct TargetSpec {
  std::function<bool(const StateKey&)> contains;
  TargetKind kind = TargetKind::Predicate;
  std::vector<StateKey> members;  // only for ExplicitFinite

  static TargetSpec explicit_finite(std::vector<StateKey> keys) {
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    TargetSpec t;
    t.kind = TargetKind::ExplicitFinite;
    t.members = keys;
    t.contains = [keys](const StateKey& k) { return std::binary_search(keys.begin(), keys.end(), k); };
    return t;
  }

  static TargetSpec predicate(std::function<bool(const StateKey&)> pred) {
    TargetSpec t;
    t.kind = TargetKind::Predicate;
    t.contains = std::move(pred);
    return t;
  }
};

struct Interval {
  Rational low{0};
  Rational up{1};

  Rational width() const { return up - low; }
  bool contains(const Rational& x) const { return low <= x && x <= up; }
  bool intersects(const Interval& o) const { return low <= o.up && o.low <= up; }
};

// States are indices; rows hold (successor index, probability). Absorbing
// states carry a self-loop of probability 1 and belong to exactly one class.
struct FiniteChain {
  std::vector<StateKey> states;
  std::vector<std::vector<std::pair<std::uint32_t, Rational>>> rows;
  std::vector<std::pair<std::string, std::vector<std::uint32_t>>> absorbing_classes;

  std::optional<std::uint32_t> index_of(const StateKey& k) const {
    for (std::uint32_t i = 0; i < states.size(); ++i)
      if (states[i] == k) return i;
    return std::nullopt;
  }

  // Throws MalformedChain on any structural defect.
  void validate() const {
    if (rows.size() != states.size()) throw Error(ErrorCode::MalformedChain, "row count differs from state count");
    const auto n = static_cast<std::uint32_t>(states.size());
    for (std::uint32_t i = 0; i < n; ++i) {
      Rational sum(0);
      for (const auto& [j, p] : rows[i]) {
        if (j >= n) throw Error(ErrorCode::MalformedChain, "successor index out of range");
        if (p <= 0 || p > 1) throw Error(ErrorCode::MalformedChain, "probability outside (0,1]");
        sum += p;
      }
      if (sum != 1) throw Error(ErrorCode::MalformedChain, "row " + std::to_string(i) + " sums to " + to_string(sum));
    }
    std::vector<char> seen(n, 0);
    for (const auto& [name, members] : absorbing_classes) {
      for (auto i : members) {
        if (i >= n) throw Error(ErrorCode::MalformedChain, "class '" + name + "' has index out of range");
        if (seen[i]) throw Error(ErrorCode::MalformedChain, "absorbing classes overlap");
        seen[i] = 1;
        if (rows[i].size() != 1 || rows[i][0].first != i)
          throw Error(ErrorCode::MalformedChain, "absorbing state without a probability-1 self-loop");
      }
    }
  }
};

}  // namespace divergence
