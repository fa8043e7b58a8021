#pragma once
//
// JSON model files. Every kind carries "kind", its structure, "s0" and
// "target"; unknown fields are rejected. Rationals are integers or "p/q"
// strings, univariate polynomials are coefficient arrays (index = degree).
//

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "divergence/chain.hpp"
#include "divergence/crp.hpp"
#include "divergence/error.hpp"
#include "divergence/petrinet.hpp"
#include "divergence/pocs.hpp"
#include "divergence/polynomial.hpp"
#include "divergence/ppda.hpp"
#include "divergence/randomwalk.hpp"

namespace divergence {

using Json = nlohmann::ordered_json;

enum class ModelKind { RandomWalk, PPN, POCS, PPDA };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::RandomWalk: return "random_walk";
    case ModelKind::PPN: return "ppn";
    case ModelKind::POCS: return "pocs";
    case ModelKind::PPDA: return "ppda";
  }
  return "unknown";
}

struct Model {
  ModelKind kind = ModelKind::RandomWalk;

  RandomWalk walk;
  std::uint64_t walk_s0 = 0;
  std::uint64_t walk_target = 0;

  PPN ppn;
  UpwardClosedSet ppn_target;

  POCS pocs;
  PocsConfig pocs_s0;
  std::vector<PocsConfig> pocs_target;

  PPDA ppda;
  PdaConfig ppda_s0;
  std::vector<PdaConfig> ppda_target;

  bool operator==(const Model& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
      case ModelKind::RandomWalk: return walk == o.walk && walk_s0 == o.walk_s0 && walk_target == o.walk_target;
      case ModelKind::PPN:
        return ppn.places == o.ppn.places && ppn.transitions == o.ppn.transitions && ppn.pre == o.ppn.pre &&
               ppn.post == o.ppn.post && ppn.weights == o.ppn.weights && ppn.m0 == o.ppn.m0 &&
               ppn_target.basis == o.ppn_target.basis;
      case ModelKind::POCS: return pocs == o.pocs && pocs_s0 == o.pocs_s0 && pocs_target == o.pocs_target;
      case ModelKind::PPDA: return ppda == o.ppda && ppda_s0 == o.ppda_s0 && ppda_target == o.ppda_target;
    }
    return false;
  }
};

namespace io {

[[noreturn]] inline void fail(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::ParseError, path + ": " + msg);
}

inline void only_fields(const Json& j, const std::string& path, const std::set<std::string>& allowed,
                        const std::set<std::string>& required) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) fail(path + "." + k, "unknown field");
  for (const auto& k : required)
    if (!j.contains(k)) fail(path + "." + k, "missing field");
}

inline Rational rational(const Json& j, const std::string& path) {
  if (j.is_number_integer()) return Rational(Integer(j.dump()));
  if (j.is_string()) {
    try {
      return parse_rational(j.get<std::string>());
    } catch (const Error& e) {
      fail(path, e.what());
    }
  }
  fail(path, "expected an integer or a \"p/q\" string");
}

inline std::uint64_t natural(const Json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    fail(path, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

inline std::string text(const Json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

inline std::vector<std::string> texts(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(text(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline Polynomial polynomial(const Json& j, const std::string& path) {
  if (!j.is_array()) return Polynomial::constant(rational(j, path));
  std::vector<Rational> c;
  for (std::size_t i = 0; i < j.size(); ++i) c.push_back(rational(j[i], path + "[" + std::to_string(i) + "]"));
  return Polynomial(std::move(c));
}

inline Json rational_json(const Rational& r) {
  if (r.get_den() == 1 && r.get_num().fits_slong_p()) return Json(r.get_num().get_si());
  return Json(to_string(r));
}

inline Json polynomial_json(const Polynomial& p) {
  if (p.is_constant()) return rational_json(p.coeff(0));
  Json a = Json::array();
  for (const auto& c : p.coeffs()) a.push_back(rational_json(c));
  return a;
}

inline std::vector<std::uint64_t> naturals(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of non-negative integers");
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(natural(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline MultiPolynomial multi_polynomial(const Json& j, std::size_t vars, const std::string& path) {
  if (!j.is_object()) return MultiPolynomial::constant(vars, rational(j, path));
  std::map<MultiPolynomial::Exponents, Rational> terms;
  for (const auto& [k, v] : j.items()) {
    MultiPolynomial::Exponents e;
    std::size_t pos = 0;
    while (pos <= k.size()) {
      auto comma = k.find(',', pos);
      std::string part = k.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos)
        fail(path + "." + k, "exponent keys are comma-separated naturals");
      e.push_back(static_cast<std::uint32_t>(std::stoul(part)));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (e.size() != vars) fail(path + "." + k, "exponent vector needs one entry per place");
    terms[e] += rational(v, path + "." + k);
  }
  return MultiPolynomial(vars, std::move(terms));
}

inline Json multi_polynomial_json(const MultiPolynomial& p) {
  if (p.is_constant() && p.terms().size() == 1) return rational_json(p.terms().begin()->second);
  Json o = Json::object();
  for (const auto& [e, c] : p.terms()) {
    std::string k;
    for (std::size_t i = 0; i < e.size(); ++i) k += (i ? "," : "") + std::to_string(e[i]);
    o[k] = rational_json(c);
  }
  return o;
}

inline PocsConfig pocs_config(const Json& j, const std::string& path) {
  only_fields(j, path, {"state", "channels"}, {"state"});
  PocsConfig c;
  c.state = text(j["state"], path + ".state");
  if (j.contains("channels")) {
    if (!j["channels"].is_object()) fail(path + ".channels", "expected an object");
    for (const auto& [k, v] : j["channels"].items()) c.channels[k] = texts(v, path + ".channels." + k);
  }
  return c;
}

inline PdaConfig pda_config(const Json& j, const std::string& path) {
  only_fields(j, path, {"state", "stack"}, {"state"});
  PdaConfig c;
  c.state = text(j["state"], path + ".state");
  if (j.contains("stack")) c.stack = texts(j["stack"], path + ".stack");
  return c;
}

// Channels absent from a configuration are empty; fill them in so configs
// compare equal regardless of how they were written.
inline void complete_channels(const POCS& s, PocsConfig& c) {
  for (const auto& [name, w] : c.channels)
    if (std::find(s.channels.begin(), s.channels.end(), name) == s.channels.end())
      throw Error(ErrorCode::ValidationError, "unknown channel '" + name + "' in a configuration");
  for (const auto& ch : s.channels) c.channels[ch];
}

inline Model parse_walk(const Json& j) {
  only_fields(j, "$", {"kind", "up", "down", "s0", "target"}, {"kind", "up", "down", "s0", "target"});
  Model m;
  m.kind = ModelKind::RandomWalk;
  m.walk = RandomWalk(polynomial(j["up"], "$.up"), polynomial(j["down"], "$.down"));
  m.walk_s0 = natural(j["s0"], "$.s0");
  m.walk_target = natural(j["target"], "$.target");
  return m;
}

inline Model parse_ppn(const Json& j) {
  only_fields(j, "$", {"kind", "places", "transitions", "pre", "post", "weights", "s0", "target"},
              {"kind", "places", "transitions", "pre", "post", "weights", "s0", "target"});
  Model m;
  m.kind = ModelKind::PPN;
  PPN& n = m.ppn;
  n.places = texts(j["places"], "$.places");
  n.transitions = texts(j["transitions"], "$.transitions");
  for (const char* which : {"pre", "post"}) {
    const Json& mat = j[which];
    std::string path = std::string("$.") + which;
    if (!mat.is_array()) fail(path, "expected a matrix [place][transition]");
    auto& dst = std::string(which) == "pre" ? n.pre : n.post;
    for (std::size_t i = 0; i < mat.size(); ++i) dst.push_back(naturals(mat[i], path + "[" + std::to_string(i) + "]"));
  }
  if (!j["weights"].is_array()) fail("$.weights", "expected one weight per transition");
  for (std::size_t i = 0; i < j["weights"].size(); ++i)
    n.weights.push_back(multi_polynomial(j["weights"][i], n.places.size(), "$.weights[" + std::to_string(i) + "]"));
  n.m0 = naturals(j["s0"], "$.s0");
  only_fields(j["target"], "$.target", {"upward"}, {"upward"});
  if (!j["target"]["upward"].is_array()) fail("$.target.upward", "expected a list of markings");
  for (std::size_t i = 0; i < j["target"]["upward"].size(); ++i)
    m.ppn_target.basis.push_back(naturals(j["target"]["upward"][i], "$.target.upward[" + std::to_string(i) + "]"));
  n.validate();
  for (const auto& b : m.ppn_target.basis)
    if (b.size() != n.places.size()) throw Error(ErrorCode::ValidationError, "target marking has wrong dimension");
  return m;
}

inline Model parse_pocs(const Json& j) {
  only_fields(j, "$", {"kind", "states", "channels", "input_channel", "alphabet", "transitions", "s0", "target"},
              {"kind", "states", "channels", "input_channel", "alphabet", "transitions", "s0", "target"});
  Model m;
  m.kind = ModelKind::POCS;
  POCS& s = m.pocs;
  s.states = texts(j["states"], "$.states");
  s.channels = texts(j["channels"], "$.channels");
  s.input_channel = text(j["input_channel"], "$.input_channel");
  s.alphabet = texts(j["alphabet"], "$.alphabet");
  if (!j["transitions"].is_array()) fail("$.transitions", "expected an array");
  for (std::size_t i = 0; i < j["transitions"].size(); ++i) {
    const Json& t = j["transitions"][i];
    std::string path = "$.transitions[" + std::to_string(i) + "]";
    only_fields(t, path, {"from", "recv_channel", "recv", "send_channel", "send", "to", "weight"},
                {"from", "recv_channel", "recv", "send_channel", "send", "to", "weight"});
    PocsTransition tr;
    tr.from = text(t["from"], path + ".from");
    tr.recv_channel = text(t["recv_channel"], path + ".recv_channel");
    if (!t["recv"].is_null()) tr.recv = text(t["recv"], path + ".recv");
    tr.send_channel = text(t["send_channel"], path + ".send_channel");
    if (!t["send"].is_null()) tr.send = text(t["send"], path + ".send");
    tr.to = text(t["to"], path + ".to");
    tr.weight = polynomial(t["weight"], path + ".weight");
    s.delta.push_back(std::move(tr));
  }
  pocs_require_valid(s);
  m.pocs_s0 = pocs_config(j["s0"], "$.s0");
  complete_channels(s, m.pocs_s0);
  if (!j["target"].is_array()) fail("$.target", "expected a list of configurations");
  for (std::size_t i = 0; i < j["target"].size(); ++i) {
    m.pocs_target.push_back(pocs_config(j["target"][i], "$.target[" + std::to_string(i) + "]"));
    complete_channels(s, m.pocs_target.back());
  }
  return m;
}

inline Model parse_ppda(const Json& j) {
  only_fields(j, "$", {"kind", "states", "alphabet", "transitions", "s0", "target"},
              {"kind", "states", "alphabet", "transitions", "s0", "target"});
  Model m;
  m.kind = ModelKind::PPDA;
  PPDA& a = m.ppda;
  a.states = texts(j["states"], "$.states");
  a.alphabet = texts(j["alphabet"], "$.alphabet");
  if (!j["transitions"].is_array()) fail("$.transitions", "expected an array");
  for (std::size_t i = 0; i < j["transitions"].size(); ++i) {
    const Json& t = j["transitions"][i];
    std::string path = "$.transitions[" + std::to_string(i) + "]";
    only_fields(t, path, {"from", "pop", "to", "push", "weight"}, {"from", "pop", "to", "push", "weight"});
    PdaRule r;
    r.from = text(t["from"], path + ".from");
    if (!t["pop"].is_null()) r.pop = text(t["pop"], path + ".pop");
    r.to = text(t["to"], path + ".to");
    r.push = texts(t["push"], path + ".push");
    r.weight = polynomial(t["weight"], path + ".weight");
    a.delta.push_back(std::move(r));
  }
  a.validate();
  m.ppda_s0 = pda_config(j["s0"], "$.s0");
  if (!j["target"].is_array()) fail("$.target", "expected a list of configurations");
  for (std::size_t i = 0; i < j["target"].size(); ++i)
    m.ppda_target.push_back(pda_config(j["target"][i], "$.target[" + std::to_string(i) + "]"));
  return m;
}

inline std::string line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) line += text[i] == '\n';
  return std::to_string(line);
}

}  // namespace io

inline Model parse_model(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, "line " + io::line_of(text, e.byte) + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("kind")) io::fail("$", "expected an object with a \"kind\" field");
  const std::string kind = io::text(j["kind"], "$.kind");
  if (kind == "random_walk") return io::parse_walk(j);
  if (kind == "ppn") return io::parse_ppn(j);
  if (kind == "pocs") return io::parse_pocs(j);
  if (kind == "ppda") return io::parse_ppda(j);
  io::fail("$.kind", "unknown kind '" + kind + "'");
}

inline Json model_to_json(const Model& m) {
  Json j;
  j["kind"] = to_string(m.kind);
  switch (m.kind) {
    case ModelKind::RandomWalk:
      j["up"] = Json::array();
      for (const auto& c : m.walk.up.coeffs()) j["up"].push_back(io::rational_json(c));
      j["down"] = Json::array();
      for (const auto& c : m.walk.down.coeffs()) j["down"].push_back(io::rational_json(c));
      j["s0"] = m.walk_s0;
      j["target"] = m.walk_target;
      break;
    case ModelKind::PPN: {
      j["places"] = m.ppn.places;
      j["transitions"] = m.ppn.transitions;
      j["pre"] = m.ppn.pre;
      j["post"] = m.ppn.post;
      j["weights"] = Json::array();
      for (const auto& w : m.ppn.weights) j["weights"].push_back(io::multi_polynomial_json(w));
      j["s0"] = m.ppn.m0;
      j["target"]["upward"] = m.ppn_target.basis;
      break;
    }
    case ModelKind::POCS: {
      j["states"] = m.pocs.states;
      j["channels"] = m.pocs.channels;
      j["input_channel"] = m.pocs.input_channel;
      j["alphabet"] = m.pocs.alphabet;
      j["transitions"] = Json::array();
      for (const auto& t : m.pocs.delta) {
        Json o;
        o["from"] = t.from;
        o["recv_channel"] = t.recv_channel;
        o["recv"] = t.recv ? Json(*t.recv) : Json(nullptr);
        o["send_channel"] = t.send_channel;
        o["send"] = t.send ? Json(*t.send) : Json(nullptr);
        o["to"] = t.to;
        o["weight"] = io::polynomial_json(t.weight);
        j["transitions"].push_back(o);
      }
      auto cfg = [](const PocsConfig& c) {
        Json o;
        o["state"] = c.state;
        o["channels"] = Json::object();
        for (const auto& [k, v] : c.channels) o["channels"][k] = v;
        return o;
      };
      j["s0"] = cfg(m.pocs_s0);
      j["target"] = Json::array();
      for (const auto& t : m.pocs_target) j["target"].push_back(cfg(t));
      break;
    }
    case ModelKind::PPDA: {
      j["states"] = m.ppda.states;
      j["alphabet"] = m.ppda.alphabet;
      j["transitions"] = Json::array();
      for (const auto& r : m.ppda.delta) {
        Json o;
        o["from"] = r.from;
        o["pop"] = r.pop ? Json(*r.pop) : Json(nullptr);
        o["to"] = r.to;
        o["push"] = r.push;
        o["weight"] = io::polynomial_json(r.weight);
        j["transitions"].push_back(o);
      }
      auto cfg = [](const PdaConfig& c) {
        Json o;
        o["state"] = c.state;
        o["stack"] = c.stack;
        return o;
      };
      j["s0"] = cfg(m.ppda_s0);
      j["target"] = Json::array();
      for (const auto& t : m.ppda_target) j["target"].push_back(cfg(t));
      break;
    }
  }
  return j;
}

inline std::string serialize_model(const Model& m) { return model_to_json(m).dump(2); }

// The chain, start state and target a model denotes.
struct CompiledModel {
  EffectiveChain chain;
  StateKey s0;
  TargetSpec target;
  std::shared_ptr<const PocsCompiled> pocs;
  std::shared_ptr<const PpdaCompiled> ppda;
};

inline CompiledModel compile_model(const Model& m) {
  CompiledModel c;
  switch (m.kind) {
    case ModelKind::RandomWalk:
      c.chain = walk_chain(m.walk);
      c.s0 = walk_key(m.walk_s0);
      c.target = TargetSpec::explicit_finite({walk_key(m.walk_target)});
      break;
    case ModelKind::PPN:
      c.chain = ppn_chain(m.ppn);
      c.s0 = marking_key(m.ppn.m0);
      c.target = upward_target(m.ppn_target);
      break;
    case ModelKind::POCS: {
      c.pocs = std::make_shared<const PocsCompiled>(m.pocs);
      c.chain = pocs_chain(c.pocs);
      c.s0 = c.pocs->key(m.pocs_s0);
      std::vector<StateKey> keys;
      for (const auto& t : m.pocs_target) keys.push_back(c.pocs->key(t));
      c.target = TargetSpec::explicit_finite(std::move(keys));
      break;
    }
    case ModelKind::PPDA: {
      c.ppda = std::make_shared<const PpdaCompiled>(m.ppda);
      c.chain = ppda_chain(c.ppda);
      c.s0 = c.ppda->key(m.ppda_s0);
      std::vector<StateKey> keys;
      for (const auto& t : m.ppda_target) keys.push_back(c.ppda->key(t));
      c.target = TargetSpec::explicit_finite(std::move(keys));
      break;
    }
  }
  return c;
}

}  // namespace divergence
