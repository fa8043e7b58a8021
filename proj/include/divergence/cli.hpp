#pragma once
//
// The divcrp command line. run_command takes the arguments after the
// program name and returns the process exit code:
//   0 success, 1 parse/validation, 2 budget exceeded, 3 precondition.
//

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "divergence/baseline.hpp"
#include "divergence/crp.hpp"
#include "divergence/model_io.hpp"

namespace divergence {

namespace cli {

inline constexpr int kOk = 0;
inline constexpr int kInvalid = 1;
inline constexpr int kBudget = 2;
inline constexpr int kPrecondition = 3;

inline int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
    case ErrorCode::EmptySupport:
    case ErrorCode::NonPositiveWeight:
    case ErrorCode::MalformedChain: return kInvalid;
    case ErrorCode::BudgetExceeded: return kBudget;
    default: return kPrecondition;
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json interval_json(const Interval& iv, std::size_t explored) {
  Json j;
  j["low"] = to_string(iv.low);
  j["up"] = to_string(iv.up);
  j["low_dec"] = to_decimal(iv.low, 12, false);
  j["up_dec"] = to_decimal(iv.up, 12, true);
  j["explored"] = explored;
  return j;
}

struct AnalyzeOptions {
  std::string theta = "1/100";
  std::size_t budget = 100000;
  std::optional<std::string> max_seconds;
  bool with_reach = false;
  std::string witness = "auto";
  bool bracket_only = false;
};

inline Json analyze(const Model& m, const AnalyzeOptions& o) {
  const Rational theta = parse_rational(o.theta);
  AnalysisBudget budget;
  budget.max_states = o.budget;
  if (o.max_seconds) budget.max_seconds = parse_rational(*o.max_seconds);
  if (budget.max_states < 1) throw Error(ErrorCode::PreconditionViolated, "--budget must be positive");
  CompiledModel c = compile_model(m);

  if (o.bracket_only) {
    TruncationResult t = truncation_bracket(c.chain, c.s0, c.target, budget.max_states);
    Json j = interval_json(t.interval, t.explored);
    j["method"] = "truncation";
    return j;
  }

  Witness w;
  std::optional<ReachOracle> oracle;
  if (o.witness == "none") {
    w = identity_witness();
  } else if (o.witness != "auto") {
    throw Error(ErrorCode::ParseError, "--witness must be 'auto' or 'none'");
  } else {
    switch (m.kind) {
      case ModelKind::RandomWalk: {
        if (m.walk_s0 == m.walk_target) {
          w = identity_witness();
          break;
        }
        auto div = rw_divergence(m.walk, m.walk_s0, m.walk_target);
        if (!div.divergent)
          throw Error(ErrorCode::PreconditionViolated,
                      std::string("walk is recurrent (case ") + to_string(div.cls.case_id) +
                          "), so the chain is not divergent and no witness exists");
        w = div.witness;
        break;
      }
      case ModelKind::PPN:
        throw Error(ErrorCode::PreconditionViolated,
                    "divergence of Petri nets is undecidable, so no witness is constructed; "
                    "use --witness none or --bracket-only");
      case ModelKind::POCS: w = pocs_witness(c.pocs, m.pocs_target); break;
      case ModelKind::PPDA: w = ppda_witness(c.ppda, m.ppda_target); break;
    }
  }

  if (o.with_reach) {
    if (m.kind == ModelKind::RandomWalk) {
      oracle = [](const StateKey&) { return true; };  // irreducible
    } else if (m.kind == ModelKind::PPN) {
      oracle = coverability_oracle(m.ppn, m.ppn_target);
    } else {
      throw Error(ErrorCode::PreconditionViolated,
                  std::string("no reachability oracle is available for kind ") + to_string(m.kind));
    }
  }

  CrpResult r = oracle ? crp_with_reach(c.chain, c.s0, c.target, w, theta, *oracle, budget)
                       : crp_basic(c.chain, c.s0, c.target, w, theta, budget);
  Json j = interval_json(r.interval, r.explored);
  j["method"] = oracle ? "crp_with_reach" : "crp_basic";
  return j;
}

inline Json classify(const Model& m) {
  if (m.kind != ModelKind::RandomWalk) throw Error(ErrorCode::ValidationError, "classify accepts random walks only");
  WalkClass c = rw_classify(m.walk);
  Json j;
  j["verdict"] = to_string(c.verdict);
  j["case"] = to_string(c.case_id);
  if (c.verdict == Verdict::Transient) {
    j["n0"] = c.n0.get_str();
    if (c.case_id == WalkCase::LeadingUp) {
      j["alpha"] = to_string(c.alpha);
    } else {
      j["alpha"] = to_string(c.alpha);
      j["alpha_prime"] = to_string(c.alpha_prime);
    }
  } else if (c.case_id == WalkCase::SubleadingSmall) {
    j["alpha"] = to_string(c.alpha);
  }
  return j;
}

inline Json inc_report(const Model& m) {
  if (m.kind != ModelKind::PPDA) throw Error(ErrorCode::ValidationError, "inc accepts pushdown models only");
  Json j;
  auto violations = increasing_check(m.ppda);
  j["increasing"] = violations.empty();
  j["inc"] = Json::array();
  for (const auto& [q, a] : inc_pairs(m.ppda)) j["inc"].push_back({q, a});
  j["violations"] = Json::array();
  for (const auto& v : violations) j["violations"].push_back({{"condition", v.condition}, {"message", v.message}});
  if (violations.empty()) {
    PdaDrift d = ppda_drift(m.ppda);
    j["B"] = d.B.get_str();
    j["d"] = d.d;
    j["epsilon"] = to_string(d.epsilon);
    j["n0"] = d.n0.get_str();
  }
  return j;
}

}  // namespace cli

inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reachability probabilities of divergent infinite-state Markov chains", "divcrp"};
  app.require_subcommand(1);

  std::string file;
  cli::AnalyzeOptions ao;
  std::size_t max_states = 10000;
  std::uint64_t runs = 10000, cap = 10000, seed = 1;

  auto* classify = app.add_subcommand("classify", "classify a polynomial random walk");
  classify->add_option("file", file, "model file")->required();

  auto* analyze = app.add_subcommand("analyze", "frame the reachability probability within theta");
  analyze->add_option("file", file, "model file")->required();
  analyze->add_option("--theta", ao.theta, "interval width, a rational in (0,1)")->required();
  analyze->add_option("--budget", ao.budget, "maximum number of explored states")->capture_default_str();
  analyze->add_option("--max-seconds", ao.max_seconds, "optional time limit (rational)");
  analyze->add_flag("--with-reachability", ao.with_reach, "use a reachability oracle");
  analyze->add_option("--witness", ao.witness, "auto or none")->capture_default_str();
  analyze->add_flag("--bracket-only", ao.bracket_only, "truncation bracket instead of a witness");

  auto* bracket = app.add_subcommand("bracket", "truncation bracket");
  bracket->add_option("file", file, "model file")->required();
  bracket->add_option("--max-states", max_states, "states to expand")->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate with a 99% Hoeffding interval");
  simulate->add_option("file", file, "model file")->required();
  simulate->add_option("--runs", runs)->capture_default_str();
  simulate->add_option("--cap", cap, "step cap per run")->capture_default_str();
  simulate->add_option("--seed", seed)->capture_default_str();

  auto* inc = app.add_subcommand("inc", "increasing-pPDA diagnostics");
  inc->add_option("file", file, "model file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return cli::kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return cli::kInvalid;
  }

  try {
    Model m = parse_model(cli::read_file(file));
    Json result;
    if (*classify) {
      result = cli::classify(m);
    } else if (*analyze) {
      result = cli::analyze(m, ao);
    } else if (*bracket) {
      CompiledModel c = compile_model(m);
      TruncationResult t = truncation_bracket(c.chain, c.s0, c.target, max_states);
      result = cli::interval_json(t.interval, t.explored);
      result["frontier_mass"] = to_string(t.frontier_mass);
    } else if (*simulate) {
      CompiledModel c = compile_model(m);
      SampleResult s = monte_carlo(c.chain, c.s0, c.target, cap, runs, seed);
      result["hits"] = s.hits;
      result["runs"] = s.runs;
      result["step_cap"] = s.step_cap;
      result["ci99_low"] = to_string(s.ci99_low);
      result["ci99_up"] = to_string(s.ci99_up);
      result["ci99_low_dec"] = to_decimal(s.ci99_low, 12, false);
      result["ci99_up_dec"] = to_decimal(s.ci99_up, 12, true);
    } else if (*inc) {
      result = cli::inc_report(m);
    }
    out << result.dump() << "\n";
    return cli::kOk;
  } catch (const BudgetExceeded& e) {
    err << "error: " << e.what() << " (explored " << e.explored() << " states)\n";
    return cli::kBudget;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return cli::exit_code(e.code());
  }
}

}  // namespace divergence
