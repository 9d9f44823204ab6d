// Command-line front end. Every subcommand reads and writes JSON; the exit
// code identifies the failure class (see README).

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gcantor/certify.hpp"
#include "gcantor/io.hpp"
#include "gcantor/littlewood.hpp"
#include "gcantor/local_extract.hpp"
#include "gcantor/rules.hpp"

using namespace gcantor;

namespace {

enum Exit : int {
  kOk = 0,
  kUsage = 1,
  kParse = 2,
  kBudget = 3,
  kEmptyLevel = 4,
  kMismatch = 5,
  kUndecidable = 6,
  kNoSurvivor = 7,
  kExtraction = 8,
  kViolations = 9,
  kNodeCap = 10,
};

void emit(const Json& value, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << value.dump(2) << '\n';
  } else {
    write_json_file(out, value);
  }
}

ExecPolicy policy_for(int threads) {
  return threads == 1 ? ExecPolicy::kSerial : ExecPolicy::kParallel;
}

RemovalRule make_rule(const std::string& text, const Json& schedule_json) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (name == "empty") return empty_rule();
  if (name == "middle") return middle_rule(arg.empty() ? 1 : std::stoull(arg));
  if (name == "saturate") {
    const auto c2 = arg.find(':');
    const std::string order = arg.substr(0, c2);
    const std::uint64_t seed = c2 == std::string::npos ? 0 : std::stoull(arg.substr(c2 + 1));
    if (order.empty() || order == "leftmost") return saturating_rule(SaturationOrder::kLeftmost);
    if (order == "random") return saturating_rule(SaturationOrder::kRandom, seed);
    if (order == "clustered") return saturating_rule(SaturationOrder::kClustered, seed);
    throw ParseError("--rule: unknown saturation order \"" + order + "\"");
  }
  if (name == "scripted") {
    const Json j = read_json_file(arg);
    std::vector<ScriptedDeletion> script;
    for (const auto& d : j.at("deletions")) {
      script.push_back({d.at("level").get<std::size_t>(), d.at("child").get<std::size_t>(),
                        d.at("stratum").get<std::size_t>()});
    }
    return scripted_rule(std::move(script));
  }
  if (name == "littlewood") {
    if (!schedule_json.contains("littlewood")) {
      throw ParseError("--rule littlewood needs a schedule file with a \"littlewood\" section");
    }
    const Json& lw = schedule_json["littlewood"];
    std::vector<InstanceParams> instances;
    if (lw.is_array()) {
      for (std::size_t i = 0; i < lw.size(); ++i) {
        instances.push_back(params_from_json(lw[i], "$.littlewood[" + std::to_string(i) + "]"));
      }
    } else {
      instances.push_back(params_from_json(lw, "$.littlewood"));
    }
    return littlewood_rule(std::move(instances));
  }
  throw ParseError("--rule: unknown rule \"" + text + "\"");
}

void print_certify_table(const NonEmptinessCertificate& ne, const DimensionCertificate& dc,
                         const std::optional<DimensionBound>& bound) {
  std::printf("%6s %12s %14s %14s %6s\n", "n", "R_n", "t_n", "lhs", "ok");
  const std::size_t rows = std::max(ne.t_values.size(), dc.rows.size());
  for (std::size_t n = 0; n < rows; ++n) {
    const std::string t = n < ne.t_values.size() ? std::to_string(ne.t_values[n].midpoint()) : "-";
    std::string lhs = "-", ok = "-", rn = "-";
    if (n < dc.rows.size()) {
      lhs = std::to_string(dc.rows[n].lhs.midpoint());
      ok = dc.rows[n].ok ? "yes" : "no";
      rn = std::to_string(dc.rows[n].branching);
    }
    std::printf("%6zu %12s %14s %14s %6s\n", n, rn.c_str(), t.c_str(), lhs.c_str(), ok.c_str());
  }
  std::printf("non-emptiness: %s\n", ne.pass ? "pass" : "fail");
  std::printf("dimension condition: %s (R_n >= 4: %s)\n", dc.pass ? "pass" : "fail",
              dc.branching_at_least_4 ? "yes" : "no");
  if (bound) {
    std::printf("dimension lower bound: %.12f (%s)\n", bound->bound.midpoint(),
                bound->rigorous ? "rigorous" : "empirical liminf");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalised Cantor sets and mixed-Littlewood witnesses"};
  app.require_subcommand(1);
  int threads = 0;
  int precision_cap = 0;
  app.add_option("--threads", threads, "OpenMP threads (1 selects the serial kernels)");
  app.add_option("--precision-cap", precision_cap, "log2 of the smallest enclosure width")
      ->envname("GCANTOR_PRECISION_CAP");

  // build
  auto* build_cmd = app.add_subcommand("build", "Build levels J_0 ... J_depth");
  std::string schedule_path, rule_text = "empty", out;
  std::size_t depth = 0, node_cap = 10'000'000;
  bool report_budgets = false;
  build_cmd->add_option("--schedule", schedule_path, "Schedule JSON")->required();
  build_cmd->add_option("--rule", rule_text,
                        "empty | middle[:k] | saturate[:leftmost|random|clustered[:seed]] | "
                        "scripted:<file> | littlewood");
  build_cmd->add_option("--depth", depth)->required();
  build_cmd->add_option("--node-cap", node_cap);
  build_cmd->add_flag("--report-budgets", report_budgets, "Record breaches instead of failing");
  build_cmd->add_option("--out", out);

  // certify
  auto* certify_cmd = app.add_subcommand("certify", "Non-emptiness and dimension certificates");
  bool report = false;
  certify_cmd->add_option("--schedule", schedule_path)->required();
  certify_cmd->add_option("--depth,--horizon", depth)->required();
  certify_cmd->add_flag("--report", report, "Print a human-readable table");
  certify_cmd->add_option("--out", out);

  // extract
  auto* extract_cmd = app.add_subcommand("extract", "Extract the local Cantor subset");
  std::string levels_path;
  extract_cmd->add_option("--schedule", schedule_path)->required();
  extract_cmd->add_option("--levels", levels_path)->required();
  extract_cmd->add_option("--out", out);

  // measure
  auto* measure_cmd = app.add_subcommand("measure", "Mass distribution and the μ(B) bound");
  std::string s_text = "1/2";
  std::size_t n0 = 0, random_count = 0;
  std::uint64_t seed = 1;
  measure_cmd->add_option("--schedule", schedule_path)->required();
  measure_cmd->add_option("--levels", levels_path, "Local levels (e.g. extract output)")->required();
  measure_cmd->add_option("--s", s_text, "Exponent s as a rational");
  measure_cmd->add_option("--n0", n0);
  measure_cmd->add_option("--random", random_count);
  measure_cmd->add_option("--seed", seed);
  measure_cmd->add_option("--out", out);

  // intersect
  auto* intersect_cmd = app.add_subcommand("intersect", "Sum the budgets of several schedules");
  std::vector<std::string> schedule_paths;
  intersect_cmd->add_option("--schedule", schedule_paths)->required();
  intersect_cmd->add_option("--out", out);

  // witness
  auto* witness_cmd = app.add_subcommand("witness", "Build a certified nested chain");
  std::vector<std::string> d_specs;
  std::string variant = "prop1", R_text, c1_text, c_text, root_left;
  bool allow_uncertified = false;
  witness_cmd->add_option("--d", d_specs, "const:p | list:[..] | doubling (repeat for joint)")
      ->required();
  witness_cmd->add_option("--variant", variant);
  witness_cmd->add_option("--R", R_text)->required();
  witness_cmd->add_option("--c1", c1_text)->required();
  witness_cmd->add_option("--c", c_text)->required();
  witness_cmd->add_option("--depth", depth)->required();
  witness_cmd->add_option("--root-left", root_left, "Left end of the root (default 0)");
  witness_cmd->add_flag("--uncertified", allow_uncertified,
                        "Allow parameters failing validation; budgets are then reported");
  witness_cmd->add_option("--out", out);

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "Re-check a witness certificate");
  std::string cert_path;
  std::uint64_t q_max = 0;
  bool sieve = false;
  verify_cmd->add_option("--cert", cert_path)->required();
  verify_cmd->add_option("--qmax", q_max)->required();
  verify_cmd->add_flag("--sieve", sieve, "Also run the exclusion-interval sieve");
  verify_cmd->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (threads > 0) set_thread_count(threads);
    if (precision_cap > 0) set_precision_cap_log2(precision_cap);
    const ExecPolicy exec = policy_for(threads);

    if (*build_cmd) {
      const Json sj = read_json_file(schedule_path);
      const CantorSchedule schedule = schedule_from_json(sj);
      BuildOptions opts;
      opts.exec = exec;
      opts.node_cap = node_cap;
      opts.budgets = report_budgets ? BudgetPolicy::kReport : BudgetPolicy::kEnforce;
      BuildResult result = build(schedule, make_rule(rule_text, sj), depth, opts);
      Json j = levels_to_json(result.levels);
      Json ledgers = Json::array();
      for (const auto& l : result.ledgers) ledgers.push_back(to_json(l));
      j["ledgers"] = ledgers;
      Json breaches = Json::array();
      for (const auto& b : result.breaches) {
        breaches.push_back(Json{{"m", b.m}, {"ancestor", b.ancestor}, {"count", b.count}});
      }
      j["breaches"] = breaches;
      j["empty_level"] = result.empty_level ? Json(*result.empty_level) : Json(nullptr);
      emit(j, out);
      if (result.empty_level) {
        std::cerr << "level " << *result.empty_level << " is empty\n";
        return kEmptyLevel;
      }
      return kOk;
    }

    if (*certify_cmd) {
      const CantorSchedule schedule = schedule_from_json(read_json_file(schedule_path));
      const NonEmptinessCertificate ne = certify_nonempty(schedule, depth);
      const DimensionCertificate dc = check_dimension_condition(schedule, depth);
      std::optional<DimensionBound> bound;
      if (dc.pass) bound = dimension_lower_bound(schedule, dc);
      Json j{{"nonempty", to_json(ne)}, {"dimension", to_json(dc)}};
      j["dimension_bound"] = bound ? to_json(*bound) : Json(nullptr);
      if (report) {
        print_certify_table(ne, dc, bound);
        if (!out.empty()) write_json_file(out, j);
      } else {
        emit(j, out);
      }
      return kOk;
    }

    if (*extract_cmd) {
      const CantorSchedule schedule = schedule_from_json(read_json_file(schedule_path));
      const auto levels = levels_from_json(read_json_file(levels_path));
      const std::size_t horizon = levels.empty() ? 0 : levels.size() - 1;
      const DimensionCertificate dc = check_dimension_condition(schedule, horizon);
      ExtractOptions opts;
      opts.certificate = &dc;
      const LocalExtraction x = extract_local(levels, schedule, opts);
      const ConditionReport cr = verify_conditions(levels, x.levels, schedule);
      Json j = to_json(x);
      j["conditions"] = to_json(cr);
      j["dimension_condition_pass"] = dc.pass;
      emit(j, out);
      return kOk;
    }

    if (*measure_cmd) {
      const CantorSchedule schedule = schedule_from_json(read_json_file(schedule_path));
      const auto levels = levels_from_json(read_json_file(levels_path));
      const MeasureTable m = build_measure(levels);
      MdpOptions opts;
      opts.n0 = n0;
      opts.random_count = random_count;
      opts.seed = seed;
      opts.exec = exec;
      const MdpReport rep = verify_mdp_bound(levels, m, schedule, parse_rational(s_text), opts);
      emit(Json{{"measure", to_json(m)}, {"mdp", to_json(rep)}}, out);
      return kOk;
    }

    if (*intersect_cmd) {
      std::vector<CantorSchedule> parts;
      for (const auto& p : schedule_paths) parts.push_back(schedule_from_json(read_json_file(p)));
      emit(schedule_to_json(intersect_schedules(parts)), out);
      return kOk;
    }

    if (*witness_cmd) {
      const Rational Rr = parse_rational(R_text);
      if (Rr.get_den() != 1 || Rr < 2 || !Rr.get_num().fits_ulong_p()) {
        throw ParseError("--R must be an integer >= 2");
      }
      const Rational c1 = parse_rational(c1_text), c = parse_rational(c_text);
      std::optional<ClosedInterval> root;
      if (!root_left.empty()) {
        const Rational left = parse_rational(root_left);
        root = ClosedInterval(left, left + c1);
      }
      std::vector<InstanceParams> instances;
      for (const auto& d : d_specs) {
        instances.push_back(InstanceParams::make(Rr.get_num().get_ui(), c1, c,
                                                 parse_variant(variant), DSequence::parse(d),
                                                 root));
      }
      const ParamsCertificate pc = validate_params(instances.front());
      if (!pc.pass && !allow_uncertified) {
        emit(Json{{"params_certificate", to_json(pc)}}, "-");
        std::cerr << "parameters fail validation; pass --uncertified to build anyway\n";
        return kUsage;
      }
      WitnessOptions opts;
      opts.exec = exec;
      opts.budgets = pc.pass ? BudgetPolicy::kEnforce : BudgetPolicy::kReport;
      const WitnessCertificate cert = witness(instances, depth, opts);
      Json j = to_json(cert);
      j["params_certificate"] = to_json(pc);
      emit(j, out);
      return kOk;
    }

    if (*verify_cmd) {
      const WitnessCertificate cert = witness_from_json(read_json_file(cert_path));
      const VerifyReport rep = verify_witness(cert, q_max, exec);
      Json j{{"verify", to_json(rep)}};
      bool ok = rep.ok();
      if (sieve) {
        const VerifyReport sr = sieve_soundness(cert, exec);
        j["sieve"] = to_json(sr);
        ok = ok && sr.ok();
      }
      j["ok"] = ok;
      emit(j, out);
      return ok ? kOk : kViolations;
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const BudgetExceeded& e) {
    std::cerr << e.what() << '\n';
    return kBudget;
  } catch (const BudgetViolation& e) {
    std::cerr << e.what() << '\n';
    return kBudget;
  } catch (const EmptyLevelError& e) {
    std::cerr << e.what() << '\n';
    return kEmptyLevel;
  } catch (const MismatchedFrame& e) {
    std::cerr << "mismatched frame: " << e.what() << '\n';
    return kMismatch;
  } catch (const UndecidableError& e) {
    std::cerr << "undecidable: " << e.what() << '\n';
    return kUndecidable;
  } catch (const NoSurvivor& e) {
    std::cerr << e.what() << '\n';
    return kNoSurvivor;
  } catch (const EmptyExtraction& e) {
    std::cerr << e.what() << '\n';
    return kExtraction;
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kExtraction;
  } catch (const NodeCapExceeded& e) {
    std::cerr << e.what() << '\n';
    return kNodeCap;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const std::logic_error& e) {  // numeric conversions in rule arguments
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
