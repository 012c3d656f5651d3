#include "crtrial/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "crtrial/dataset_io.hpp"
#include "crtrial/design.hpp"
#include "crtrial/report.hpp"
#include "crtrial/simulate.hpp"

namespace crtrial {

namespace {

// Flag combinations that make no sense; reported with exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

void add_design_flags(CLI::App& cmd, DesignParams& params) {
  cmd.add_option("--alpha", params.alpha_two_sided, "Two-sided significance level")->capture_default_str();
  cmd.add_option("--power", params.power, "Target power")->capture_default_str();
  cmd.add_option("--p", params.allocation_p, "Fraction randomized to treatment")->capture_default_str();
}

// ---- plan ------------------------------------------------------------------

struct PlanArgs {
  std::optional<double> f1t, f1c, f2t, f2c;
  std::optional<double> median_t, median_c, improve;
  Days tau = kDefaultHorizon;
  std::optional<std::string> method;
  std::optional<std::string> rounding;
  std::string format = "text";
  DesignParams params;
};

int cmd_plan(const PlanArgs& a, std::ostream& out) {
  const bool any_prob = a.f1t || a.f1c || a.f2t || a.f2c;
  const bool all_prob = a.f1t && a.f1c && a.f2t && a.f2c;
  const bool any_median = a.median_t || a.median_c || a.improve;
  const bool all_median = a.median_t && a.median_c && a.improve;
  if (any_prob == any_median) {
    throw UsageError("plan: give either --f1t/--f1c/--f2t/--f2c or --median-t/--median-c/--improve");
  }
  if (any_prob && !all_prob) throw UsageError("plan: all four of --f1t --f1c --f2t --f2c are required");
  if (any_median && !all_median) throw UsageError("plan: all of --median-t --median-c --improve are required");

  DesignParams params = a.params;
  Json j{{"schema_version", kSchemaVersion}, {"command", "plan"}};
  SampleSizePlan plan;
  std::optional<EffectMeasures> measures;

  if (all_prob) {
    params.event_rounding = parse_rounding(a.rounding.value_or("up"));
    const auto method = parse_method(a.method.value_or("subdistribution"));
    const auto result = plan_from_probabilities(*a.f1t, *a.f1c, *a.f2t, *a.f2c, a.tau, params, method);
    plan = result.plan;
    measures = result.measures;
    j["inputs"] = Json{{"f1t", *a.f1t}, {"f1c", *a.f1c}, {"f2t", *a.f2t}, {"f2c", *a.f2c}, {"tau", a.tau}};
    j["scenario"] = to_json(result.scenario);
  } else {
    if (a.method && parse_method(*a.method) != PlanningMethod::event_specific_hr) {
      throw UsageError("plan: median-based planning is an event-specific hazard ratio plan");
    }
    // Published median-based plans report the nearest whole number of events.
    params.event_rounding = parse_rounding(a.rounding.value_or("nearest"));
    plan = plan_from_medians(*a.median_t, *a.median_c, *a.improve, params);
    j["inputs"] = Json{{"median_t", *a.median_t}, {"median_c", *a.median_c}, {"improve", *a.improve}};
  }
  j["design"] = to_json(params);
  j["plan"] = to_json(plan);
  j["effect_measures"] = measures ? to_json(*measures) : Json(nullptr);

  if (a.format == "json") {
    out << j.dump(2) << '\n';
    return kExitOk;
  }
  out << "method            " << method_name(plan.method) << '\n'
      << "theta             " << fixed(plan.theta, 2) << '\n'
      << "required events   " << fixed(plan.required_events, 2) << " -> " << plan.required_events_int << " ("
      << rounding_name(params.event_rounding) << ")\n"
      << "psi               " << fixed(plan.psi, 4) << '\n'
      << "total N           " << plan.total_n << " (T " << plan.n_treatment << ", C " << plan.n_control << ")\n";
  if (measures) {
    out << "theta_ES          " << fixed(measures->theta_es, 2) << '\n'
        << "theta_ES-CE       " << fixed(measures->theta_es_ce, 2) << '\n'
        << "theta_SD(tau)     " << fixed(measures->theta_sd_tau, 2) << '\n'
        << "OR(tau)           " << fixed(measures->odds_ratio_tau, 2) << '\n';
  }
  return kExitOk;
}

// ---- table -----------------------------------------------------------------

struct TableArgs {
  std::optional<std::string> preset;
  std::optional<std::string> file;
  Days tau = kDefaultHorizon;
  std::string format = "text";
  DesignParams params;
};

int cmd_table(const TableArgs& a, std::ostream& out) {
  if (a.preset.has_value() == a.file.has_value()) throw UsageError("table: give exactly one of --preset or --file");
  ScenarioTable table;
  if (a.preset) {
    table = scenario_table(preset_rows(*a.preset), a.tau, a.params, *a.preset);
  } else {
    std::ifstream in(*a.file);
    if (!in) throw ParseError(*a.file, 0, "cannot open file");
    table = scenario_table(read_scenario_rows_csv(in, *a.file), a.tau, a.params, "custom");
  }
  if (a.format == "json") {
    out << table_to_json(table).dump(2) << '\n';
  } else if (a.format == "csv") {
    out << render_table_csv(table);
  } else {
    out << render_table_text(table);
  }
  return kExitOk;
}

// ---- estimate ----------------------------------------------------------------

struct EstimateArgs {
  std::string data;
  EstimateOptions options;
  bool pooled_only = false;
  std::optional<std::string> curves_csv;
};

int cmd_estimate(EstimateArgs a, std::ostream& out, std::ostream& err) {
  const Dataset data = read_dataset_csv_file(a.data);
  a.options.by_arm = !a.pooled_only;
  const auto report = estimate_report(data, a.options);
  for (const auto& notice : report.notices) err << "notice: " << notice << '\n';
  if (a.curves_csv) {
    std::ofstream csv(*a.curves_csv);
    if (!csv) throw std::runtime_error("cannot write " + *a.curves_csv);
    write_curves_csv(csv, report.curves);
  }
  out << report.json.dump(2) << '\n';
  return kExitOk;
}

// ---- simulate / ssr ------------------------------------------------------------

struct SimArgs {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<long> replicates;
  std::optional<long> n_total;
  std::optional<std::string> analysis;
  std::optional<double> f1t, f1c, f2t, f2c;
  std::optional<double> a01t, a01c, a02t, a02c;
  std::optional<double> tau, p, censor_window;
  std::optional<std::string> allocation;
  // ssr only
  std::optional<double> pilot_fraction, planning_theta;
  std::optional<long> n_max;
  std::optional<std::string> recalculation;
  std::optional<std::string> dump_csv;
};

Json load_config(const SimArgs& a) {
  if (!a.config) return Json::object();
  std::ifstream in(*a.config);
  if (!in) throw UsageError("cannot open config " + *a.config);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw UsageError("invalid JSON in " + *a.config + ": " + e.what());
  }
}

Json build_config(const SimArgs& a, bool ssr, std::ostream& err) {
  Json j = load_config(a);
  if (!j.is_object()) throw UsageError("config must be a JSON object");

  const bool any_prob = a.f1t || a.f1c || a.f2t || a.f2c;
  const bool any_hazard = a.a01t || a.a01c || a.a02t || a.a02c;
  if (any_prob && any_hazard) throw UsageError("give the scenario as probabilities or as hazards, not both");
  if (any_prob || any_hazard || a.tau || a.p) {
    Json& s = j["scenario"];
    if (s.is_null()) s = Json::object();
    if (any_prob) {
      if (!(a.f1t && a.f1c && a.f2t && a.f2c)) throw UsageError("all of --f1t --f1c --f2t --f2c are required");
      s.erase("treatment");
      s.erase("control");
      s["probabilities"] = Json{{"f1t", *a.f1t}, {"f1c", *a.f1c}, {"f2t", *a.f2t}, {"f2c", *a.f2c}};
    }
    if (any_hazard) {
      if (!(a.a01t && a.a01c && a.a02t && a.a02c)) throw UsageError("all of --a01t --a01c --a02t --a02c are required");
      s.erase("probabilities");
      s["treatment"] = Json{{"alpha01", *a.a01t}, {"alpha02", *a.a02t}};
      s["control"] = Json{{"alpha01", *a.a01c}, {"alpha02", *a.a02c}};
    }
    if (a.tau) s["tau"] = *a.tau;
    if (a.p) s["allocation_p"] = *a.p;
  }
  if (!j.contains("scenario")) throw UsageError("no scenario: use --config or scenario flags");
  if (a.n_total) j["n_total"] = *a.n_total;
  if (!j.contains("n_total")) throw UsageError("missing --n (or n_total in the config)");
  if (a.replicates) j["replicates"] = *a.replicates;
  if (a.analysis) j["analysis"] = *a.analysis;
  if (a.allocation) j["allocation"] = *a.allocation;
  if (a.censor_window) j["censoring"] = Json{{"uniform_window", *a.censor_window}};
  if (a.threads) j["threads"] = *a.threads;
  if (a.seed) {
    j["seed"] = *a.seed;
  } else if (!j.contains("seed")) {
    std::random_device rd;
    const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) | rd();
    j["seed"] = seed;
    err << "seed: " << seed << " (drawn; pass --seed to reproduce)\n";
  }

  if (ssr) {
    Json& s = j["ssr"];
    if (s.is_null()) s = Json::object();
    if (a.pilot_fraction) s["pilot_fraction"] = *a.pilot_fraction;
    if (a.planning_theta) s["planning_theta"] = *a.planning_theta;
    if (a.n_max) s["n_max_cap"] = *a.n_max;
    if (a.recalculation) s["recalculation"] = *a.recalculation;
    if (!s.contains("planning_theta")) throw UsageError("ssr: missing --planning-theta (or ssr.planning_theta)");
  }
  return j;
}

void dump_replicates(const std::optional<std::string>& path, const std::vector<ReplicateOutcome>& reps) {
  if (!path) return;
  std::ofstream csv(*path);
  if (!csv) throw std::runtime_error("cannot write " + *path);
  write_replicates_csv(csv, reps);
}

int cmd_simulate(const SimArgs& a, std::ostream& out, std::ostream& err) {
  const auto config = simulation_config_from_json(build_config(a, false, err));
  std::vector<ReplicateOutcome> reps;
  const auto oc = operating_characteristics(config, a.dump_csv ? &reps : nullptr);
  dump_replicates(a.dump_csv, reps);
  Json j{{"schema_version", kSchemaVersion}, {"command", "simulate"}, {"config", to_json(config)}, {"results", to_json(oc)}};
  out << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_ssr(const SimArgs& a, std::ostream& out, std::ostream& err) {
  const auto config = ssr_config_from_json(build_config(a, true, err));
  std::vector<ReplicateOutcome> reps;
  const auto oc = blinded_ssr(config, a.dump_csv ? &reps : nullptr);
  dump_replicates(a.dump_csv, reps);
  Json j{{"schema_version", kSchemaVersion},
         {"command", "ssr"},
         {"config", to_json(config)},
         {"pilot_n", pilot_size(config)},
         {"results", to_json(oc)}};
  out << j.dump(2) << '\n';
  return kExitOk;
}

void add_sim_flags(CLI::App& cmd, SimArgs& a, bool ssr) {
  cmd.add_option("--config", a.config, "JSON configuration file");
  cmd.add_option("--seed", a.seed, "64-bit seed (drawn and echoed when absent)");
  cmd.add_option("--threads", a.threads, "Worker threads (0: all cores); never changes results");
  cmd.add_option("--replicates", a.replicates, "Monte Carlo replicates");
  cmd.add_option("--n", a.n_total, ssr ? "Initially planned total sample size" : "Total sample size");
  cmd.add_option("--analysis", a.analysis, "event_specific_logrank | gray_subdistribution | binary_proportion");
  cmd.add_option("--f1t", a.f1t, "F1 at tau, treatment");
  cmd.add_option("--f1c", a.f1c, "F1 at tau, control");
  cmd.add_option("--f2t", a.f2t, "F2 at tau, treatment");
  cmd.add_option("--f2c", a.f2c, "F2 at tau, control");
  cmd.add_option("--a01t", a.a01t, "Favourable hazard, treatment");
  cmd.add_option("--a01c", a.a01c, "Favourable hazard, control");
  cmd.add_option("--a02t", a.a02t, "Competing hazard, treatment");
  cmd.add_option("--a02c", a.a02c, "Competing hazard, control");
  cmd.add_option("--tau", a.tau, "Horizon in days");
  cmd.add_option("--p", a.p, "Fraction randomized to treatment");
  cmd.add_option("--allocation", a.allocation, "permuted_block | bernoulli");
  cmd.add_option("--censor-window", a.censor_window, "Uniform(0, w) censoring before tau");
  cmd.add_option("--dump-csv", a.dump_csv, "Write per-replicate results to this CSV file");
  if (ssr) {
    cmd.add_option("--pilot-fraction", a.pilot_fraction, "Internal pilot as a fraction of the planned N");
    cmd.add_option("--planning-theta", a.planning_theta, "Effect kept fixed at recalculation");
    cmd.add_option("--n-max", a.n_max, "Cap on the recalculated N");
    cmd.add_option("--recalculation", a.recalculation, "once | none");
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Design and analysis of trials with a favourable outcome and a competing event", "crtrial"};
  app.require_subcommand(1);

  PlanArgs plan;
  auto* plan_cmd = app.add_subcommand("plan", "Sample size from cumulative probabilities or medians");
  plan_cmd->add_option("--f1t", plan.f1t, "F1 at tau, treatment");
  plan_cmd->add_option("--f1c", plan.f1c, "F1 at tau, control");
  plan_cmd->add_option("--f2t", plan.f2t, "F2 at tau, treatment");
  plan_cmd->add_option("--f2c", plan.f2c, "F2 at tau, control");
  plan_cmd->add_option("--median-t", plan.median_t, "Median time to the favourable event, treatment");
  plan_cmd->add_option("--median-c", plan.median_c, "Median time to the favourable event, control");
  plan_cmd->add_option("--improve", plan.improve, "Probability of the favourable event by tau (median planning)");
  plan_cmd->add_option("--tau", plan.tau, "Horizon in days")->capture_default_str();
  plan_cmd->add_option("--method", plan.method, "event_specific | subdistribution | odds_ratio");
  plan_cmd->add_option("--event-rounding", plan.rounding, "up | nearest");
  plan_cmd->add_option("--format", plan.format, "text | json")->check(CLI::IsMember({"text", "json"}));
  add_design_flags(*plan_cmd, plan.params);

  TableArgs table;
  auto* table_cmd = app.add_subcommand("table", "Scenario table of effect measures and sample sizes");
  table_cmd->add_option("--preset", table.preset, "table1 | table2")->check(CLI::IsMember({"table1", "table2"}));
  table_cmd->add_option("--file", table.file, "CSV of scenario rows");
  table_cmd->add_option("--tau", table.tau, "Horizon in days")->capture_default_str();
  table_cmd->add_option("--format", table.format, "text | csv | json")->check(CLI::IsMember({"text", "csv", "json"}));
  add_design_flags(*table_cmd, table.params);

  EstimateArgs est;
  auto* est_cmd = app.add_subcommand("estimate", "Curves, summaries and two-sample tests for a dataset");
  est_cmd->add_option("--data", est.data, "CSV with header id,arm,time,status")->required();
  est_cmd->add_option("--tau", est.options.tau, "Horizon in days")->capture_default_str();
  est_cmd->add_flag("--pooled-only", est.pooled_only, "Skip the per-arm curves");
  est_cmd->add_flag("--subdistribution-km", est.options.require_subdistribution_km,
                    "Require the subdistribution Kaplan-Meier curve (fails on incomplete follow-up)");
  est_cmd->add_option("--curves-csv", est.curves_csv, "Also write all curves to this CSV file");

  SimArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo operating characteristics of a fixed design");
  add_sim_flags(*sim_cmd, sim, false);

  SimArgs ssr;
  auto* ssr_cmd = app.add_subcommand("ssr", "Monte Carlo of blinded sample size recalculation");
  add_sim_flags(*ssr_cmd, ssr, true);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    if (const auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
      err << sub->help();
    } else {
      err << app.help();
    }
    return kExitUsage;
  }

  try {
    if (plan_cmd->parsed()) return cmd_plan(plan, out);
    if (table_cmd->parsed()) return cmd_table(table, out);
    if (est_cmd->parsed()) return cmd_estimate(est, out, err);
    if (sim_cmd->parsed()) return cmd_simulate(sim, out, err);
    if (ssr_cmd->parsed()) return cmd_ssr(ssr, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitComputation;
  }
  return kExitUsage;
}

}  // namespace crtrial
