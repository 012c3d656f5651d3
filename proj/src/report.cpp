#include "crtrial/report.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "crtrial/core_model.hpp"
#include "crtrial/dataset_io.hpp"

namespace crtrial {

namespace {

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

std::string optional_n(const std::optional<long>& n) { return n ? std::to_string(*n) : "NA"; }

Json optional_json(const std::optional<long>& n) { return n ? Json(*n) : Json(nullptr); }

// Reads keys from a JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string context) : j_(j), context_(std::move(context)) {
    if (!j_.is_object()) throw std::invalid_argument(context_ + ": expected a JSON object");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  const Json& at(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw std::invalid_argument(context_ + ": missing key '" + key + "'");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const auto& v = at(key);
    if (!v.is_number()) throw std::invalid_argument(context_ + "." + key + ": expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : (seen_.insert(key), fallback); }

  long integer(const std::string& key) {
    const auto& v = at(key);
    if (!v.is_number_integer()) throw std::invalid_argument(context_ + "." + key + ": expected an integer");
    return v.get<long>();
  }
  long integer(const std::string& key, long fallback) { return has(key) ? integer(key) : (seen_.insert(key), fallback); }

  std::string text(const std::string& key, const std::string& fallback) {
    seen_.insert(key);
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_string()) throw std::invalid_argument(context_ + "." + key + ": expected a string");
    return v.get<std::string>();
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw std::invalid_argument(context_ + ": unknown key '" + key + "'");
    }
  }

  const std::string& context() const { return context_; }

 private:
  const Json& j_;
  std::string context_;
  std::set<std::string> seen_;
};

ArmHazards arm_from_json(const Json& j, const std::string& context) {
  ObjectReader r(j, context);
  ArmHazards arm{r.number("alpha01"), r.number("alpha02")};
  r.finish();
  return arm;
}

ScenarioSpec scenario_from_json(const Json& j) {
  ObjectReader r(j, "scenario");
  ScenarioSpec spec;
  spec.tau = r.number("tau", kDefaultHorizon);
  spec.allocation_p = r.number("allocation_p", 0.5);
  if (r.has("probabilities")) {
    ObjectReader p(r.at("probabilities"), "scenario.probabilities");
    const double f1t = p.number("f1t"), f1c = p.number("f1c"), f2t = p.number("f2t"), f2c = p.number("f2c");
    p.finish();
    spec.treatment = hazards_from_probabilities(f1t, f2t, spec.tau);
    spec.control = hazards_from_probabilities(f1c, f2c, spec.tau);
  } else {
    spec.treatment = arm_from_json(r.at("treatment"), "scenario.treatment");
    spec.control = arm_from_json(r.at("control"), "scenario.control");
  }
  r.finish();
  validate(spec);
  return spec;
}

// Reads the SimulationConfig keys; the caller finishes the reader.
SimulationConfig read_simulation_keys(ObjectReader& r) {
  SimulationConfig c;
  c.scenario = scenario_from_json(r.at("scenario"));
  c.n_total = r.integer("n_total");
  c.replicates = r.integer("replicates", 1000);
  const auto& seed = r.at("seed");
  if (!seed.is_number_unsigned()) throw std::invalid_argument(r.context() + ".seed: expected a nonnegative integer");
  c.seed = seed.get<std::uint64_t>();
  c.analysis = parse_analysis(r.text("analysis", "event_specific_logrank"));
  c.trial.allocation = parse_allocation(r.text("allocation", "permuted_block"));
  if (r.has("censoring")) {
    ObjectReader cr(r.at("censoring"), r.context() + ".censoring");
    c.trial.censoring.uniform_window = cr.number("uniform_window");
    cr.finish();
  } else {
    r.text("censoring", "");
  }
  c.alpha = r.number("alpha", 0.05);
  c.threads = static_cast<unsigned>(r.integer("threads", 0));
  return c;
}

}  // namespace

// ---- basic values ----------------------------------------------------------

Json to_json(const ExtendedTime& t) { return t.is_infinite() ? Json("inf") : Json(t.value()); }

Json to_json(const StepFunction& curve) {
  Json steps = Json::array();
  for (std::size_t i = 0; i < curve.jump_times().size(); ++i) {
    steps.push_back(Json::array({curve.jump_times()[i], curve.values()[i]}));
  }
  return Json{{"value_at_zero", curve.value_at_zero()}, {"steps", steps}};
}

Json to_json(const ArmHazards& arm) { return Json{{"alpha01", arm.alpha01}, {"alpha02", arm.alpha02}}; }

Json to_json(const ScenarioSpec& spec) {
  return Json{{"treatment", to_json(spec.treatment)},
              {"control", to_json(spec.control)},
              {"tau", spec.tau},
              {"allocation_p", spec.allocation_p}};
}

Json to_json(const EffectMeasures& m) {
  return Json{{"theta_es", m.theta_es},
              {"theta_es_ce", m.theta_es_ce},
              {"theta_sd_tau", m.theta_sd_tau},
              {"odds_ratio_tau", m.odds_ratio_tau}};
}

Json to_json(const SampleSizePlan& plan) {
  return Json{{"method", method_name(plan.method)},
              {"theta", plan.theta},
              {"required_events", plan.required_events},
              {"required_events_int", plan.required_events_int},
              {"psi", plan.psi},
              {"total_n", plan.total_n},
              {"n_treatment", plan.n_treatment},
              {"n_control", plan.n_control}};
}

Json to_json(const DesignParams& params) {
  return Json{{"alpha", params.alpha_two_sided},
              {"power", params.power},
              {"allocation_p", params.allocation_p},
              {"event_rounding", rounding_name(params.event_rounding)}};
}

Json to_json(const TwoSampleTestResult& r) {
  return Json{{"statistic", r.statistic},
              {"p_value", r.p_value},
              {"observed_minus_expected", r.observed_minus_expected},
              {"variance", r.variance}};
}

Json to_json(const OperatingCharacteristics& oc) {
  Json j{{"replicates", oc.replicates}, {"rejection_rate", oc.rejection_rate}, {"mcse", oc.mcse}};
  Json est = Json::object();
  for (const auto& [name, s] : oc.estimates) {
    est[name] = Json{{"mean", s.mean}, {"sd", s.sd}, {"count", s.count}};
  }
  j["estimates"] = est;
  if (oc.final_n) {
    const auto& f = *oc.final_n;
    j["final_n"] = Json{{"mean", f.mean}, {"min", f.min},       {"q25", f.q25},
                        {"median", f.median}, {"q75", f.q75}, {"max", f.max},
                        {"fallback_count", f.fallback_count}};
  }
  return j;
}

// ---- scenario tables -------------------------------------------------------

Json table_to_json(const ScenarioTable& table) {
  Json rows = Json::array();
  for (const auto& row : table.rows) {
    rows.push_back(Json{{"alpha01t", row.scenario.treatment.alpha01},
                        {"alpha01c", row.scenario.control.alpha01},
                        {"alpha02t", row.scenario.treatment.alpha02},
                        {"alpha02c", row.scenario.control.alpha02},
                        {"f1t", row.treatment_at_tau.f1},
                        {"f1c", row.control_at_tau.f1},
                        {"f2t", row.treatment_at_tau.f2},
                        {"f2c", row.control_at_tau.f2},
                        {"theta_es", row.measures.theta_es},
                        {"theta_es_ce", row.measures.theta_es_ce},
                        {"theta_sd_tau", row.measures.theta_sd_tau},
                        {"odds_ratio_tau", row.measures.odds_ratio_tau},
                        {"n_es", optional_json(row.n_es)},
                        {"n_sd", optional_json(row.n_sd)},
                        {"n_or", optional_json(row.n_or)}});
  }
  return Json{{"schema_version", kSchemaVersion},
              {"table", table.name},
              {"layout", table.layout == ScenarioRowInput::Kind::hazards ? "hazards" : "probabilities"},
              {"tau", table.tau},
              {"design", to_json(table.params)},
              {"rows", rows}};
}

std::string render_table_text(const ScenarioTable& table) {
  std::vector<std::vector<std::string>> cells;
  const bool hazards = table.layout == ScenarioRowInput::Kind::hazards;
  if (hazards) {
    cells.push_back({"a01T", "a01C", "a02T", "a02C", "thetaES", "thetaES-CE", "F1T", "F1C", "F2T", "F2C", "thetaSD"});
  } else {
    cells.push_back({"F1T", "F1C", "F2T", "F2C", "thetaES", "N_ES", "thetaES-CE", "thetaSD", "N_SD", "OR", "N_OR"});
  }
  for (const auto& row : table.rows) {
    const auto& t = row.treatment_at_tau;
    const auto& c = row.control_at_tau;
    const auto& m = row.measures;
    if (hazards) {
      cells.push_back({fixed(row.scenario.treatment.alpha01, 4), fixed(row.scenario.control.alpha01, 4),
                       fixed(row.scenario.treatment.alpha02, 4), fixed(row.scenario.control.alpha02, 4),
                       fixed(m.theta_es, 2), fixed(m.theta_es_ce, 2), fixed(t.f1, 4), fixed(c.f1, 4), fixed(t.f2, 4),
                       fixed(c.f2, 4), fixed(m.theta_sd_tau, 2)});
    } else {
      cells.push_back({fixed(t.f1, 4), fixed(c.f1, 4), fixed(t.f2, 4), fixed(c.f2, 4), fixed(m.theta_es, 2),
                       optional_n(row.n_es), fixed(m.theta_es_ce, 2), fixed(m.theta_sd_tau, 2), optional_n(row.n_sd),
                       fixed(m.odds_ratio_tau, 2), optional_n(row.n_or)});
    }
  }
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& r : cells) {
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::ostringstream out;
  for (const auto& r : cells) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out << "  ";
      out << std::string(width[i] - r[i].size(), ' ') << r[i];
    }
    out << '\n';
  }
  return out.str();
}

std::string render_table_csv(const ScenarioTable& table) {
  std::ostringstream out;
  out.precision(17);
  out << "alpha01t,alpha01c,alpha02t,alpha02c,f1t,f1c,f2t,f2c,theta_es,theta_es_ce,theta_sd_tau,odds_ratio_tau,n_es,"
         "n_sd,n_or\n";
  for (const auto& row : table.rows) {
    out << row.scenario.treatment.alpha01 << ',' << row.scenario.control.alpha01 << ','
        << row.scenario.treatment.alpha02 << ',' << row.scenario.control.alpha02 << ',' << row.treatment_at_tau.f1
        << ',' << row.control_at_tau.f1 << ',' << row.treatment_at_tau.f2 << ',' << row.control_at_tau.f2 << ','
        << row.measures.theta_es << ',' << row.measures.theta_es_ce << ',' << row.measures.theta_sd_tau << ','
        << row.measures.odds_ratio_tau << ',' << optional_n(row.n_es) << ',' << optional_n(row.n_sd) << ','
        << optional_n(row.n_or) << '\n';
  }
  return out.str();
}

std::vector<ScenarioRowInput> read_scenario_rows_csv(std::istream& in, const std::string& source) {
  std::string line;
  long line_no = 0;
  std::optional<ScenarioRowInput::Kind> kind;
  std::vector<ScenarioRowInput> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) {
      const auto b = f.find_first_not_of(" \t");
      const auto e = f.find_last_not_of(" \t");
      fields.push_back(b == std::string::npos ? "" : f.substr(b, e - b + 1));
    }
    if (!kind) {
      const std::vector<std::string> hazards{"alpha01t", "alpha01c", "alpha02t", "alpha02c"};
      const std::vector<std::string> probs{"f1t", "f1c", "f2t", "f2c"};
      if (fields == hazards) {
        kind = ScenarioRowInput::Kind::hazards;
      } else if (fields == probs) {
        kind = ScenarioRowInput::Kind::probabilities;
      } else {
        throw ParseError(source, line_no, "expected header 'alpha01t,alpha01c,alpha02t,alpha02c' or 'f1t,f1c,f2t,f2c'");
      }
      continue;
    }
    if (fields.size() != 4) throw ParseError(source, line_no, "expected 4 fields");
    double v[4];
    for (int i = 0; i < 4; ++i) {
      try {
        std::size_t used = 0;
        v[i] = std::stod(fields[static_cast<std::size_t>(i)], &used);
        if (used != fields[static_cast<std::size_t>(i)].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParseError(source, line_no, "not a number: '" + fields[static_cast<std::size_t>(i)] + "'");
      }
    }
    rows.push_back(ScenarioRowInput{*kind, v[0], v[1], v[2], v[3]});
  }
  if (rows.empty()) throw ParseError(source, line_no, "no scenario rows");
  return rows;
}

// ---- dataset estimation ----------------------------------------------------

EstimateReport estimate_report(const Dataset& data, const EstimateOptions& options) {
  if (data.empty()) throw std::invalid_argument("estimate: dataset has no records");
  const Days tau = options.tau;
  EstimateReport report;
  const bool complete = is_censoring_complete(data, tau);
  if (!complete && options.require_subdistribution_km) {
    throw IncompleteFollowUpError(
        "subdistribution Kaplan-Meier requested but the data contain censoring before tau; the censored "
        "subdistribution time route assumes censoring-complete follow-up on [0, tau)");
  }
  if (!complete) {
    report.notices.push_back(
        "records censored before tau: subdistribution Kaplan-Meier and Gray's test skipped (they assume "
        "censoring-complete follow-up); Aalen-Johansen curves remain valid");
  }

  auto describe = [&](const std::string& group, const Dataset& subset) {
    Json g;
    long c0 = 0, c1 = 0, c2 = 0;
    for (const auto& r : subset) {
      c0 += r.status == Status::censored;
      c1 += r.status == Status::favourable;
      c2 += r.status == Status::competing;
    }
    g["n"] = subset.size();
    g["counts"] = Json{{"censored", c0}, {"favourable", c1}, {"competing", c2}};

    const auto km = kaplan_meier(subset);
    const auto aj1 = aalen_johansen(subset, Cause::favourable);
    const auto aj2 = aalen_johansen(subset, Cause::competing);
    g["at_tau"] = Json{{"event_free", km(tau)}, {"f1", aj1(tau)}, {"f2", aj2(tau)}};
    g["median_time_to_favourable"] = to_json(empirical_median(aj1));
    g["restricted_mean_lost"] = empirical_restricted_mean_lost(aj1, tau);

    Json curves;
    curves["kaplan_meier_event_free"] = to_json(km);
    curves["aalen_johansen_cause1"] = to_json(aj1);
    curves["aalen_johansen_cause2"] = to_json(aj2);
    report.curves.push_back({group, "kaplan_meier_event_free", km});
    report.curves.push_back({group, "aalen_johansen_cause1", aj1});
    report.curves.push_back({group, "aalen_johansen_cause2", aj2});
    if (complete) {
      const auto sd = subdistribution_km(subset, tau);
      curves["subdistribution_km"] = to_json(sd);
      report.curves.push_back({group, "subdistribution_km", sd});
    }
    g["curves"] = curves;
    return g;
  };

  Json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = "estimate";
  j["tau"] = tau;
  j["n"] = data.size();
  j["censoring_complete"] = complete;
  j["pooled"] = describe("pooled", data);

  Dataset arm_t, arm_c;
  for (const auto& r : data) (r.arm == Arm::treatment ? arm_t : arm_c).push_back(r);
  if (options.by_arm) {
    Json arms = Json::object();
    if (!arm_t.empty()) arms["T"] = describe("T", arm_t);
    if (!arm_c.empty()) arms["C"] = describe("C", arm_c);
    j["arms"] = arms;
  }

  if (arm_t.empty() || arm_c.empty()) {
    report.notices.push_back("only one arm present: two-sample tests skipped");
    j["tests"] = nullptr;
  } else {
    Json tests;
    tests["event_specific_cause1"] = to_json(logrank_test(data, EventSpecific{Cause::favourable}));
    tests["event_specific_cause2"] = to_json(logrank_test(data, EventSpecific{Cause::competing}));
    tests["gray"] = complete ? to_json(logrank_test(data, Subdistribution{tau})) : Json(nullptr);
    j["tests"] = tests;
  }
  j["notices"] = report.notices;
  report.json = std::move(j);
  return report;
}

void write_curves_csv(std::ostream& out, const std::vector<EstimateReport::NamedCurve>& curves) {
  out << "group,curve,time,value\n";
  const auto old_precision = out.precision(17);
  for (const auto& c : curves) {
    out << c.group << ',' << c.name << ',' << 0 << ',' << c.curve.value_at_zero() << '\n';
    for (std::size_t i = 0; i < c.curve.jump_times().size(); ++i) {
      out << c.group << ',' << c.name << ',' << c.curve.jump_times()[i] << ',' << c.curve.values()[i] << '\n';
    }
  }
  out.precision(old_precision);
}

// ---- simulation configs ------------------------------------------------------

SimulationConfig simulation_config_from_json(const Json& j) {
  ObjectReader r(j, "config");
  auto c = read_simulation_keys(r);
  r.finish();
  validate(c);
  return c;
}

SsrConfig ssr_config_from_json(const Json& j) {
  ObjectReader r(j, "config");
  SsrConfig c;
  c.base = read_simulation_keys(r);
  ObjectReader s(r.at("ssr"), "config.ssr");
  c.pilot_fraction = s.number("pilot_fraction", 0.5);
  c.recalculation = parse_recalculation(s.text("recalculation", "once"));
  c.n_max_cap = s.integer("n_max_cap", 2 * c.base.n_total);
  c.planning_theta = s.number("planning_theta");
  if (s.has("design")) {
    ObjectReader d(s.at("design"), "config.ssr.design");
    c.design.alpha_two_sided = d.number("alpha", 0.05);
    c.design.power = d.number("power", 0.8);
    c.design.allocation_p = d.number("allocation_p", c.base.scenario.allocation_p);
    c.design.event_rounding = parse_rounding(d.text("event_rounding", "up"));
    d.finish();
  } else {
    s.text("design", "");
    c.design.allocation_p = c.base.scenario.allocation_p;
  }
  s.finish();
  r.finish();
  validate(c);
  return c;
}

Json to_json(const SimulationConfig& config) {
  Json j{{"scenario", to_json(config.scenario)},
         {"n_total", config.n_total},
         {"replicates", config.replicates},
         {"seed", config.seed},
         {"analysis", analysis_name(config.analysis)},
         {"allocation", allocation_name(config.trial.allocation)},
         {"alpha", config.alpha}};
  if (config.trial.censoring.uniform_window) {
    j["censoring"] = Json{{"uniform_window", *config.trial.censoring.uniform_window}};
  } else {
    j["censoring"] = nullptr;
  }
  return j;
}

Json to_json(const SsrConfig& config) {
  Json j = to_json(config.base);
  j["ssr"] = Json{{"pilot_fraction", config.pilot_fraction},
                  {"recalculation", recalculation_name(config.recalculation)},
                  {"n_max_cap", config.n_max_cap},
                  {"planning_theta", config.planning_theta},
                  {"design", to_json(config.design)}};
  return j;
}

void write_replicates_csv(std::ostream& out, const std::vector<ReplicateOutcome>& reps) {
  out << "replicate,n_pilot,n_final,psi_hat,fallback,statistic,p_value,rejected,log_theta_es_hat,log_theta_sd_hat,"
         "f1_tau_treatment,f1_tau_control,f2_tau_treatment,f2_tau_control\n";
  const auto old_precision = out.precision(17);
  for (const auto& r : reps) {
    out << r.replicate << ',' << r.n_pilot << ',' << r.n_final << ',';
    if (std::isnan(r.psi_hat)) {
      out << "NA";
    } else {
      out << r.psi_hat;
    }
    out << ',' << r.fallback << ',' << r.statistic << ',' << r.p_value << ',' << r.rejected << ','
        << r.log_theta_es_hat << ',' << r.log_theta_sd_hat << ',' << r.f1_tau_treatment << ',' << r.f1_tau_control
        << ',' << r.f2_tau_treatment << ',' << r.f2_tau_control << '\n';
  }
  out.precision(old_precision);
}

}  // namespace crtrial
