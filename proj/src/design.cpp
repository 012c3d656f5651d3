#include "crtrial/design.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "crtrial/normal.hpp"

namespace crtrial {

namespace {

// Guards ceil() against representation error, e.g. 125 / 0.625 evaluating
// to 200.00000000000003.
constexpr double kRoundingSlack = 1e-9;

long ceil_with_slack(double x) { return static_cast<long>(std::ceil(x - kRoundingSlack * std::max(1.0, std::fabs(x)))); }

bool is_null_ratio(double ratio) { return std::fabs(std::log(ratio)) < 1e-12; }

void require_probability(double p, const char* what) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument(std::string(what) + " must lie strictly between 0 and 1");
}

void split_arms(SampleSizePlan& plan, double allocation_p) {
  plan.n_treatment = std::lround(allocation_p * static_cast<double>(plan.total_n));
  plan.n_control = plan.total_n - plan.n_treatment;
}

SampleSizePlan plan_for_scenario(const ScenarioSpec& scenario, const EffectMeasures& measures,
                                 const DesignParams& params, PlanningMethod method) {
  const auto t = cumulative_incidence(scenario.treatment, scenario.tau);
  const auto c = cumulative_incidence(scenario.control, scenario.tau);
  const double p = params.allocation_p;
  const long multiple = allocation_denominator(p);

  SampleSizePlan plan;
  plan.method = method;
  plan.psi = p * t.f1 + (1.0 - p) * c.f1;

  if (method == PlanningMethod::odds_ratio) {
    plan.theta = measures.odds_ratio_tau;
    plan.total_n = round_up_to_multiple(binary_outcome_total_n(t.f1, c.f1, params), multiple);
    plan.required_events = plan.psi * static_cast<double>(plan.total_n);
    plan.required_events_int = ceil_with_slack(plan.required_events);
  } else {
    plan.theta = method == PlanningMethod::event_specific_hr ? measures.theta_es : measures.theta_sd_tau;
    plan.required_events = schoenfeld_events(plan.theta, params);
    plan.required_events_int = round_events(plan.required_events, params.event_rounding);
    plan.total_n = round_up_to_multiple(static_cast<double>(plan.required_events_int) / plan.psi, multiple);
  }
  split_arms(plan, p);
  return plan;
}

}  // namespace

std::string_view method_name(PlanningMethod method) {
  switch (method) {
    case PlanningMethod::event_specific_hr:
      return "event_specific";
    case PlanningMethod::subdistribution_hr:
      return "subdistribution";
    case PlanningMethod::odds_ratio:
      return "odds_ratio";
  }
  return "unknown";
}

PlanningMethod parse_method(std::string_view name) {
  if (name == "event_specific" || name == "es") return PlanningMethod::event_specific_hr;
  if (name == "subdistribution" || name == "sd") return PlanningMethod::subdistribution_hr;
  if (name == "odds_ratio" || name == "or") return PlanningMethod::odds_ratio;
  throw std::invalid_argument("unknown planning method '" + std::string(name) + "'");
}

std::string_view rounding_name(EventRounding rounding) { return rounding == EventRounding::up ? "up" : "nearest"; }

EventRounding parse_rounding(std::string_view name) {
  if (name == "up") return EventRounding::up;
  if (name == "nearest") return EventRounding::nearest;
  throw std::invalid_argument("unknown event rounding '" + std::string(name) + "' (expected up or nearest)");
}

void validate(const DesignParams& params) {
  require_probability(params.alpha_two_sided, "alpha");
  require_probability(params.power, "power");
  require_probability(params.allocation_p, "allocation p");
}

double schoenfeld_events(double theta, const DesignParams& params) {
  validate(params);
  if (!(theta > 0.0) || !std::isfinite(theta)) throw std::invalid_argument("hazard ratio must be positive and finite");
  if (is_null_ratio(theta)) throw std::domain_error("hazard ratio 1 needs infinitely many events");
  const double z = normal_quantile(1.0 - params.alpha_two_sided / 2.0) + normal_quantile(params.power);
  const double log_theta = std::log(theta);
  const double p = params.allocation_p;
  return z * z / (p * (1.0 - p) * log_theta * log_theta);
}

long round_events(double events, EventRounding rounding) {
  return rounding == EventRounding::up ? ceil_with_slack(events) : std::lround(events);
}

long allocation_denominator(double allocation_p) {
  for (long d = 1; d <= 12; ++d) {
    const double scaled = allocation_p * static_cast<double>(d);
    if (std::fabs(scaled - std::round(scaled)) < 1e-9) return d;
  }
  return 1;
}

long round_up_to_multiple(double n, long multiple) {
  if (multiple < 1) throw std::invalid_argument("multiple must be positive");
  return ceil_with_slack(n / static_cast<double>(multiple)) * multiple;
}

double binary_outcome_total_n(double prob_treatment, double prob_control, const DesignParams& params) {
  validate(params);
  require_probability(prob_treatment, "treatment event probability");
  require_probability(prob_control, "control event probability");
  if (prob_treatment == prob_control) throw std::domain_error("equal event probabilities: no finite sample size");

  // Hsieh's notation: B = share with covariate 1 (treatment), P1 / P2 = event
  // probabilities at covariate 0 / 1, P = overall event probability.
  const double b = params.allocation_p;
  const double p1 = prob_control;
  const double p2 = prob_treatment;
  const double p = (1.0 - b) * p1 + b * p2;
  const double za = normal_quantile(1.0 - params.alpha_two_sided / 2.0);
  const double zb = normal_quantile(params.power);
  const double numerator = za * std::sqrt(p * (1.0 - p) / b) + zb * std::sqrt(p1 * (1.0 - p1) + p2 * (1.0 - p2) * (1.0 - b) / b);
  return numerator * numerator / ((p1 - p2) * (p1 - p2) * (1.0 - b));
}

PlanResult plan_from_probabilities(double f1t, double f1c, double f2t, double f2c, Days tau,
                                   const DesignParams& params, PlanningMethod method) {
  validate(params);
  PlanResult out;
  out.scenario.treatment = hazards_from_probabilities(f1t, f2t, tau);
  out.scenario.control = hazards_from_probabilities(f1c, f2c, tau);
  out.scenario.tau = tau;
  out.scenario.allocation_p = params.allocation_p;
  out.measures = effect_measures(out.scenario);
  out.plan = plan_for_scenario(out.scenario, out.measures, params, method);
  return out;
}

SampleSizePlan plan_from_medians(Days median_treatment, Days median_control, double improvement_prob,
                                 const DesignParams& params) {
  validate(params);
  if (!(median_treatment > 0.0) || !(median_control > 0.0)) throw std::invalid_argument("medians must be positive");
  if (median_treatment == median_control) throw std::domain_error("equal medians: no finite sample size");
  if (!(improvement_prob > 0.0 && improvement_prob <= 1.0)) {
    throw std::invalid_argument("improvement probability must lie in (0, 1]");
  }
  SampleSizePlan plan;
  plan.method = PlanningMethod::event_specific_hr;
  // Exponential times: hazard ratio is the inverse ratio of medians.
  plan.theta = median_control / median_treatment;
  plan.psi = improvement_prob;
  plan.required_events = schoenfeld_events(plan.theta, params);
  plan.required_events_int = round_events(plan.required_events, params.event_rounding);
  plan.total_n = ceil_with_slack(static_cast<double>(plan.required_events_int) / improvement_prob);
  split_arms(plan, params.allocation_p);
  return plan;
}

ScenarioTable scenario_table(const std::vector<ScenarioRowInput>& rows, Days tau, const DesignParams& params,
                             std::string name) {
  validate(params);
  ScenarioTable table;
  table.name = std::move(name);
  table.tau = tau;
  table.params = params;
  if (!rows.empty()) table.layout = rows.front().kind;

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& in = rows[i];
    try {
      ScenarioRow row;
      row.scenario.tau = tau;
      row.scenario.allocation_p = params.allocation_p;
      if (in.kind == ScenarioRowInput::Kind::hazards) {
        row.scenario.treatment = ArmHazards{in.a, in.c};
        row.scenario.control = ArmHazards{in.b, in.d};
      } else {
        row.scenario.treatment = hazards_from_probabilities(in.a, in.c, tau);
        row.scenario.control = hazards_from_probabilities(in.b, in.d, tau);
      }
      row.treatment_at_tau = cumulative_incidence(row.scenario.treatment, tau);
      row.control_at_tau = cumulative_incidence(row.scenario.control, tau);
      row.measures = effect_measures(row.scenario);
      const auto& m = row.measures;
      if (!is_null_ratio(m.theta_es)) {
        row.n_es = plan_for_scenario(row.scenario, m, params, PlanningMethod::event_specific_hr).total_n;
      }
      if (!is_null_ratio(m.theta_sd_tau)) {
        row.n_sd = plan_for_scenario(row.scenario, m, params, PlanningMethod::subdistribution_hr).total_n;
      }
      if (!is_null_ratio(m.odds_ratio_tau)) {
        row.n_or = plan_for_scenario(row.scenario, m, params, PlanningMethod::odds_ratio).total_n;
      }
      table.rows.push_back(std::move(row));
    } catch (const std::exception& e) {
      throw std::invalid_argument("row " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return table;
}

std::vector<ScenarioRowInput> preset_rows(std::string_view preset) {
  using Kind = ScenarioRowInput::Kind;
  if (preset == "table1") {
    // alpha01T, alpha01C, alpha02T, alpha02C
    return {
        {Kind::hazards, 0.04, 0.04, 0.01, 0.01}, {Kind::hazards, 0.04, 0.04, 0.01, 0.02},
        {Kind::hazards, 0.04, 0.04, 0.02, 0.01}, {Kind::hazards, 0.06, 0.04, 0.01, 0.01},
        {Kind::hazards, 0.06, 0.04, 0.01, 0.02}, {Kind::hazards, 0.06, 0.04, 0.02, 0.01},
        {Kind::hazards, 0.08, 0.04, 0.01, 0.01}, {Kind::hazards, 0.08, 0.04, 0.01, 0.02},
        {Kind::hazards, 0.08, 0.04, 0.02, 0.01}, {Kind::hazards, 0.04, 0.06, 0.01, 0.01},
        {Kind::hazards, 0.04, 0.06, 0.01, 0.02}, {Kind::hazards, 0.04, 0.06, 0.02, 0.01},
        {Kind::hazards, 0.04, 0.08, 0.01, 0.01}, {Kind::hazards, 0.04, 0.08, 0.01, 0.02},
        {Kind::hazards, 0.04, 0.08, 0.02, 0.01},
    };
  }
  if (preset == "table2") {
    // F1T, F1C, F2T, F2C at tau
    return {
        {Kind::probabilities, 0.7, 0.55, 0.10, 0.10}, {Kind::probabilities, 0.7, 0.55, 0.15, 0.15},
        {Kind::probabilities, 0.7, 0.55, 0.20, 0.20}, {Kind::probabilities, 0.7, 0.55, 0.10, 0.20},
        {Kind::probabilities, 0.7, 0.55, 0.15, 0.20},
    };
  }
  throw std::invalid_argument("unknown preset '" + std::string(preset) + "' (expected table1 or table2)");
}

ScenarioTable preset_table(std::string_view preset) {
  return scenario_table(preset_rows(preset), kDefaultHorizon, DesignParams{}, std::string(preset));
}

}  // namespace crtrial
