#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crtrial/core_model.hpp"

namespace crtrial {

enum class PlanningMethod { event_specific_hr, subdistribution_hr, odds_ratio };

std::string_view method_name(PlanningMethod method);
PlanningMethod parse_method(std::string_view name);

// How the real-valued Schoenfeld event count is turned into an integer.
// `up` reproduces the probability-based planning table exactly; `nearest`
// reproduces published median-based plans (120.3 events reported as 120).
enum class EventRounding { up, nearest };

std::string_view rounding_name(EventRounding rounding);
EventRounding parse_rounding(std::string_view name);

struct DesignParams {
  double alpha_two_sided = 0.05;
  double power = 0.8;
  double allocation_p = 0.5;
  EventRounding event_rounding = EventRounding::up;
};

void validate(const DesignParams& params);

struct SampleSizePlan {
  double required_events = 0.0;  // real-valued
  long required_events_int = 0;
  double psi = 0.0;  // probability that a randomized subject contributes a favourable event
  long total_n = 0;
  long n_treatment = 0;
  long n_control = 0;
  PlanningMethod method = PlanningMethod::event_specific_hr;
  double theta = 1.0;  // effect the plan is powered for
};

// Schoenfeld: (u_{1-alpha/2} + u_{1-beta})^2 / [p (1 - p) log(theta)^2].
double schoenfeld_events(double theta, const DesignParams& params);

long round_events(double events, EventRounding rounding);

// Smallest d <= 12 with p * d integral (within 1e-9), else 1. A total N is a
// multiple of d so that the arms split exactly.
long allocation_denominator(double allocation_p);
long round_up_to_multiple(double n, long multiple);

// Two-group comparison of a binary outcome (logistic regression with one
// binary covariate, Hsieh 1998 formula 2). Returns the real-valued total N.
double binary_outcome_total_n(double prob_treatment, double prob_control, const DesignParams& params);

struct PlanResult {
  SampleSizePlan plan;
  EffectMeasures measures;
  ScenarioSpec scenario;
};

PlanResult plan_from_probabilities(double f1t, double f1c, double f2t, double f2c, Days tau,
                                   const DesignParams& params, PlanningMethod method);

// Median-based planning under exponential times to the favourable event:
// theta = median_control / median_treatment, N = ceil(E / improvement_prob).
SampleSizePlan plan_from_medians(Days median_treatment, Days median_control, double improvement_prob,
                                 const DesignParams& params);

// A scenario-table row: either hazards (planning-table "hazard" layout) or
// cumulative probabilities at tau ("probability" layout).
struct ScenarioRowInput {
  enum class Kind { hazards, probabilities } kind = Kind::hazards;
  double a = 0.0;  // alpha01T or F1T(tau)
  double b = 0.0;  // alpha01C or F1C(tau)
  double c = 0.0;  // alpha02T or F2T(tau)
  double d = 0.0;  // alpha02C or F2C(tau)
};

struct ScenarioRow {
  ScenarioSpec scenario;
  CumulativeIncidencePair treatment_at_tau;
  CumulativeIncidencePair control_at_tau;
  EffectMeasures measures;
  // Absent when the corresponding effect is null (no finite sample size).
  std::optional<long> n_es;
  std::optional<long> n_sd;
  std::optional<long> n_or;
};

struct ScenarioTable {
  std::string name;
  ScenarioRowInput::Kind layout = ScenarioRowInput::Kind::hazards;
  Days tau = kDefaultHorizon;
  DesignParams params;
  std::vector<ScenarioRow> rows;
};

// Evaluates every row; an invalid row raises std::invalid_argument naming its
// (1-based) index.
ScenarioTable scenario_table(const std::vector<ScenarioRowInput>& rows, Days tau, const DesignParams& params,
                             std::string name = "custom");

// "table1": fifteen hazard scenarios; "table2": five probability scenarios.
ScenarioTable preset_table(std::string_view preset);
std::vector<ScenarioRowInput> preset_rows(std::string_view preset);

}  // namespace crtrial
