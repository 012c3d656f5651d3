#pragma once

#include "crtrial/records.hpp"
#include "crtrial/time.hpp"

namespace crtrial {

class StepFunction;

// Constant event-specific hazards (events per day) of one arm.
struct ArmHazards {
  double alpha01 = 0.0;  // favourable
  double alpha02 = 0.0;  // competing

  double all_events() const { return alpha01 + alpha02; }
  // Eventual probability of a favourable first event, alpha01 / (alpha01 + alpha02).
  double favourable_plateau() const { return alpha01 / all_events(); }
};

// Throws std::invalid_argument unless both rates are >= 0 with a positive sum.
void validate(const ArmHazards& arm);

struct ScenarioSpec {
  ArmHazards treatment;
  ArmHazards control;
  Days tau = kDefaultHorizon;
  double allocation_p = 0.5;  // fraction randomized to treatment

  const ArmHazards& arm(Arm a) const { return a == Arm::treatment ? treatment : control; }
};

void validate(const ScenarioSpec& spec);

struct CumulativeIncidencePair {
  double f1 = 0.0;        // P(T <= t, X(T) = 1)
  double f2 = 0.0;        // P(T <= t, X(T) = 2)
  double survival = 1.0;  // P(T > t)
};

struct EffectMeasures {
  double theta_es = 1.0;        // alpha01T / alpha01C
  double theta_es_ce = 1.0;     // alpha02T / alpha02C
  double theta_sd_tau = 1.0;    // log(1 - F1T(tau)) / log(1 - F1C(tau))
  double odds_ratio_tau = 1.0;  // odds of F1T(tau) over odds of F1C(tau)
};

CumulativeIncidencePair cumulative_incidence(const ArmHazards& arm, Days t);

// Requires F1 of both arms at tau strictly inside (0, 1); throws
// std::domain_error otherwise. theta_es_ce needs alpha02C > 0 unless both
// competing hazards are zero (then it is reported as 1).
EffectMeasures effect_measures(const ScenarioSpec& spec);

// Inverts the closed-form cumulative incidences at tau.
ArmHazards hazards_from_probabilities(double f1_tau, double f2_tau, Days tau);

// lambda(t) = alpha01 / (1 + F2(t) / P(T > t)).
double subdistribution_hazard(const ArmHazards& arm, Days t);

// tau - integral_0^tau F1(u) du.
Days restricted_mean_lost(const ArmHazards& arm, Days tau);
Days restricted_mean_lost(const StepFunction& f1_curve, Days tau);

// inf{t : F1(t) >= 0.5}; INFINITE when F1 never reaches one half.
ExtendedTime median_subdistribution_time(const ArmHazards& arm);
ExtendedTime median_subdistribution_time(const StepFunction& f1_curve);

// Subdistribution time: the event time for a favourable first event,
// INFINITE for a competing one. Censored records have no observable value
// and are rejected.
ExtendedTime subdistribution_time(const EventRecord& record);

// min(subdistribution time, tau). Favourable events after tau are outside
// the horizon and map to tau.
Days to_censored_subdistribution_time(const EventRecord& record, Days tau);

// tau minus the censored subdistribution time.
Days ventilator_free_days(const EventRecord& record, Days tau);

}  // namespace crtrial
