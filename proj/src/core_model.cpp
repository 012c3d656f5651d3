#include "crtrial/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "crtrial/estimators.hpp"

namespace crtrial {

namespace {

void require_time(Days t, const char* where) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw std::invalid_argument(std::string(where) + ": time must be finite and nonnegative");
  }
}

// 1 - exp(-rate * t) without cancellation for small arguments.
double all_events_probability(double rate, Days t) { return -std::expm1(-rate * t); }

}  // namespace

void validate(const ArmHazards& arm) {
  if (!(arm.alpha01 >= 0.0) || !(arm.alpha02 >= 0.0) || !std::isfinite(arm.alpha01) ||
      !std::isfinite(arm.alpha02)) {
    throw std::invalid_argument("hazards must be finite and nonnegative");
  }
  if (!(arm.all_events() > 0.0)) {
    throw std::invalid_argument("alpha01 + alpha02 must be positive");
  }
}

void validate(const ScenarioSpec& spec) {
  validate(spec.treatment);
  validate(spec.control);
  if (!(spec.tau > 0.0) || !std::isfinite(spec.tau)) throw std::invalid_argument("tau must be positive");
  if (!(spec.allocation_p > 0.0 && spec.allocation_p < 1.0)) {
    throw std::invalid_argument("allocation_p must lie strictly between 0 and 1");
  }
}

CumulativeIncidencePair cumulative_incidence(const ArmHazards& arm, Days t) {
  validate(arm);
  require_time(t, "cumulative_incidence");
  const double rate = arm.all_events();
  const double any = all_events_probability(rate, t);
  CumulativeIncidencePair out;
  out.f1 = arm.alpha01 / rate * any;
  out.f2 = arm.alpha02 / rate * any;
  out.survival = std::exp(-rate * t);
  return out;
}

EffectMeasures effect_measures(const ScenarioSpec& spec) {
  validate(spec);
  const auto t = cumulative_incidence(spec.treatment, spec.tau);
  const auto c = cumulative_incidence(spec.control, spec.tau);
  for (double f1 : {t.f1, c.f1}) {
    if (!(f1 > 0.0 && f1 < 1.0)) {
      throw std::domain_error("F1(tau) must lie strictly inside (0, 1) in both arms");
    }
  }

  EffectMeasures m;
  m.theta_es = spec.treatment.alpha01 / spec.control.alpha01;
  if (spec.control.alpha02 > 0.0) {
    m.theta_es_ce = spec.treatment.alpha02 / spec.control.alpha02;
  } else if (spec.treatment.alpha02 == 0.0) {
    m.theta_es_ce = 1.0;
  } else {
    throw std::domain_error("competing-event hazard ratio undefined: control alpha02 is zero");
  }
  m.theta_sd_tau = std::log1p(-t.f1) / std::log1p(-c.f1);
  m.odds_ratio_tau = (t.f1 / (1.0 - t.f1)) / (c.f1 / (1.0 - c.f1));
  return m;
}

ArmHazards hazards_from_probabilities(double f1_tau, double f2_tau, Days tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be positive");
  if (!(f1_tau > 0.0) || !(f2_tau >= 0.0)) {
    throw std::invalid_argument("need f1 > 0 and f2 >= 0");
  }
  const double total = f1_tau + f2_tau;
  if (!(total < 1.0)) {
    throw std::invalid_argument("f1 + f2 must be below 1 for finite hazards");
  }
  const double rate = -std::log1p(-total) / tau;
  return ArmHazards{rate * f1_tau / total, rate * f2_tau / total};
}

double subdistribution_hazard(const ArmHazards& arm, Days t) {
  validate(arm);
  require_time(t, "subdistribution_hazard");
  if (arm.alpha02 == 0.0) return arm.alpha01;
  // F2(t) / P(T > t) = alpha02 / rate * (exp(rate t) - 1)
  const double rate = arm.all_events();
  const double ratio = arm.alpha02 / rate * std::expm1(rate * t);
  return arm.alpha01 / (1.0 + ratio);
}

Days restricted_mean_lost(const ArmHazards& arm, Days tau) {
  validate(arm);
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  const double rate = arm.all_events();
  // integral_0^tau F1 = (alpha01 / rate) * (tau - (1 - exp(-rate tau)) / rate)
  const double area = arm.alpha01 / rate * (tau - all_events_probability(rate, tau) / rate);
  return tau - area;
}

Days restricted_mean_lost(const StepFunction& f1_curve, Days tau) {
  return empirical_restricted_mean_lost(f1_curve, tau);
}

ExtendedTime median_subdistribution_time(const ArmHazards& arm) {
  validate(arm);
  const double plateau = arm.favourable_plateau();
  if (!(plateau > 0.5)) return ExtendedTime::infinite();
  // F1(t) = plateau * (1 - exp(-rate t)) = 1/2
  const double t = -std::log1p(-0.5 / plateau) / arm.all_events();
  return ExtendedTime::finite(t);
}

ExtendedTime median_subdistribution_time(const StepFunction& f1_curve) { return empirical_median(f1_curve); }

ExtendedTime subdistribution_time(const EventRecord& record) {
  switch (record.status) {
    case Status::favourable:
      return ExtendedTime::finite(record.time);
    case Status::competing:
      return ExtendedTime::infinite();
    case Status::censored:
      break;
  }
  throw std::invalid_argument("record '" + record.id + "' is censored: subdistribution time unobserved");
}

Days to_censored_subdistribution_time(const EventRecord& record, Days tau) {
  switch (record.status) {
    case Status::favourable:
      return std::min(record.time, tau);
    case Status::competing:
      return tau;
    case Status::censored:
      break;
  }
  // Lost to follow-up before tau: the observation is the censoring time.
  return std::min(record.time, tau);
}

Days ventilator_free_days(const EventRecord& record, Days tau) {
  return tau - to_censored_subdistribution_time(record, tau);
}

}  // namespace crtrial
