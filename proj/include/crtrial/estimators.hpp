#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "crtrial/records.hpp"
#include "crtrial/time.hpp"

namespace crtrial {

// Right-continuous step curve stored sparsely at its jump times.
class StepFunction {
 public:
  StepFunction() = default;
  // Throws std::invalid_argument unless jump_times is strictly increasing,
  // the two vectors have equal length and every value is within [0, 1].
  StepFunction(double value_at_zero, std::vector<Days> jump_times, std::vector<double> values);

  double operator()(Days t) const;
  double value_at_zero() const { return value_at_zero_; }
  const std::vector<Days>& jump_times() const { return jump_times_; }
  const std::vector<double>& values() const { return values_; }
  double terminal_value() const { return values_.empty() ? value_at_zero_ : values_.back(); }

  // Exact integral of the curve over [0, upper].
  double integral(Days upper) const;

 private:
  double value_at_zero_ = 0.0;
  std::vector<Days> jump_times_;
  std::vector<double> values_;
};

enum class Cause : int { favourable = 1, competing = 2 };

struct TwoSampleTestResult {
  double statistic = 0.0;  // (O - E) / sqrt(V), treatment arm
  double p_value = 1.0;    // two-sided, chi-square(1) tail of statistic^2
  double observed_minus_expected = 0.0;
  double variance = 0.0;
};

struct EventSpecific {
  Cause cause = Cause::favourable;
};
struct Subdistribution {
  Days tau = kDefaultHorizon;
};

// Thrown when censoring before tau rules out the censored-subdistribution-time
// route (latent censoring times of subjects with a competing event are
// unknown).
class IncompleteFollowUpError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

using EventPredicate = std::function<bool(const EventRecord&)>;

// Product-limit estimate of P(T > t) counting records matching `is_event`
// as events and everything else as censored at its time.
StepFunction kaplan_meier(std::span<const EventRecord> data, const EventPredicate& is_event);
StepFunction kaplan_meier(std::span<const EventRecord> data);  // all event types

// Aalen-Johansen estimate of P(T <= t, X(T) = cause).
StepFunction aalen_johansen(std::span<const EventRecord> data, Cause cause);

// One minus Kaplan-Meier on censored subdistribution times min(theta, tau):
// competing events stay in the risk set until tau. Requires censoring-complete
// data on [0, tau); throws IncompleteFollowUpError otherwise.
StepFunction subdistribution_km(std::span<const EventRecord> data, Days tau);

// One minus Kaplan-Meier that treats other-cause events as censorings. Biased
// upwards whenever competing events occur.
StepFunction naive_km_biased(std::span<const EventRecord> data, Cause cause);

// True when no record is censored strictly before tau.
bool is_censoring_complete(std::span<const EventRecord> data, Days tau);

// Two-sample logrank test (treatment vs control). Event-specific mode counts
// `cause` events and censors the other cause at its time. Subdistribution mode
// runs on censored subdistribution times, which gives Gray's test for
// censoring-complete data; incomplete data raise IncompleteFollowUpError.
TwoSampleTestResult logrank_test(std::span<const EventRecord> data, EventSpecific mode);
TwoSampleTestResult logrank_test(std::span<const EventRecord> data, Subdistribution mode);

ExtendedTime empirical_median(const StepFunction& incidence_curve);
Days empirical_restricted_mean_lost(const StepFunction& incidence_curve, Days tau);

}  // namespace crtrial
