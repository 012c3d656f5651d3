#include "crtrial/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "crtrial/core_model.hpp"
#include "crtrial/normal.hpp"

namespace crtrial {

StepFunction::StepFunction(double value_at_zero, std::vector<Days> jump_times, std::vector<double> values)
    : value_at_zero_(value_at_zero), jump_times_(std::move(jump_times)), values_(std::move(values)) {
  if (jump_times_.size() != values_.size()) {
    throw std::invalid_argument("StepFunction: jump_times and values differ in length");
  }
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(value_at_zero_) || !std::all_of(values_.begin(), values_.end(), in_unit)) {
    throw std::invalid_argument("StepFunction: values must lie in [0, 1]");
  }
  for (std::size_t i = 0; i < jump_times_.size(); ++i) {
    if (!(jump_times_[i] >= 0.0) || (i > 0 && !(jump_times_[i] > jump_times_[i - 1]))) {
      throw std::invalid_argument("StepFunction: jump times must be nonnegative and strictly increasing");
    }
  }
}

double StepFunction::operator()(Days t) const {
  const auto it = std::upper_bound(jump_times_.begin(), jump_times_.end(), t);
  if (it == jump_times_.begin()) return value_at_zero_;
  return values_[static_cast<std::size_t>(it - jump_times_.begin()) - 1];
}

double StepFunction::integral(Days upper) const {
  double area = 0.0;
  double left = 0.0;
  double level = value_at_zero_;
  for (std::size_t i = 0; i < jump_times_.size() && jump_times_[i] < upper; ++i) {
    area += level * (jump_times_[i] - left);
    left = jump_times_[i];
    level = values_[i];
  }
  if (upper > left) area += level * (upper - left);
  return area;
}

namespace {

void require_nonempty(std::span<const EventRecord> data, const char* where) {
  if (data.empty()) throw std::invalid_argument(std::string(where) + ": empty dataset");
}

// One distinct observed time with its counts.
struct TimeGroup {
  Days time = 0.0;
  long at_risk = 0;  // observed time >= `time`
  long size = 0;     // records observed exactly at `time`
  long events = 0;   // records counted as events
  long cause1 = 0;
  long cause2 = 0;
};

// Groups records by distinct time in ascending order. `is_event` decides what
// counts in TimeGroup::events.
template <typename TimeOf, typename IsEvent>
std::vector<TimeGroup> group_by_time(std::span<const EventRecord> data, TimeOf time_of, IsEvent is_event) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Days> times(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) times[i] = time_of(data[i]);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

  std::vector<TimeGroup> groups;
  long remaining = static_cast<long>(data.size());
  for (std::size_t i = 0; i < order.size();) {
    TimeGroup g;
    g.time = times[order[i]];
    g.at_risk = remaining;
    while (i < order.size() && times[order[i]] == g.time) {
      const EventRecord& r = data[order[i]];
      ++g.size;
      if (is_event(r)) ++g.events;
      if (r.status == Status::favourable) ++g.cause1;
      if (r.status == Status::competing) ++g.cause2;
      ++i;
    }
    remaining -= g.size;
    groups.push_back(g);
  }
  return groups;
}

Days observed_time(const EventRecord& r) { return r.time; }

StepFunction product_limit(const std::vector<TimeGroup>& groups, bool one_minus) {
  std::vector<Days> times;
  std::vector<double> values;
  double surv = 1.0;
  for (const auto& g : groups) {
    if (g.events == 0) continue;
    surv *= 1.0 - static_cast<double>(g.events) / static_cast<double>(g.at_risk);
    times.push_back(g.time);
    values.push_back(one_minus ? 1.0 - surv : surv);
  }
  return StepFunction(one_minus ? 0.0 : 1.0, std::move(times), std::move(values));
}

// Censoring at an event time counts as after the event: at_risk includes it.
struct TestSample {
  Days time;
  bool event;
  bool treatment;
};

TwoSampleTestResult logrank_core(std::vector<TestSample> sample) {
  const auto n_treatment = std::count_if(sample.begin(), sample.end(), [](const TestSample& s) { return s.treatment; });
  if (n_treatment == 0 || n_treatment == static_cast<long>(sample.size())) {
    throw std::invalid_argument("logrank_test: both arms must contain subjects");
  }
  std::stable_sort(sample.begin(), sample.end(), [](const TestSample& a, const TestSample& b) { return a.time < b.time; });

  double at_risk = static_cast<double>(sample.size());
  double at_risk_t = static_cast<double>(n_treatment);
  double o_minus_e = 0.0;
  double variance = 0.0;
  for (std::size_t i = 0; i < sample.size();) {
    const Days t = sample[i].time;
    double d = 0.0, d_t = 0.0, leaving = 0.0, leaving_t = 0.0;
    for (; i < sample.size() && sample[i].time == t; ++i) {
      leaving += 1.0;
      if (sample[i].treatment) leaving_t += 1.0;
      if (sample[i].event) {
        d += 1.0;
        if (sample[i].treatment) d_t += 1.0;
      }
    }
    if (d > 0.0) {
      const double share = at_risk_t / at_risk;
      o_minus_e += d_t - d * share;
      if (at_risk > 1.0) variance += d * share * (1.0 - share) * (at_risk - d) / (at_risk - 1.0);
    }
    at_risk -= leaving;
    at_risk_t -= leaving_t;
  }

  TwoSampleTestResult out;
  out.observed_minus_expected = o_minus_e;
  out.variance = variance;
  if (variance > 0.0) {
    out.statistic = o_minus_e / std::sqrt(variance);
    out.p_value = chi_square1_upper_tail(out.statistic * out.statistic);
  }
  return out;
}

}  // namespace

StepFunction kaplan_meier(std::span<const EventRecord> data, const EventPredicate& is_event) {
  require_nonempty(data, "kaplan_meier");
  return product_limit(group_by_time(data, observed_time, is_event), false);
}

StepFunction kaplan_meier(std::span<const EventRecord> data) {
  return kaplan_meier(data, [](const EventRecord& r) { return r.is_event(); });
}

StepFunction aalen_johansen(std::span<const EventRecord> data, Cause cause) {
  require_nonempty(data, "aalen_johansen");
  const auto groups = group_by_time(data, observed_time, [](const EventRecord& r) { return r.is_event(); });

  std::vector<Days> times;
  std::vector<double> values;
  double surv_before = 1.0;  // P(T >= u)
  double incidence = 0.0;
  for (const auto& g : groups) {
    const long d_cause = cause == Cause::favourable ? g.cause1 : g.cause2;
    const double y = static_cast<double>(g.at_risk);
    if (d_cause > 0) {
      incidence += surv_before * static_cast<double>(d_cause) / y;
      times.push_back(g.time);
      values.push_back(std::min(incidence, 1.0));
    }
    if (g.events > 0) surv_before *= 1.0 - static_cast<double>(g.events) / y;
  }
  return StepFunction(0.0, std::move(times), std::move(values));
}

bool is_censoring_complete(std::span<const EventRecord> data, Days tau) {
  return std::none_of(data.begin(), data.end(),
                      [tau](const EventRecord& r) { return r.status == Status::censored && r.time < tau; });
}

StepFunction subdistribution_km(std::span<const EventRecord> data, Days tau) {
  require_nonempty(data, "subdistribution_km");
  if (!(tau > 0.0)) throw std::invalid_argument("subdistribution_km: tau must be positive");
  if (!is_censoring_complete(data, tau)) {
    throw IncompleteFollowUpError(
        "subdistribution_km requires censoring-complete follow-up on [0, tau): found a record censored before tau; "
        "use aalen_johansen instead");
  }
  auto time_of = [tau](const EventRecord& r) { return to_censored_subdistribution_time(r, tau); };
  auto is_event = [tau](const EventRecord& r) { return r.status == Status::favourable && r.time <= tau; };
  return product_limit(group_by_time(data, time_of, is_event), true);
}

StepFunction naive_km_biased(std::span<const EventRecord> data, Cause cause) {
  require_nonempty(data, "naive_km_biased");
  const int code = static_cast<int>(cause);
  return product_limit(group_by_time(data, observed_time, [code](const EventRecord& r) { return r.is_cause(code); }),
                       true);
}

TwoSampleTestResult logrank_test(std::span<const EventRecord> data, EventSpecific mode) {
  const int code = static_cast<int>(mode.cause);
  std::vector<TestSample> sample;
  sample.reserve(data.size());
  for (const auto& r : data) sample.push_back({r.time, r.is_cause(code), r.arm == Arm::treatment});
  return logrank_core(std::move(sample));
}

TwoSampleTestResult logrank_test(std::span<const EventRecord> data, Subdistribution mode) {
  if (!is_censoring_complete(data, mode.tau)) {
    throw IncompleteFollowUpError(
        "Gray's test via censored subdistribution times requires censoring-complete follow-up on [0, tau)");
  }
  std::vector<TestSample> sample;
  sample.reserve(data.size());
  for (const auto& r : data) {
    sample.push_back({to_censored_subdistribution_time(r, mode.tau),
                      r.status == Status::favourable && r.time <= mode.tau, r.arm == Arm::treatment});
  }
  return logrank_core(std::move(sample));
}

ExtendedTime empirical_median(const StepFunction& incidence_curve) {
  // Sums of event fractions can land a few ulps below an exact one half.
  constexpr double threshold = 0.5 - 1e-12;
  if (incidence_curve.value_at_zero() >= threshold) return ExtendedTime::finite(0.0);
  const auto& times = incidence_curve.jump_times();
  const auto& values = incidence_curve.values();
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (values[i] >= threshold) return ExtendedTime::finite(times[i]);
  }
  return ExtendedTime::infinite();
}

Days empirical_restricted_mean_lost(const StepFunction& incidence_curve, Days tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("restricted mean: tau must be positive");
  return tau - incidence_curve.integral(tau);
}

}  // namespace crtrial
