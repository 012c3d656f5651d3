#include "crtrial/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "crtrial/estimators.hpp"
#include "crtrial/normal.hpp"

namespace crtrial {

std::string_view analysis_name(Analysis analysis) {
  switch (analysis) {
    case Analysis::event_specific_logrank:
      return "event_specific_logrank";
    case Analysis::gray_subdistribution:
      return "gray_subdistribution";
    case Analysis::binary_proportion:
      return "binary_proportion";
  }
  return "unknown";
}

Analysis parse_analysis(std::string_view name) {
  if (name == "event_specific_logrank" || name == "event_specific" || name == "logrank") return Analysis::event_specific_logrank;
  if (name == "gray_subdistribution" || name == "subdistribution" || name == "gray") return Analysis::gray_subdistribution;
  if (name == "binary_proportion" || name == "odds_ratio" || name == "binary") return Analysis::binary_proportion;
  throw std::invalid_argument("unknown analysis '" + std::string(name) + "'");
}

std::string_view allocation_name(Allocation allocation) {
  return allocation == Allocation::permuted_block ? "permuted_block" : "bernoulli";
}

Allocation parse_allocation(std::string_view name) {
  if (name == "permuted_block") return Allocation::permuted_block;
  if (name == "bernoulli") return Allocation::bernoulli;
  throw std::invalid_argument("unknown allocation '" + std::string(name) + "'");
}

std::string_view recalculation_name(Recalculation r) { return r == Recalculation::once ? "once" : "none"; }

Recalculation parse_recalculation(std::string_view name) {
  if (name == "once") return Recalculation::once;
  if (name == "none") return Recalculation::none;
  throw std::invalid_argument("unknown recalculation '" + std::string(name) + "'");
}

namespace {

template <typename T>
void shuffle(std::vector<T>& v, Philox4x64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

std::vector<Arm> permuted_block_sequence(long n, double allocation_p, Philox4x64& rng) {
  std::vector<Arm> out;
  out.reserve(static_cast<std::size_t>(std::max(0L, n)));
  const long d = allocation_denominator(allocation_p);
  const long n_treatment = std::lround(allocation_p * static_cast<double>(n));

  auto append_block = [&](long treat, long control) {
    std::vector<Arm> block(static_cast<std::size_t>(treat), Arm::treatment);
    block.insert(block.end(), static_cast<std::size_t>(control), Arm::control);
    shuffle(block, rng);
    out.insert(out.end(), block.begin(), block.end());
  };

  if (d == 1) {
    // No small rational allocation ratio: one block over the whole sample.
    append_block(n_treatment, n - n_treatment);
    return out;
  }
  const long block = 2 * d;
  const long treat_per_block = 2 * std::lround(allocation_p * static_cast<double>(d));
  long remaining_t = n_treatment;
  long remaining_c = n - n_treatment;
  while (remaining_t + remaining_c >= block) {
    append_block(treat_per_block, block - treat_per_block);
    remaining_t -= treat_per_block;
    remaining_c -= block - treat_per_block;
  }
  if (remaining_t + remaining_c > 0) append_block(remaining_t, remaining_c);
  return out;
}

Dataset generate_trial(const ScenarioSpec& scenario, long n_total, Philox4x64& rng, const TrialOptions& options,
                       long first_id) {
  validate(scenario);
  if (n_total < 0) throw std::invalid_argument("generate_trial: negative sample size");

  std::vector<Arm> arms;
  if (options.allocation == Allocation::permuted_block) {
    arms = permuted_block_sequence(n_total, scenario.allocation_p, rng);
  } else {
    arms.reserve(static_cast<std::size_t>(n_total));
    for (long i = 0; i < n_total; ++i) {
      arms.push_back(rng.uniform() < scenario.allocation_p ? Arm::treatment : Arm::control);
    }
  }

  Dataset data;
  data.reserve(arms.size());
  for (std::size_t i = 0; i < arms.size(); ++i) {
    const ArmHazards& h = scenario.arm(arms[i]);
    const double rate = h.all_events();
    EventRecord r;
    r.id = std::to_string(first_id + static_cast<long>(i));
    r.arm = arms[i];
    r.time = rng.exponential(rate);
    r.status = rng.uniform() < h.alpha01 / rate ? Status::favourable : Status::competing;
    if (r.time > scenario.tau) {
      r.time = scenario.tau;
      r.status = Status::censored;
    }
    if (options.censoring.uniform_window) {
      const double c = rng.uniform_open0() * *options.censoring.uniform_window;
      if (c < r.time) {
        r.time = c;
        r.status = Status::censored;
      }
    }
    data.push_back(std::move(r));
  }
  return data;
}

void validate(const SimulationConfig& config) {
  validate(config.scenario);
  if (config.n_total < 2) throw std::invalid_argument("n_total must be at least 2");
  if (config.replicates < 1) throw std::invalid_argument("replicates must be positive");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (const auto& w = config.trial.censoring.uniform_window) {
    if (!(*w > 0.0)) throw std::invalid_argument("censoring window must be positive");
    if (config.analysis != Analysis::event_specific_logrank) {
      throw std::invalid_argument(
          "censoring before tau is only supported with event_specific_logrank: the other analyses assume "
          "censoring-complete follow-up");
    }
  }
}

long pilot_size(const SsrConfig& config) {
  const long planned = config.base.n_total;
  const long multiple = allocation_denominator(config.base.scenario.allocation_p);
  const long pilot = round_up_to_multiple(config.pilot_fraction * static_cast<double>(planned), multiple);
  return std::min(pilot, planned);
}

void validate(const SsrConfig& config) {
  validate(config.base);
  validate(config.design);
  if (!(config.pilot_fraction > 0.0 && config.pilot_fraction < 1.0)) {
    throw std::invalid_argument("pilot_fraction must lie in (0, 1)");
  }
  const long pilot = pilot_size(config);
  const long pilot_t = std::lround(config.base.scenario.allocation_p * static_cast<double>(pilot));
  if (pilot_t < 2 || pilot - pilot_t < 2) throw std::invalid_argument("pilot must contain at least 2 subjects per arm");
  if (config.n_max_cap < config.base.n_total) throw std::invalid_argument("n_max_cap must be at least the planned N");
  if (!(config.planning_theta > 0.0) || std::fabs(std::log(config.planning_theta)) < 1e-12) {
    throw std::invalid_argument("planning_theta must be positive and different from 1");
  }
}

TestOutcome two_proportion_test(const Dataset& data, Days tau) {
  double n_t = 0, n_c = 0, x_t = 0, x_c = 0;
  for (const auto& r : data) {
    const bool event = r.status == Status::favourable && r.time <= tau;
    if (r.arm == Arm::treatment) {
      n_t += 1;
      x_t += event;
    } else {
      n_c += 1;
      x_c += event;
    }
  }
  if (n_t == 0 || n_c == 0) throw std::invalid_argument("two_proportion_test: both arms must contain subjects");
  const double pooled = (x_t + x_c) / (n_t + n_c);
  const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / n_t + 1.0 / n_c));
  TestOutcome out;
  if (se > 0.0) {
    out.statistic = (x_t / n_t - x_c / n_c) / se;
    out.p_value = chi_square1_upper_tail(out.statistic * out.statistic);
  }
  return out;
}

TestOutcome analyze(const Dataset& data, Analysis analysis, Days tau) {
  TwoSampleTestResult r;
  switch (analysis) {
    case Analysis::event_specific_logrank:
      r = logrank_test(data, EventSpecific{Cause::favourable});
      break;
    case Analysis::gray_subdistribution:
      r = logrank_test(data, Subdistribution{tau});
      break;
    case Analysis::binary_proportion:
      return two_proportion_test(data, tau);
  }
  return TestOutcome{r.statistic, r.p_value};
}

double log_hazard_ratio_mle(const Dataset& data, Days tau, bool subdistribution) {
  double events[2] = {0, 0};
  double exposure[2] = {0, 0};
  for (const auto& r : data) {
    const int k = r.arm == Arm::treatment ? 0 : 1;
    events[k] += r.status == Status::favourable && r.time <= tau;
    exposure[k] += subdistribution ? to_censored_subdistribution_time(r, tau) : std::min(r.time, tau);
  }
  return std::log(events[0] / exposure[0]) - std::log(events[1] / exposure[1]);
}

namespace {

// Runs body(i) for i in [0, count) on a worker pool. Results must be written
// to slot i only; the schedule never influences them.
template <typename Body>
void parallel_for(long count, unsigned threads, Body body) {
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<long>(workers, count));
  if (workers <= 1) {
    for (long i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (long i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

void fill_estimates(ReplicateOutcome& out, const Dataset& data, Days tau) {
  Dataset arm_t, arm_c;
  for (const auto& r : data) (r.arm == Arm::treatment ? arm_t : arm_c).push_back(r);
  out.log_theta_es_hat = log_hazard_ratio_mle(data, tau, false);
  out.log_theta_sd_hat = log_hazard_ratio_mle(data, tau, true);
  out.f1_tau_treatment = aalen_johansen(arm_t, Cause::favourable)(tau);
  out.f1_tau_control = aalen_johansen(arm_c, Cause::favourable)(tau);
  out.f2_tau_treatment = aalen_johansen(arm_t, Cause::competing)(tau);
  out.f2_tau_control = aalen_johansen(arm_c, Cause::competing)(tau);
}

void test_and_estimate(ReplicateOutcome& out, const Dataset& data, const SimulationConfig& config) {
  const auto test = analyze(data, config.analysis, config.scenario.tau);
  out.statistic = test.statistic;
  out.p_value = test.p_value;
  out.rejected = test.p_value < config.alpha;
  fill_estimates(out, data, config.scenario.tau);
}

Summary summarize(const std::vector<ReplicateOutcome>& reps, double ReplicateOutcome::*field) {
  Summary s;
  double sum = 0.0;
  for (const auto& r : reps) {
    if (std::isfinite(r.*field)) {
      sum += r.*field;
      ++s.count;
    }
  }
  if (s.count == 0) {
    s.mean = std::numeric_limits<double>::quiet_NaN();
    s.sd = s.mean;
    return s;
  }
  s.mean = sum / static_cast<double>(s.count);
  double ss = 0.0;
  for (const auto& r : reps) {
    if (std::isfinite(r.*field)) ss += (r.*field - s.mean) * (r.*field - s.mean);
  }
  s.sd = s.count > 1 ? std::sqrt(ss / static_cast<double>(s.count - 1)) : 0.0;
  return s;
}

OperatingCharacteristics aggregate(const std::vector<ReplicateOutcome>& reps) {
  OperatingCharacteristics oc;
  oc.replicates = static_cast<long>(reps.size());
  const auto rejected = std::count_if(reps.begin(), reps.end(), [](const ReplicateOutcome& r) { return r.rejected; });
  oc.rejection_rate = static_cast<double>(rejected) / static_cast<double>(oc.replicates);
  oc.mcse = std::sqrt(oc.rejection_rate * (1.0 - oc.rejection_rate) / static_cast<double>(oc.replicates));
  oc.estimates["log_theta_es"] = summarize(reps, &ReplicateOutcome::log_theta_es_hat);
  oc.estimates["log_theta_sd"] = summarize(reps, &ReplicateOutcome::log_theta_sd_hat);
  oc.estimates["f1_tau_treatment"] = summarize(reps, &ReplicateOutcome::f1_tau_treatment);
  oc.estimates["f1_tau_control"] = summarize(reps, &ReplicateOutcome::f1_tau_control);
  oc.estimates["f2_tau_treatment"] = summarize(reps, &ReplicateOutcome::f2_tau_treatment);
  oc.estimates["f2_tau_control"] = summarize(reps, &ReplicateOutcome::f2_tau_control);
  return oc;
}

// Blinded re-estimation for the binary analysis: the pooled event probability
// is split between arms keeping the planning odds ratio fixed.
std::pair<double, double> split_pooled_probability(double pooled, double odds_ratio, double allocation_p) {
  auto pooled_at = [&](double p_control) {
    const double odds_t = odds_ratio * p_control / (1.0 - p_control);
    return allocation_p * odds_t / (1.0 + odds_t) + (1.0 - allocation_p) * p_control;
  };
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (pooled_at(mid) < pooled ? lo : hi) = mid;
  }
  const double p_control = 0.5 * (lo + hi);
  const double odds_t = odds_ratio * p_control / (1.0 - p_control);
  return {odds_t / (1.0 + odds_t), p_control};
}

}  // namespace

long recalculated_n(const SsrConfig& config, double psi_hat) {
  if (!(psi_hat > 0.0 && psi_hat <= 1.0)) throw std::invalid_argument("psi_hat must lie in (0, 1]");
  const long multiple = allocation_denominator(config.design.allocation_p);
  long n = 0;
  if (config.base.analysis == Analysis::binary_proportion) {
    if (psi_hat >= 1.0) {
      n = config.n_max_cap;
    } else {
      const auto [p_t, p_c] = split_pooled_probability(psi_hat, config.planning_theta, config.design.allocation_p);
      n = round_up_to_multiple(binary_outcome_total_n(p_t, p_c, config.design), multiple);
    }
  } else {
    const long events = round_events(schoenfeld_events(config.planning_theta, config.design), config.design.event_rounding);
    n = round_up_to_multiple(static_cast<double>(events) / psi_hat, multiple);
  }
  return std::clamp(n, pilot_size(config), config.n_max_cap);
}

OperatingCharacteristics operating_characteristics(const SimulationConfig& config,
                                                   std::vector<ReplicateOutcome>* per_replicate) {
  validate(config);
  std::vector<ReplicateOutcome> reps(static_cast<std::size_t>(config.replicates));
  parallel_for(config.replicates, config.threads, [&](long i) {
    Philox4x64 rng(config.seed, static_cast<std::uint64_t>(i));
    const Dataset data = generate_trial(config.scenario, config.n_total, rng, config.trial);
    ReplicateOutcome& out = reps[static_cast<std::size_t>(i)];
    out.replicate = i;
    out.n_final = config.n_total;
    out.psi_hat = std::numeric_limits<double>::quiet_NaN();
    test_and_estimate(out, data, config);
  });
  auto oc = aggregate(reps);
  if (per_replicate) *per_replicate = std::move(reps);
  return oc;
}

OperatingCharacteristics blinded_ssr(const SsrConfig& config, std::vector<ReplicateOutcome>* per_replicate) {
  validate(config);
  const long planned = config.base.n_total;
  const long pilot = pilot_size(config);
  const bool adapt = config.recalculation == Recalculation::once && pilot < planned;

  std::vector<ReplicateOutcome> reps(static_cast<std::size_t>(config.base.replicates));
  parallel_for(config.base.replicates, config.base.threads, [&](long i) {
    Philox4x64 rng(config.base.seed, static_cast<std::uint64_t>(i));
    ReplicateOutcome& out = reps[static_cast<std::size_t>(i)];
    out.replicate = i;
    out.n_pilot = pilot;
    out.psi_hat = std::numeric_limits<double>::quiet_NaN();

    Dataset data = generate_trial(config.base.scenario, pilot, rng, config.base.trial);
    long n_final = planned;
    if (adapt) {
      // Pooled over arms: no unblinding.
      out.psi_hat = aalen_johansen(data, Cause::favourable)(config.base.scenario.tau);
      if (out.psi_hat > 0.0) {
        n_final = recalculated_n(config, out.psi_hat);
      } else {
        out.fallback = true;
      }
    }
    Dataset rest = generate_trial(config.base.scenario, n_final - pilot, rng, config.base.trial, pilot + 1);
    data.insert(data.end(), std::make_move_iterator(rest.begin()), std::make_move_iterator(rest.end()));
    out.n_final = n_final;
    test_and_estimate(out, data, config.base);
  });

  auto oc = aggregate(reps);
  oc.estimates["psi_hat"] = summarize(reps, &ReplicateOutcome::psi_hat);

  std::vector<long> final_n;
  final_n.reserve(reps.size());
  FinalNSummary fn;
  double total = 0.0;
  for (const auto& r : reps) {
    final_n.push_back(r.n_final);
    total += static_cast<double>(r.n_final);
    fn.fallback_count += r.fallback;
  }
  std::sort(final_n.begin(), final_n.end());
  auto quantile = [&](double q) {
    const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(final_n.size())));
    return final_n[std::min(final_n.size() - 1, k == 0 ? 0 : k - 1)];
  };
  fn.mean = total / static_cast<double>(final_n.size());
  fn.min = final_n.front();
  fn.q25 = quantile(0.25);
  fn.median = quantile(0.5);
  fn.q75 = quantile(0.75);
  fn.max = final_n.back();
  oc.final_n = fn;

  if (per_replicate) *per_replicate = std::move(reps);
  return oc;
}

}  // namespace crtrial
