#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crtrial/core_model.hpp"
#include "crtrial/design.hpp"
#include "crtrial/records.hpp"
#include "crtrial/rng.hpp"

namespace crtrial {

enum class Analysis { event_specific_logrank, gray_subdistribution, binary_proportion };
enum class Allocation { permuted_block, bernoulli };

std::string_view analysis_name(Analysis analysis);
Analysis parse_analysis(std::string_view name);
std::string_view allocation_name(Allocation allocation);
Allocation parse_allocation(std::string_view name);

// Independent censoring C ~ Uniform(0, window) before tau; nullopt means none.
struct CensoringModel {
  std::optional<Days> uniform_window;
};

struct TrialOptions {
  Allocation allocation = Allocation::permuted_block;
  CensoringModel censoring;
};

// Subjects are drawn in order: arm sequence first, then per subject the
// latent time, the cause and (if configured) a censoring time. Latent times
// beyond tau become status 0 at tau.
Dataset generate_trial(const ScenarioSpec& scenario, long n_total, Philox4x64& rng, const TrialOptions& options = {},
                       long first_id = 1);

// Arm sequence of length n with round(p * n) treatment slots, in permuted
// blocks of size 2 * allocation_denominator(p).
std::vector<Arm> permuted_block_sequence(long n, double allocation_p, Philox4x64& rng);

struct SimulationConfig {
  ScenarioSpec scenario;
  long n_total = 0;
  long replicates = 1000;
  std::uint64_t seed = 0;
  Analysis analysis = Analysis::event_specific_logrank;
  TrialOptions trial;
  double alpha = 0.05;  // two-sided test level
  unsigned threads = 0;  // 0: hardware concurrency; never affects results
};

void validate(const SimulationConfig& config);

enum class Recalculation { once, none };
std::string_view recalculation_name(Recalculation r);
Recalculation parse_recalculation(std::string_view name);

struct SsrConfig {
  SimulationConfig base;  // base.n_total is the initially planned N
  double pilot_fraction = 0.5;
  Recalculation recalculation = Recalculation::once;
  long n_max_cap = 0;
  // Effect kept fixed at recalculation: hazard ratio for the logrank
  // analyses, odds ratio for binary_proportion.
  double planning_theta = 1.0;
  DesignParams design;
};

void validate(const SsrConfig& config);
long pilot_size(const SsrConfig& config);

struct Summary {
  double mean = 0.0;
  double sd = 0.0;
  long count = 0;  // replicates with a finite value
};

struct FinalNSummary {
  double mean = 0.0;
  long min = 0;
  long q25 = 0;
  long median = 0;
  long q75 = 0;
  long max = 0;
  long fallback_count = 0;  // replicates without pilot events, kept at planned N
};

struct OperatingCharacteristics {
  long replicates = 0;
  double rejection_rate = 0.0;
  double mcse = 0.0;  // sqrt(rate (1 - rate) / replicates)
  std::map<std::string, Summary> estimates;
  std::optional<FinalNSummary> final_n;  // SSR runs only
};

struct ReplicateOutcome {
  long replicate = 0;
  long n_pilot = 0;
  long n_final = 0;
  double psi_hat = 0.0;  // pooled pilot estimate (SSR), NaN otherwise
  bool fallback = false;
  double statistic = 0.0;
  double p_value = 1.0;
  bool rejected = false;
  double log_theta_es_hat = 0.0;
  double log_theta_sd_hat = 0.0;
  double f1_tau_treatment = 0.0;
  double f1_tau_control = 0.0;
  double f2_tau_treatment = 0.0;
  double f2_tau_control = 0.0;
};

struct TestOutcome {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Applies the configured two-sided test to one dataset.
TestOutcome analyze(const Dataset& data, Analysis analysis, Days tau);

// Two-proportion z-test on favourable events by tau (pooled variance).
TestOutcome two_proportion_test(const Dataset& data, Days tau);

// Constant-hazard MLE of the treatment/control hazard ratio: events over
// person-time per arm. Event-specific counts favourable events on the
// observed times; subdistribution uses censored subdistribution times.
// Returns +-infinity or NaN when an arm has no events.
double log_hazard_ratio_mle(const Dataset& data, Days tau, bool subdistribution);

OperatingCharacteristics operating_characteristics(const SimulationConfig& config,
                                                   std::vector<ReplicateOutcome>* per_replicate = nullptr);

// Internal pilot with blinded re-estimation of psi from the pooled
// Aalen-Johansen estimate at tau, then one recalculation of N.
OperatingCharacteristics blinded_ssr(const SsrConfig& config, std::vector<ReplicateOutcome>* per_replicate = nullptr);

// Recalculated total N for a pooled favourable-event probability psi_hat;
// capped at n_max_cap and floored at the pilot size.
long recalculated_n(const SsrConfig& config, double psi_hat);

}  // namespace crtrial
