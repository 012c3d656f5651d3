#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "crtrial/design.hpp"
#include "crtrial/estimators.hpp"
#include "crtrial/simulate.hpp"

namespace crtrial {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// Finite values as numbers, INFINITE as the string "inf".
Json to_json(const ExtendedTime& t);
Json to_json(const StepFunction& curve);
Json to_json(const ArmHazards& arm);
Json to_json(const ScenarioSpec& spec);
Json to_json(const EffectMeasures& m);
Json to_json(const SampleSizePlan& plan);
Json to_json(const DesignParams& params);
Json to_json(const TwoSampleTestResult& r);
Json to_json(const OperatingCharacteristics& oc);

// ---- scenario tables -------------------------------------------------------

Json table_to_json(const ScenarioTable& table);
// Probabilities 4 decimals, ratios 2 decimals; columns follow the layout.
std::string render_table_text(const ScenarioTable& table);
std::string render_table_csv(const ScenarioTable& table);

// CSV rows for a custom table. Header `alpha01t,alpha01c,alpha02t,alpha02c`
// (hazards) or `f1t,f1c,f2t,f2c` (probabilities at tau). Throws ParseError,
// also for a file without data rows.
std::vector<ScenarioRowInput> read_scenario_rows_csv(std::istream& in, const std::string& source);

// ---- dataset estimation ----------------------------------------------------

struct EstimateOptions {
  Days tau = kDefaultHorizon;
  bool by_arm = true;
  // Fail (IncompleteFollowUpError) instead of skipping the subdistribution
  // curve when follow-up is incomplete.
  bool require_subdistribution_km = false;
};

struct EstimateReport {
  Json json;
  std::vector<std::string> notices;
  // (group, curve name, curve) for CSV export.
  struct NamedCurve {
    std::string group;
    std::string name;
    StepFunction curve;
  };
  std::vector<NamedCurve> curves;
};

EstimateReport estimate_report(const Dataset& data, const EstimateOptions& options);
void write_curves_csv(std::ostream& out, const std::vector<EstimateReport::NamedCurve>& curves);

// ---- simulation configs ------------------------------------------------------

// Unknown keys and type mismatches raise std::invalid_argument naming the key.
SimulationConfig simulation_config_from_json(const Json& j);
SsrConfig ssr_config_from_json(const Json& j);
// `threads` is deliberately omitted: results never depend on it.
Json to_json(const SimulationConfig& config);
Json to_json(const SsrConfig& config);

void write_replicates_csv(std::ostream& out, const std::vector<ReplicateOutcome>& reps);

}  // namespace crtrial
