#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <thread>

#include "crtrial/core_model.hpp"
#include "crtrial/report.hpp"
#include "crtrial/simulate.hpp"

using namespace crtrial;

namespace {

ScenarioSpec row1() {
  return ScenarioSpec{hazards_from_probabilities(0.7, 0.1, 28), hazards_from_probabilities(0.55, 0.1, 28), 28, 0.5};
}

}  // namespace

TEST_CASE("permuted blocks give exact arm sizes") {
  Philox4x64 g(1, 0);
  for (long n : {2L, 7L, 100L, 238L}) {
    const auto seq = permuted_block_sequence(n, 0.5, g);
    REQUIRE(seq.size() == static_cast<std::size_t>(n));
    const long t = std::count(seq.begin(), seq.end(), Arm::treatment);
    CHECK(t == std::lround(0.5 * n));
  }
  const auto seq = permuted_block_sequence(300, 2.0 / 3.0, g);
  CHECK(std::count(seq.begin(), seq.end(), Arm::treatment) == 200);
  // every complete block of 6 is balanced 4:2
  for (std::size_t b = 0; b + 6 <= seq.size(); b += 6) {
    CHECK(std::count(seq.begin() + static_cast<long>(b), seq.begin() + static_cast<long>(b) + 6, Arm::treatment) == 4);
  }
}

TEST_CASE("generated trials follow the data contract") {
  Philox4x64 g(5, 3);
  const auto d = generate_trial(row1(), 500, g);
  CHECK(d.size() == 500);
  for (const auto& r : d) {
    REQUIRE(r.time > 0);
    REQUIRE(r.time <= 28);
    if (r.status == Status::censored) CHECK(r.time == 28);
  }
  TrialOptions opt;
  opt.censoring.uniform_window = 20;
  Philox4x64 h(5, 3);
  const auto dc = generate_trial(row1(), 500, h, opt);
  CHECK(std::any_of(dc.begin(), dc.end(), [](const EventRecord& r) { return r.status == Status::censored && r.time < 28; }));
}

TEST_CASE("same seed, same result regardless of threads") {
  SimulationConfig c;
  c.scenario = row1();
  c.n_total = 120;
  c.replicates = 300;
  c.seed = 77;
  for (auto a : {Analysis::event_specific_logrank, Analysis::gray_subdistribution, Analysis::binary_proportion}) {
    c.analysis = a;
    c.threads = 1;
    const auto one = to_json(operating_characteristics(c)).dump();
    c.threads = 4;
    const auto four = to_json(operating_characteristics(c)).dump();
    CHECK(one == four);
  }
  c.seed = 78;
  c.threads = 1;
  c.analysis = Analysis::event_specific_logrank;
  const auto other = operating_characteristics(c);
  c.seed = 77;
  CHECK(to_json(other).dump() != to_json(operating_characteristics(c)).dump());
}

TEST_CASE("configuration checks") {
  SimulationConfig c;
  c.scenario = row1();
  c.n_total = 100;
  c.seed = 1;
  c.analysis = Analysis::gray_subdistribution;
  c.trial.censoring.uniform_window = 10;
  CHECK_THROWS(validate(c));
  c.analysis = Analysis::event_specific_logrank;
  CHECK_NOTHROW(validate(c));
  c.n_total = 1;
  CHECK_THROWS(validate(c));
}

TEST_CASE("sample size recalculation rule") {
  SsrConfig s;
  s.base.scenario = row1();
  s.base.n_total = 238;
  s.base.seed = 1;
  s.n_max_cap = 476;
  s.planning_theta = 1.5853;
  CHECK(pilot_size(s) == 120);
  const long events = round_events(schoenfeld_events(1.5853, s.design), EventRounding::up);
  CHECK(recalculated_n(s, 0.625) == round_up_to_multiple(events / 0.625, 2));
  CHECK(recalculated_n(s, 0.475) == round_up_to_multiple(events / 0.475, 2));
  CHECK(recalculated_n(s, 0.05) == 476);   // capped
  CHECK(recalculated_n(s, 1.0) == 148);    // never below the pilot: 148 > 120
  s.base.analysis = Analysis::binary_proportion;
  s.planning_theta = 1.909;
  const long n_bin = recalculated_n(s, 0.625);
  CHECK(n_bin >= 320);
  CHECK(n_bin <= 332);
  s.pilot_fraction = 0.0;
  CHECK_THROWS(validate(s));
}

TEST_CASE("blinded re-estimation run") {
  SsrConfig s;
  s.base.scenario = row1();
  s.base.n_total = 120;
  s.base.replicates = 200;
  s.base.seed = 11;
  s.n_max_cap = 240;
  s.planning_theta = 1.5853;
  std::vector<ReplicateOutcome> reps;
  const auto oc = blinded_ssr(s, &reps);
  REQUIRE(oc.final_n.has_value());
  CHECK(reps.size() == 200);
  for (const auto& r : reps) {
    CHECK(r.n_pilot == 60);
    CHECK(r.n_final >= 60);
    CHECK(r.n_final <= 240);
    CHECK(r.psi_hat > 0);
  }
  CHECK(oc.final_n->min <= oc.final_n->median);
  CHECK(oc.final_n->median <= oc.final_n->max);

  s.recalculation = Recalculation::none;
  const auto fixed = blinded_ssr(s);
  CHECK(fixed.final_n->min == 120);
  CHECK(fixed.final_n->max == 120);
}

TEST_CASE("constant-hazard estimates") {
  Philox4x64 g(2024, 0);
  const auto d = generate_trial(row1(), 20000, g);
  const auto m = effect_measures(row1());
  CHECK(std::abs(log_hazard_ratio_mle(d, 28, false) - std::log(m.theta_es)) < 0.06);
}

TEST_CASE("config JSON round trip") {
  const Json j = Json::parse(R"({
    "scenario": {"probabilities": {"f1t": 0.7, "f1c": 0.55, "f2t": 0.1, "f2c": 0.1}},
    "n_total": 238, "replicates": 50, "seed": 9, "analysis": "gray"
  })");
  const auto c = simulation_config_from_json(j);
  CHECK(c.analysis == Analysis::gray_subdistribution);
  CHECK(c.scenario.tau == 28);
  const auto again = simulation_config_from_json(to_json(c));
  CHECK(to_json(again).dump() == to_json(c).dump());

  Json bad = j;
  bad["n_totl"] = 3;
  CHECK_THROWS_AS(simulation_config_from_json(bad), std::invalid_argument);
  Json no_seed = j;
  no_seed.erase("seed");
  CHECK_THROWS(simulation_config_from_json(no_seed));
}
