#include <doctest.h>

#include <cmath>

#include "crtrial/core_model.hpp"
#include "crtrial/dataset_io.hpp"
#include "crtrial/estimators.hpp"
#include "test_support.hpp"

using namespace crtrial;

namespace {

Dataset fixture() { return read_dataset_csv_file(CRTRIAL_TEST_DATA "/fixture.csv"); }

Dataset only(const Dataset& d, Arm arm) {
  Dataset out;
  for (const auto& r : d)
    if (r.arm == arm) out.push_back(r);
  return out;
}

// Same subjects as the fixture, but everyone alive and event-free is followed to 28.
Dataset complete_fixture() {
  auto d = fixture();
  for (auto& r : d)
    if (r.status == Status::censored) r.time = 28;
  return d;
}

}  // namespace

// Expected values from an exact rational-arithmetic implementation.
TEST_CASE("pooled curves on the hand fixture") {
  const auto d = fixture();
  const auto km = kaplan_meier(d);
  const auto f1 = aalen_johansen(d, Cause::favourable);
  const auto f2 = aalen_johansen(d, Cause::competing);
  const auto naive = naive_km_biased(d, Cause::favourable);

  struct Row {
    double t, s, f1, f2, naive;
  };
  const Row rows[] = {
      {1, 11.0 / 12, 0, 1.0 / 12, 0},
      {2, 10.0 / 12, 1.0 / 12, 1.0 / 12, 1.0 / 11},
      {3, 8.0 / 12, 2.0 / 12, 2.0 / 12, 2.0 / 11},
      {4, 0.58333333333333337, 0.25, 2.0 / 12, 0.28409090909090912},
      {6, 0.46666666666666667, 0.36666666666666664, 2.0 / 12, 0.42727272727272725},
      {7, 0.34999999999999998, 0.48333333333333334, 2.0 / 12, 0.57045454545454544},
      {9, 0.23333333333333334, 0.48333333333333334, 0.28333333333333333, 0.57045454545454544},
  };
  for (const auto& r : rows) {
    CAPTURE(r.t);
    CHECK(km(r.t) == doctest::Approx(r.s).epsilon(1e-14));
    CHECK(f1(r.t) == doctest::Approx(r.f1).epsilon(1e-14));
    CHECK(f2(r.t) == doctest::Approx(r.f2).epsilon(1e-14));
    CHECK(naive(r.t) == doctest::Approx(r.naive).epsilon(1e-14));
    // just before the jump
    CHECK(km(r.t - 0.5) >= km(r.t));
  }
  CHECK(km(0) == 1.0);
  CHECK(km(0.999) == 1.0);
  CHECK(f1(28) == doctest::Approx(0.48333333333333334));
  CHECK_FALSE(is_censoring_complete(d, 28));
}

TEST_CASE("per-arm curves on the hand fixture") {
  const auto d = fixture();
  const auto t = only(d, Arm::treatment);
  const auto c = only(d, Arm::control);
  CHECK(aalen_johansen(t, Cause::favourable)(28) == doctest::Approx(0.58333333333333337).epsilon(1e-14));
  CHECK(kaplan_meier(t)(7) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(aalen_johansen(c, Cause::favourable)(28) == doctest::Approx(0.3888888888888889).epsilon(1e-14));
  CHECK(aalen_johansen(c, Cause::competing)(28) == doctest::Approx(0.3888888888888889).epsilon(1e-14));
  CHECK(naive_km_biased(c, Cause::favourable)(28) == doctest::Approx(0.46666666666666667).epsilon(1e-14));
}

// Statistic and p-value from scipy.stats.logrank.
TEST_CASE("logrank tests against scipy") {
  const auto d = fixture();
  const auto r1 = logrank_test(d, EventSpecific{Cause::favourable});
  CHECK(std::abs(r1.statistic) == doctest::Approx(0.61465020050240049).epsilon(1e-12));
  CHECK(r1.p_value == doctest::Approx(0.53878575417913233).epsilon(1e-12));
  const auto r2 = logrank_test(d, EventSpecific{Cause::competing});
  CHECK(std::abs(r2.statistic) == doctest::Approx(0.39223227027636798).epsilon(1e-12));
  CHECK(r2.p_value == doctest::Approx(0.69488660237247346).epsilon(1e-12));
  // treatment has more favourable events than expected, fewer competing ones
  CHECK(r1.statistic > 0);
  CHECK(r2.statistic < 0);

  CHECK_THROWS_AS(logrank_test(d, Subdistribution{28}), IncompleteFollowUpError);
  const auto g = logrank_test(complete_fixture(), Subdistribution{28});
  CHECK(g.statistic == doctest::Approx(0.63083766953005105).epsilon(1e-12));
  CHECK(g.p_value == doctest::Approx(0.52814667022973638).epsilon(1e-12));
}

TEST_CASE("logrank needs both arms") {
  const auto d = only(fixture(), Arm::treatment);
  CHECK_THROWS(logrank_test(d, EventSpecific{Cause::favourable}));
}

TEST_CASE("subdistribution KM equals Aalen-Johansen on complete data") {
  const auto d = complete_fixture();
  REQUIRE(is_censoring_complete(d, 28));
  const auto sd = subdistribution_km(d, 28);
  const auto aj = aalen_johansen(d, Cause::favourable);
  for (double t = 0; t <= 30; t += 0.25) CHECK(sd(t) == doctest::Approx(aj(t)).epsilon(1e-13));
  CHECK_THROWS_AS(subdistribution_km(fixture(), 28), IncompleteFollowUpError);
}

TEST_CASE("empty input is rejected") {
  const Dataset empty;
  CHECK_THROWS_AS(kaplan_meier(empty), std::invalid_argument);
  CHECK_THROWS_AS(aalen_johansen(empty, Cause::favourable), std::invalid_argument);
}

TEST_CASE("step function basics") {
  const StepFunction f(0.0, {1.0, 3.0}, {0.25, 0.75});
  CHECK(f(0.5) == 0.0);
  CHECK(f(1.0) == 0.25);
  CHECK(f(2.9) == 0.25);
  CHECK(f(3.0) == 0.75);
  CHECK(f.integral(4.0) == doctest::Approx(0.25 * 2 + 0.75 * 1));
  CHECK(f.integral(0.5) == 0.0);
  CHECK_THROWS(StepFunction(0.0, {3.0, 1.0}, {0.1, 0.2}));
  CHECK_THROWS(StepFunction(0.0, {1.0}, {1.5}));
  CHECK_THROWS(StepFunction(0.0, {1.0, 2.0}, {0.1}));
}

TEST_CASE("empirical median and restricted mean time lost") {
  const StepFunction f(0.0, {2.0, 5.0, 9.0}, {0.2, 0.5, 0.7});
  CHECK(empirical_median(f) == ExtendedTime::finite(5.0));
  CHECK(empirical_median(StepFunction(0.0, {2.0}, {0.4})).is_infinite());
  // 28 - [0.2*3 + 0.5*4 + 0.7*19]
  CHECK(empirical_restricted_mean_lost(f, 28) == doctest::Approx(28 - (0.6 + 2.0 + 13.3)));
  CHECK(restricted_mean_lost(f, 28) == doctest::Approx(28 - (0.6 + 2.0 + 13.3)));
  CHECK(median_subdistribution_time(f) == ExtendedTime::finite(5.0));
}

TEST_CASE("balance and ordering on random data") {
  Philox4x64 g(99, 0);
  for (int rep = 0; rep < 200; ++rep) {
    const auto d = testing::random_dataset(g, 1 + static_cast<long>(g.below(120)), 28, rep % 2 == 0);
    const auto km = kaplan_meier(d);
    const auto f1 = aalen_johansen(d, Cause::favourable);
    const auto f2 = aalen_johansen(d, Cause::competing);
    const auto naive = naive_km_biased(d, Cause::favourable);
    for (double t = 0; t <= 29; t += 0.5) {
      CHECK(km(t) + f1(t) + f2(t) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(naive(t) >= f1(t) - 1e-12);
    }
  }
}
