#pragma once

#include <string>

#include "crtrial/records.hpp"
#include "crtrial/rng.hpp"

namespace crtrial::testing {

// Random dataset with tied integer-valued times, both arms and all three
// statuses. complete=true censors only at tau.
inline Dataset random_dataset(Philox4x64& g, long n, double tau, bool complete, bool allow_censoring = true) {
  Dataset data;
  data.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    EventRecord r;
    r.id = std::to_string(i + 1);
    r.arm = g.below(2) == 0 ? Arm::treatment : Arm::control;
    const double t = 1.0 + static_cast<double>(g.below(static_cast<std::uint64_t>(tau)));
    const auto kind = g.below(10);
    if (kind < 5) {
      r.time = t;
      r.status = Status::favourable;
    } else if (kind < 7) {
      r.time = t;
      r.status = Status::competing;
    } else if (!complete && allow_censoring && kind < 9) {
      r.time = t;
      r.status = Status::censored;
    } else {
      r.time = tau;
      r.status = Status::censored;
    }
    data.push_back(r);
  }
  return data;
}

}  // namespace crtrial::testing
