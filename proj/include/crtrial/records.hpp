#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "crtrial/time.hpp"

namespace crtrial {

enum class Arm { treatment, control };

// Type of first event; censored means no event observed up to `time`.
enum class Status : int { censored = 0, favourable = 1, competing = 2 };

std::string_view arm_label(Arm arm);  // "T" / "C"
Arm parse_arm(std::string_view label);
Status status_from_int(int code);

// One subject: waiting time in the initial state and the type of the state
// entered on leaving it.
struct EventRecord {
  std::string id;
  Arm arm = Arm::treatment;
  Days time = 0.0;
  Status status = Status::censored;

  bool is_event() const { return status != Status::censored; }
  bool is_cause(int cause) const { return static_cast<int>(status) == cause; }
};

using Dataset = std::vector<EventRecord>;

// Throws std::invalid_argument when time <= 0 (or not finite).
void validate_record(const EventRecord& record);

}  // namespace crtrial
