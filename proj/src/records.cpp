#include "crtrial/records.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace crtrial {

std::string ExtendedTime::to_string() const {
  if (infinite_) return "inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value_);
  return std::string(buf, end);
}

ExtendedTime ExtendedTime::parse(const std::string& text) {
  if (text == "inf" || text == "Inf" || text == "INF") return infinite();
  double value = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw std::invalid_argument("not a duration: '" + text + "'");
  }
  return finite(value);
}

std::string_view arm_label(Arm arm) { return arm == Arm::treatment ? "T" : "C"; }

Arm parse_arm(std::string_view label) {
  if (label == "T") return Arm::treatment;
  if (label == "C") return Arm::control;
  throw std::invalid_argument("unknown arm label '" + std::string(label) + "' (expected T or C)");
}

Status status_from_int(int code) {
  if (code < 0 || code > 2) {
    throw std::invalid_argument("status must be 0, 1 or 2, got " + std::to_string(code));
  }
  return static_cast<Status>(code);
}

void validate_record(const EventRecord& record) {
  if (!std::isfinite(record.time) || !(record.time > 0.0)) {
    throw std::invalid_argument("record '" + record.id + "': time must be a positive finite number");
  }
}

}  // namespace crtrial
