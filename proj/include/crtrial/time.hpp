#pragma once

#include <compare>
#include <limits>
#include <stdexcept>
#include <string>

namespace crtrial {

// Time is measured in days throughout.
using Days = double;

inline constexpr Days kDefaultHorizon = 28.0;

// A duration that may also take the distinguished value "infinite", e.g. the
// subdistribution time of a subject whose first event was competing, or a
// median that is never reached.
class ExtendedTime {
 public:
  constexpr ExtendedTime() = default;

  static ExtendedTime finite(Days value) {
    if (!(value >= 0.0) || value == std::numeric_limits<Days>::infinity()) {
      throw std::invalid_argument("ExtendedTime::finite: value must be a finite nonnegative number");
    }
    ExtendedTime t;
    t.value_ = value;
    return t;
  }

  static constexpr ExtendedTime infinite() {
    ExtendedTime t;
    t.infinite_ = true;
    return t;
  }

  constexpr bool is_finite() const { return !infinite_; }
  constexpr bool is_infinite() const { return infinite_; }

  Days value() const {
    if (infinite_) throw std::logic_error("ExtendedTime::value called on INFINITE");
    return value_;
  }

  // "inf" for the infinite value, shortest round-trip decimal otherwise.
  std::string to_string() const;
  static ExtendedTime parse(const std::string& text);

  friend constexpr bool operator==(const ExtendedTime& a, const ExtendedTime& b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }
  friend constexpr std::partial_ordering operator<=>(const ExtendedTime& a, const ExtendedTime& b) {
    if (a.infinite_ || b.infinite_) {
      return static_cast<int>(a.infinite_) <=> static_cast<int>(b.infinite_);
    }
    return a.value_ <=> b.value_;
  }

 private:
  Days value_ = 0.0;
  bool infinite_ = false;
};

}  // namespace crtrial
