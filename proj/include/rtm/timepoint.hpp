#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <string>

namespace rtm {

/// Durations and interval bounds, in seconds.
using Seconds = std::int64_t;

/// A point on the model's time axis (seconds). INFINITY is the largest
/// representable value and marks elements that have not been deleted.
struct Timepoint {
  std::int64_t value = 0;

  static constexpr Timepoint infinity() noexcept {
    return Timepoint{std::numeric_limits<std::int64_t>::max()};
  }

  constexpr bool is_infinite() const noexcept { return *this == infinity(); }

  auto operator<=>(const Timepoint&) const = default;
};

inline constexpr Timepoint kInfinity = Timepoint::infinity();

/// Half-open lifespan test: an element exists at `at` iff cts <= at < dts.
constexpr bool exists_at(Timepoint cts, Timepoint dts, Timepoint at) noexcept {
  return cts <= at && at < dts;
}

inline std::string to_string(Timepoint t) {
  return t.is_infinite() ? std::string("inf") : std::to_string(t.value);
}

}  // namespace rtm
