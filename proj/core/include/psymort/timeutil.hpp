#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace psymort {

/// Naive wall-clock timestamp, seconds since 1970-01-01 00:00:00 in the
/// proleptic Gregorian calendar. No timezone: source tables carry
/// date-shifted local clock values and are treated as such.
struct Timestamp {
    std::int64_t seconds = 0;

    auto operator<=>(const Timestamp&) const = default;
};

inline constexpr std::int64_t kSecondsPerDay = 86'400;

constexpr Timestamp operator+(Timestamp t, std::int64_t delta_seconds) {
    return Timestamp{t.seconds + delta_seconds};
}

constexpr std::int64_t operator-(Timestamp a, Timestamp b) {
    return a.seconds - b.seconds;
}

/// Parses "YYYY-MM-DD HH:MM:SS". Returns nullopt for anything else,
/// including out-of-range calendar fields.
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// Inverse of parse_timestamp, always "YYYY-MM-DD HH:MM:SS".
std::string format_timestamp(Timestamp t);

}  // namespace psymort
