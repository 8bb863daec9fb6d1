#include "psymort/timeutil.hpp"

#include <cstdio>

namespace psymort {

namespace {

// Days from 1970-01-01 in the proleptic Gregorian calendar
// (Howard Hinnant's days_from_civil).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

bool is_leap(std::int64_t y) {
    return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0);
}

unsigned days_in_month(std::int64_t y, unsigned m) {
    static constexpr unsigned kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return kDays[m - 1];
}

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (const char c : s) {
        if (c < '0' || c > '9') return false;
    }
    return true;
}

std::int64_t to_int(std::string_view s) {
    std::int64_t v = 0;
    for (const char c : s) v = v * 10 + (c - '0');
    return v;
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text) {
    // YYYY-MM-DD HH:MM:SS, fixed widths
    if (text.size() != 19) return std::nullopt;
    if (text[4] != '-' || text[7] != '-' || text[10] != ' ' || text[13] != ':' ||
        text[16] != ':') {
        return std::nullopt;
    }
    const auto year = text.substr(0, 4);
    const auto month = text.substr(5, 2);
    const auto day = text.substr(8, 2);
    const auto hour = text.substr(11, 2);
    const auto minute = text.substr(14, 2);
    const auto second = text.substr(17, 2);
    if (!all_digits(year) || !all_digits(month) || !all_digits(day) || !all_digits(hour) ||
        !all_digits(minute) || !all_digits(second)) {
        return std::nullopt;
    }
    const std::int64_t y = to_int(year);
    const std::int64_t mo = to_int(month);
    const std::int64_t d = to_int(day);
    const std::int64_t h = to_int(hour);
    const std::int64_t mi = to_int(minute);
    const std::int64_t s = to_int(second);
    if (mo < 1 || mo > 12) return std::nullopt;
    if (d < 1 || d > days_in_month(y, static_cast<unsigned>(mo))) return std::nullopt;
    if (h > 23 || mi > 59 || s > 59) return std::nullopt;
    const std::int64_t days = days_from_civil(y, static_cast<unsigned>(mo),
                                              static_cast<unsigned>(d));
    return Timestamp{days * kSecondsPerDay + h * 3600 + mi * 60 + s};
}

std::string format_timestamp(Timestamp t) {
    std::int64_t days = t.seconds / kSecondsPerDay;
    std::int64_t rem = t.seconds % kSecondsPerDay;
    if (rem < 0) {
        rem += kSecondsPerDay;
        days -= 1;
    }
    std::int64_t y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02u %02lld:%02lld:%02lld",
                  static_cast<long long>(y), m, d, static_cast<long long>(rem / 3600),
                  static_cast<long long>((rem / 60) % 60), static_cast<long long>(rem % 60));
    return buf;
}

}  // namespace psymort
