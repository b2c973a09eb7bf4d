#include "dpca/civil_time.hpp"

#include <cstdio>
#include <cstdlib>

#include "dpca/error.hpp"

namespace dpca {

long days_from_civil(const CivilDate& d) {
    // Howard Hinnant's algorithm, days since 1970-01-01.
    long y = d.year;
    const int m = d.month;
    const int dd = d.day;
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + dd - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

CivilDate civil_from_days(long z) {
    z += 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long y = static_cast<long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

CivilDate add_days(const CivilDate& d, long n) {
    return civil_from_days(days_from_civil(d) + n);
}

std::string format_date(const CivilDate& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

namespace {

bool parse_fixed_int(std::string_view s, size_t pos, size_t len, int& out) {
    if (pos + len > s.size()) return false;
    int v = 0;
    for (size_t i = 0; i < len; ++i) {
        char c = s[pos + i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}

[[noreturn]] void bad_timestamp(std::string_view s) {
    throw DataError("unparseable timestamp '" + std::string(s) + "'");
}

} // namespace

WallClockHour parse_timestamp(std::string_view s) {
    // YYYY-MM-DDTHH:MM:SS followed by Z or (+|-)HH:MM
    int year, month, day, hour, minute, second;
    if (s.size() < 20 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') ||
        s[13] != ':' || s[16] != ':' ||
        !parse_fixed_int(s, 0, 4, year) || !parse_fixed_int(s, 5, 2, month) ||
        !parse_fixed_int(s, 8, 2, day) || !parse_fixed_int(s, 11, 2, hour) ||
        !parse_fixed_int(s, 14, 2, minute) || !parse_fixed_int(s, 17, 2, second)) {
        bad_timestamp(s);
    }
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23) bad_timestamp(s);
    if (minute != 0 || second != 0) {
        throw DataError("sub-hourly timestamp '" + std::string(s) + "' (data must be on the hour)");
    }

    int offset_minutes = 0;
    size_t p = 19;
    if (s[p] == 'Z') {
        if (s.size() != 20) bad_timestamp(s);
    } else if (s[p] == '+' || s[p] == '-') {
        int oh, om;
        if (s.size() != 25 || s[22] != ':' ||
            !parse_fixed_int(s, 20, 2, oh) || !parse_fixed_int(s, 23, 2, om)) {
            bad_timestamp(s);
        }
        offset_minutes = oh * 60 + om;
        if (s[p] == '-') offset_minutes = -offset_minutes;
    } else {
        bad_timestamp(s);
    }

    const long wall_hour = days_from_civil(CivilDate{year, month, day}) * 24 + hour;
    return WallClockHour{wall_hour, offset_minutes};
}

std::string format_timestamp(long wall_hour, int offset_minutes) {
    long day = wall_hour / 24;
    int hour = static_cast<int>(wall_hour % 24);
    if (hour < 0) {
        hour += 24;
        day -= 1;
    }
    const CivilDate d = civil_from_days(day);
    const char sign = offset_minutes < 0 ? '-' : '+';
    const int off = std::abs(offset_minutes);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:00:00%c%02d:%02d", d.year, d.month,
                  d.day, hour, sign, off / 60, off % 60);
    return buf;
}

} // namespace dpca
