#ifndef DPCA_CIVIL_TIME_HPP
#define DPCA_CIVIL_TIME_HPP

#include <string>
#include <string_view>

namespace dpca {

struct CivilDate {
    int year = 1970;
    int month = 1; // 1..12
    int day = 1;   // 1..31

    friend bool operator==(const CivilDate&, const CivilDate&) = default;
};

// Days since 1970-01-01 in the proleptic Gregorian calendar.
long days_from_civil(const CivilDate& d);
CivilDate civil_from_days(long z);
CivilDate add_days(const CivilDate& d, long n);

std::string format_date(const CivilDate& d); // YYYY-MM-DD

// A wall-clock instant from a fixed-offset ISO-8601 timestamp. `hour` counts
// whole hours of the wall clock since 1970-01-01T00:00 (the offset is recorded
// but not applied; the pipeline works in one fixed offset throughout).
struct WallClockHour {
    long hour = 0;
    int offset_minutes = 0;
};

// Strict parser for YYYY-MM-DDTHH:MM:SS(+|-)HH:MM or ...Z. Minutes and
// seconds must be zero (the data is hourly). Throws DataError otherwise.
WallClockHour parse_timestamp(std::string_view s);

std::string format_timestamp(long wall_hour, int offset_minutes);

} // namespace dpca

#endif
