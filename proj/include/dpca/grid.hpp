#ifndef DPCA_GRID_HPP
#define DPCA_GRID_HPP

#include <cmath>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dpca/civil_time.hpp"

namespace dpca {

// QC codes the data provider uses to mark invalid measurements; rows carrying
// one of these are treated as missing.
struct QcPolicy {
    std::set<std::string> invalid_codes;
};

// Site-level observations on an hour x day x site x pollutant lattice.
// Missing cells are NaN. Per (site, pollutant) the series is contiguous in
// memory, chronological (day-major, hour within day).
struct ObservationGrid {
    std::vector<std::string> sites;      // first-appearance order
    std::vector<std::string> pollutants; // configured order
    std::vector<std::string> units;      // per pollutant
    int days = 0;
    CivilDate start_date{};        // civil date of day 0
    int utc_offset_minutes = -360; // fixed offset the timestamps carry

    std::vector<double> values;

    int site_count() const { return static_cast<int>(sites.size()); }
    int pollutant_count() const { return static_cast<int>(pollutants.size()); }

    size_t cell_index(int hour, int day, int site, int pollutant) const {
        return ((static_cast<size_t>(site) * pollutants.size() + pollutant) * days + day) * 24 +
               hour;
    }
    double cell(int hour, int day, int site, int pollutant) const {
        return values[cell_index(hour, day, site, pollutant)];
    }
    void set_cell(int hour, int day, int site, int pollutant, double v) {
        values[cell_index(hour, day, site, pollutant)] = v;
    }
    bool present(int hour, int day, int site, int pollutant) const {
        return !std::isnan(cell(hour, day, site, pollutant));
    }

    std::span<double> series(int site, int pollutant) {
        return {values.data() + cell_index(0, 0, site, pollutant),
                static_cast<size_t>(days) * 24};
    }
    std::span<const double> series(int site, int pollutant) const {
        return {values.data() + cell_index(0, 0, site, pollutant),
                static_cast<size_t>(days) * 24};
    }

    long present_count() const;
};

struct ParseReport {
    std::vector<std::string> warnings;
    long rows = 0;
    long masked_by_qc = 0; // rows turned missing by QC code or empty value
};

// Long-format CSV: header `timestamp,site_id,pollutant,value,qc_code`
// (qc_code column optional). Rows with a QC code in the policy, or an empty /
// non-numeric value field, become missing cells. Duplicate
// (timestamp, site, pollutant) keys and unknown pollutants are errors.
ObservationGrid parse_observations(std::istream& in, const QcPolicy& policy,
                                   const std::vector<std::string>& pollutant_order,
                                   ParseReport* report = nullptr);

// Full-lattice writer (missing cells get an empty value field), so that
// parse -> write -> parse reproduces the grid exactly.
void write_observations(std::ostream& out, const ObservationGrid& grid);

// One DST year: `jump` is the first wall-clock hour (in the grid's fixed
// offset) at which local time runs one hour ahead; `compression` the first
// hour at which it no longer does.
struct ZoneRule {
    int year = 0;
    long jump_hour = 0;
    long compression_hour = 0;
};

// JSON array of {year, jump: ISO instant, compression: ISO instant}.
std::vector<ZoneRule> parse_zone_rules(std::istream& in);

// Re-index to local civil time. The skipped hour on each jump day is filled
// by linear interpolation between its two neighbours per (site, pollutant)
// (left missing if either neighbour is); the repeated hour on each
// compression day keeps its first occurrence. Output keeps 24 slots per day.
ObservationGrid apply_dst(const ObservationGrid& grid, const std::vector<ZoneRule>& rules);

struct MissingnessRow {
    std::string pollutant;
    double short_pct = 0.0;
    double long_pct = 0.0;
    double total_pct = 0.0;
    int site_count = 0;
};

// Classification of missing runs within one hourly series. Runs of at least
// `offline_run_min` hours mark the site offline for that stretch and leave
// the denominator entirely.
struct RunStats {
    long short_hours = 0;
    long long_hours = 0;
    long offline_hours = 0;
    long expected_hours = 0;
};

RunStats classify_runs(std::span<const double> series, int short_gap_max, long offline_run_min);

// Off-line threshold: 31 consecutive days (744 hours).
inline constexpr long kOfflineRunHours = 31 * 24;

std::vector<MissingnessRow> missingness_report(const ObservationGrid& grid, int short_gap_max);

// CSV `pollutant,short_pct,long_pct,total_pct,site_count`, 2 decimals.
void write_missingness_csv(std::ostream& out, const std::vector<MissingnessRow>& rows);

} // namespace dpca

#endif
