#include "dpca/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <unordered_map>

#include <json.hpp>

#include "dpca/csv.hpp"
#include "dpca/error.hpp"

namespace dpca {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::string default_unit(const std::string& pollutant) {
    return pollutant.rfind("PM", 0) == 0 ? "ug/m3" : "ppb";
}

struct RawRow {
    long wall_hour;
    int site;
    int pollutant;
    double value; // NaN when masked/missing
    size_t line;
};

bool parse_value_field(const std::string& field, double& out) {
    if (field.empty()) return false;
    const char* begin = field.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end != begin + field.size()) return false;
    out = v;
    return true;
}

} // namespace

long ObservationGrid::present_count() const {
    long n = 0;
    for (double v : values) n += !std::isnan(v);
    return n;
}

ObservationGrid parse_observations(std::istream& in, const QcPolicy& policy,
                                   const std::vector<std::string>& pollutant_order,
                                   ParseReport* report) {
    ParseReport local_report;
    ParseReport& rep = report ? *report : local_report;

    ObservationGrid grid;
    grid.pollutants = pollutant_order;
    grid.units.reserve(pollutant_order.size());
    for (const auto& p : pollutant_order) grid.units.push_back(default_unit(p));

    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) {
        rep.warnings.push_back("input is empty; produced a grid spanning 0 days");
        return grid;
    }
    const bool has_qc = fields.size() == 5 && fields[4] == "qc_code";
    if (!(fields.size() >= 4 && fields[0] == "timestamp" && fields[1] == "site_id" &&
          fields[2] == "pollutant" && fields[3] == "value" && (fields.size() == 4 || has_qc))) {
        throw DataError("line 1: expected header timestamp,site_id,pollutant,value[,qc_code]");
    }

    std::unordered_map<std::string, int> site_index;
    std::unordered_map<std::string, int> pollutant_index;
    for (size_t i = 0; i < pollutant_order.size(); ++i)
        pollutant_index[pollutant_order[i]] = static_cast<int>(i);

    std::vector<RawRow> rows;
    bool offset_known = false;
    long min_hour = 0, max_hour = 0;

    while (reader.next(fields)) {
        const size_t line = reader.line();
        if (fields.size() != (has_qc ? 5u : 4u)) {
            throw DataError("line " + std::to_string(line) + ": expected " +
                            std::to_string(has_qc ? 5 : 4) + " fields, got " +
                            std::to_string(fields.size()));
        }
        WallClockHour ts;
        try {
            ts = parse_timestamp(fields[0]);
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(line) + ": " + e.what());
        }
        if (!offset_known) {
            grid.utc_offset_minutes = ts.offset_minutes;
            offset_known = true;
        } else if (ts.offset_minutes != grid.utc_offset_minutes) {
            throw DataError("line " + std::to_string(line) +
                            ": UTC offset differs from the rest of the file");
        }

        auto [site_it, site_is_new] =
            site_index.try_emplace(fields[1], static_cast<int>(grid.sites.size()));
        if (site_is_new) grid.sites.push_back(fields[1]);
        const int site = site_it->second;

        const auto pol_it = pollutant_index.find(fields[2]);
        if (pol_it == pollutant_index.end()) {
            throw DataError("line " + std::to_string(line) + ": unknown pollutant code '" +
                            fields[2] + "'");
        }
        const int pol = pol_it->second;

        double value = kMissing;
        const bool qc_invalid = has_qc && policy.invalid_codes.count(fields[4]) > 0;
        if (qc_invalid) {
            ++rep.masked_by_qc;
        } else {
            double parsed;
            if (parse_value_field(fields[3], parsed)) {
                if (!std::isfinite(parsed) || parsed < 0.0) {
                    throw DataError("line " + std::to_string(line) + ": value '" + fields[3] +
                                    "' must be a finite non-negative number");
                }
                value = parsed;
            } else if (!fields[3].empty()) {
                // Non-numeric value field: treated as missing, like a QC mask.
                ++rep.masked_by_qc;
            }
        }

        if (rows.empty()) {
            min_hour = max_hour = ts.hour;
        } else {
            min_hour = std::min(min_hour, ts.hour);
            max_hour = std::max(max_hour, ts.hour);
        }
        rows.push_back(RawRow{ts.hour, site, pol, value, line});
        ++rep.rows;
    }

    if (rows.empty()) {
        rep.warnings.push_back("no data rows; produced a grid spanning 0 days");
        return grid;
    }

    const long start_day = min_hour >= 0 ? min_hour / 24 : (min_hour - 23) / 24;
    const long end_day = max_hour >= 0 ? max_hour / 24 : (max_hour - 23) / 24;
    const long span = end_day - start_day + 1;
    if (span > 100000) {
        throw DataError("timestamps span " + std::to_string(span) +
                        " days; refusing to allocate a grid that large");
    }
    grid.start_date = civil_from_days(start_day);
    grid.days = static_cast<int>(span);
    grid.values.assign(static_cast<size_t>(grid.sites.size()) * grid.pollutants.size() *
                           grid.days * 24,
                       kMissing);

    // Placement doubles as duplicate detection: a per-cell line lattice is
    // far lighter than a hash map at multi-million-row scale.
    std::vector<int32_t> first_line(grid.values.size(), 0);
    const long origin = start_day * 24;
    for (const RawRow& r : rows) {
        const long rel = r.wall_hour - origin;
        const int day = static_cast<int>(rel / 24);
        const int hour = static_cast<int>(rel % 24);
        const size_t idx = grid.cell_index(hour, day, r.site, r.pollutant);
        if (first_line[idx] != 0) {
            throw DataError("duplicate observation for (" +
                            format_timestamp(r.wall_hour, grid.utc_offset_minutes) + ", " +
                            grid.sites[r.site] + ", " + grid.pollutants[r.pollutant] +
                            ") at lines " + std::to_string(first_line[idx]) + " and " +
                            std::to_string(r.line));
        }
        first_line[idx] = static_cast<int32_t>(r.line);
        grid.values[idx] = r.value;
    }
    return grid;
}

void write_observations(std::ostream& out, const ObservationGrid& grid) {
    out << "timestamp,site_id,pollutant,value,qc_code\n";
    const long origin = days_from_civil(grid.start_date) * 24;
    for (int s = 0; s < grid.site_count(); ++s) {
        for (int p = 0; p < grid.pollutant_count(); ++p) {
            for (int d = 0; d < grid.days; ++d) {
                for (int h = 0; h < 24; ++h) {
                    out << format_timestamp(origin + d * 24L + h, grid.utc_offset_minutes) << ','
                        << grid.sites[s] << ',' << grid.pollutants[p] << ','
                        << fmt_double(grid.cell(h, d, s, p)) << ",\n";
                }
            }
        }
    }
}

std::vector<ZoneRule> parse_zone_rules(std::istream& in) {
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("zone rules: invalid JSON: ") + e.what());
    }
    if (!doc.is_array()) throw DataError("zone rules: expected a JSON array");
    std::vector<ZoneRule> rules;
    for (const auto& item : doc) {
        ZoneRule r;
        try {
            r.year = item.at("year").get<int>();
            r.jump_hour = parse_timestamp(item.at("jump").get<std::string>()).hour;
            r.compression_hour = parse_timestamp(item.at("compression").get<std::string>()).hour;
        } catch (const nlohmann::json::exception& e) {
            throw DataError(std::string("zone rules: ") + e.what());
        }
        if (r.compression_hour <= r.jump_hour) {
            throw DataError("zone rules: compression precedes jump for year " +
                            std::to_string(r.year));
        }
        rules.push_back(r);
    }
    std::sort(rules.begin(), rules.end(),
              [](const ZoneRule& a, const ZoneRule& b) { return a.jump_hour < b.jump_hour; });
    for (size_t i = 1; i < rules.size(); ++i) {
        if (rules[i].jump_hour < rules[i - 1].compression_hour) {
            throw DataError("zone rules: overlapping DST periods");
        }
    }
    return rules;
}

ObservationGrid apply_dst(const ObservationGrid& grid, const std::vector<ZoneRule>& rules) {
    if (rules.empty()) return grid;

    const long origin = days_from_civil(grid.start_date) * 24;
    const long total = static_cast<long>(grid.days) * 24;
    for (const ZoneRule& r : rules) {
        if (r.jump_hour < origin || r.compression_hour >= origin + total) {
            throw DataError("zone rule for year " + std::to_string(r.year) +
                            " lies outside the grid span");
        }
    }

    const auto in_dst = [&](long wall_hour) {
        for (const ZoneRule& r : rules) {
            if (wall_hour >= r.jump_hour && wall_hour < r.compression_hour) return true;
        }
        return false;
    };
    const auto is_compression = [&](long wall_hour) {
        for (const ZoneRule& r : rules) {
            if (wall_hour == r.compression_hour) return true;
        }
        return false;
    };

    ObservationGrid out = grid;
    out.values.assign(grid.values.size(), kMissing);

    for (int s = 0; s < grid.site_count(); ++s) {
        for (int p = 0; p < grid.pollutant_count(); ++p) {
            const auto src = grid.series(s, p);
            const auto dst = out.series(s, p);
            for (long t = 0; t < total; ++t) {
                const long wall = origin + t;
                if (is_compression(wall)) continue; // repeated local hour: drop second occurrence
                const long local = t + (in_dst(wall) ? 1 : 0);
                if (local >= total) continue; // shifted past the grid end
                dst[local] = src[t];
            }
            // Local 2am slot on each jump day never received a value; fill it
            // from its neighbours when both are present.
            for (const ZoneRule& r : rules) {
                const long gap = r.jump_hour - origin;
                if (gap <= 0 || gap + 1 >= total) continue;
                const double before = dst[gap - 1];
                const double after = dst[gap + 1];
                if (!std::isnan(before) && !std::isnan(after)) {
                    dst[gap] = 0.5 * (before + after);
                }
            }
        }
    }
    return out;
}

RunStats classify_runs(std::span<const double> series, int short_gap_max, long offline_run_min) {
    RunStats st;
    st.expected_hours = static_cast<long>(series.size());
    size_t i = 0;
    while (i < series.size()) {
        if (!std::isnan(series[i])) {
            ++i;
            continue;
        }
        size_t j = i;
        while (j < series.size() && std::isnan(series[j])) ++j;
        const long run = static_cast<long>(j - i);
        if (run >= offline_run_min) {
            st.offline_hours += run;
        } else if (run <= short_gap_max) {
            st.short_hours += run;
        } else {
            st.long_hours += run;
        }
        i = j;
    }
    st.expected_hours -= st.offline_hours;
    return st;
}

std::vector<MissingnessRow> missingness_report(const ObservationGrid& grid, int short_gap_max) {
    if (short_gap_max < 1) throw ConfigError("short_gap_max must be >= 1");
    std::vector<MissingnessRow> rows;
    for (int p = 0; p < grid.pollutant_count(); ++p) {
        MissingnessRow row;
        row.pollutant = grid.pollutants[p];
        long short_h = 0, long_h = 0, expected = 0;
        for (int s = 0; s < grid.site_count(); ++s) {
            const RunStats st = classify_runs(grid.series(s, p), short_gap_max, kOfflineRunHours);
            if (st.expected_hours == 0) continue; // site never contributes this pollutant
            ++row.site_count;
            short_h += st.short_hours;
            long_h += st.long_hours;
            expected += st.expected_hours;
        }
        if (expected > 0) {
            row.short_pct = 100.0 * static_cast<double>(short_h) / static_cast<double>(expected);
            row.long_pct = 100.0 * static_cast<double>(long_h) / static_cast<double>(expected);
            row.total_pct = row.short_pct + row.long_pct;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_missingness_csv(std::ostream& out, const std::vector<MissingnessRow>& rows) {
    out << "pollutant,short_pct,long_pct,total_pct,site_count\n";
    for (const auto& r : rows) {
        out << r.pollutant << ',' << fmt_fixed(r.short_pct, 2) << ',' << fmt_fixed(r.long_pct, 2)
            << ',' << fmt_fixed(r.total_pct, 2) << ',' << r.site_count << '\n';
    }
}

} // namespace dpca
