#include "dpca/panel.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "dpca/csv.hpp"
#include "dpca/error.hpp"
#include "dpca/stats.hpp"

namespace dpca {

std::string to_string(Stage s) {
    switch (s) {
        case Stage::SAO: return "sao";
        case Stage::LSAO: return "lsao";
        case Stage::NSAO: return "nsao";
    }
    return "?";
}

std::string to_string(Aggregator a) {
    return a == Aggregator::Median ? "median" : "mean";
}

Stage stage_from_string(const std::string& s) {
    if (s == "sao") return Stage::SAO;
    if (s == "lsao") return Stage::LSAO;
    if (s == "nsao") return Stage::NSAO;
    throw ConfigError("unknown stage '" + s + "' (expected sao, lsao or nsao)");
}

Aggregator aggregator_from_string(const std::string& s) {
    if (s == "median") return Aggregator::Median;
    if (s == "mean") return Aggregator::Mean;
    throw ConfigError("unknown aggregator '" + s + "' (expected median or mean)");
}

Panel build_sao(const ObservationGrid& grid, int hour, Aggregator aggregator) {
    if (hour < 0 || hour > 23) throw DataError("hour " + std::to_string(hour) + " out of 0..23");
    if (grid.days == 0) throw DataError("grid spans 0 days");

    Panel panel;
    panel.hour = hour;
    panel.stage = Stage::SAO;
    panel.aggregator = aggregator;
    panel.pollutants = grid.pollutants;
    panel.first_day = 0;
    panel.grid_start = grid.start_date;
    panel.values = Matrix(grid.days, grid.pollutant_count(),
                          std::numeric_limits<double>::quiet_NaN());

    std::vector<double> bucket;
    for (int p = 0; p < grid.pollutant_count(); ++p) {
        for (int d = 0; d < grid.days; ++d) {
            bucket.clear();
            for (int s = 0; s < grid.site_count(); ++s) {
                const double v = grid.cell(hour, d, s, p);
                if (!std::isnan(v)) bucket.push_back(v);
            }
            if (bucket.empty()) continue; // all sites missing; filled below
            panel.values(d, p) = aggregator == Aggregator::Median
                                     ? median(bucket)
                                     : mean(bucket);
        }

        // Interpolate the all-site-missing cells along the day axis, against
        // the aggregated (pre-fill) column; panel edges take the nearest value.
        std::vector<char> was_missing(grid.days);
        for (int d = 0; d < grid.days; ++d) was_missing[d] = std::isnan(panel.values(d, p));
        for (int d = 0; d < grid.days; ++d) {
            if (!was_missing[d]) continue;
            int prev = d - 1;
            while (prev >= 0 && was_missing[prev]) --prev;
            int next = d + 1;
            while (next < grid.days && was_missing[next]) ++next;
            double v;
            if (prev >= 0 && next < grid.days) {
                const double w = static_cast<double>(d - prev) / (next - prev);
                v = (1.0 - w) * panel.values(prev, p) + w * panel.values(next, p);
            } else if (prev >= 0) {
                v = panel.values(prev, p);
            } else if (next < grid.days) {
                v = panel.values(next, p);
            } else {
                throw DataError("pollutant " + grid.pollutants[p] + " has no observations at hour " +
                                std::to_string(hour));
            }
            panel.values(d, p) = v;
            panel.flagged_cells.emplace_back(d, p);
        }
    }
    std::sort(panel.flagged_cells.begin(), panel.flagged_cells.end());
    return panel;
}

Panel to_lsao(const Panel& sao) {
    if (sao.stage != Stage::SAO) throw DataError("to_lsao expects an SAO panel");
    Panel out = sao;
    out.stage = Stage::LSAO;
    for (int d = 0; d < sao.rows(); ++d) {
        for (int p = 0; p < sao.values.cols(); ++p) {
            const double v = sao.values(d, p);
            if (std::isnan(v)) throw DataError("to_lsao: missing cell in SAO panel");
            if (v < 0.0) {
                throw DataError("to_lsao: negative value at day " + std::to_string(d) +
                                ", pollutant " + sao.pollutants[p]);
            }
            out.values(d, p) = std::log1p(v);
        }
    }
    return out;
}

Panel to_nsao(const Panel& lsao) {
    if (lsao.stage != Stage::LSAO) throw DataError("to_nsao expects an LSAO panel");
    const int rows = lsao.rows();
    if (rows < 2) throw DataError("to_nsao needs at least 2 days, got " + std::to_string(rows));

    Panel out;
    out.hour = lsao.hour;
    out.stage = Stage::NSAO;
    out.aggregator = lsao.aggregator;
    out.pollutants = lsao.pollutants;
    out.first_day = lsao.first_day + 1; // output row d aligns with input day d+1
    out.grid_start = lsao.grid_start;
    out.values = Matrix(rows - 1, lsao.values.cols());
    for (int d = 1; d < rows; ++d) {
        for (int p = 0; p < lsao.values.cols(); ++p) {
            out.values(d - 1, p) = lsao.values(d, p) - lsao.values(d - 1, p);
        }
    }
    return out;
}

void write_panel_csv(std::ostream& out, const Panel& panel) {
    out << "day_index,date";
    for (const auto& p : panel.pollutants) out << ',' << p;
    out << '\n';
    for (int d = 0; d < panel.rows(); ++d) {
        out << (panel.first_day + d) << ',' << format_date(panel.date_of_row(d));
        for (int p = 0; p < panel.values.cols(); ++p) {
            out << ',' << fmt_double(panel.values(d, p));
        }
        out << '\n';
    }
}

void write_panel_meta(std::ostream& out, const Panel& panel) {
    nlohmann::json meta;
    meta["hour"] = panel.hour;
    meta["stage"] = to_string(panel.stage);
    meta["aggregator"] = to_string(panel.aggregator);
    meta["first_day"] = panel.first_day;
    meta["grid_start"] = format_date(panel.grid_start);
    auto& cells = meta["flagged_cells"] = nlohmann::json::array();
    for (const auto& [d, p] : panel.flagged_cells) cells.push_back({d, p});
    out << meta.dump(2) << '\n';
}

Panel read_panel(std::istream& csv, std::istream& meta_in) {
    nlohmann::json meta;
    try {
        meta_in >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("panel meta: invalid JSON: ") + e.what());
    }

    Panel panel;
    try {
        panel.hour = meta.at("hour").get<int>();
        panel.stage = stage_from_string(meta.at("stage").get<std::string>());
        panel.aggregator = aggregator_from_string(meta.at("aggregator").get<std::string>());
        panel.first_day = meta.at("first_day").get<int>();
        const auto ts = meta.at("grid_start").get<std::string>() + "T00:00:00Z";
        panel.grid_start = civil_from_days(parse_timestamp(ts).hour / 24);
        for (const auto& cell : meta.at("flagged_cells")) {
            panel.flagged_cells.emplace_back(cell.at(0).get<int>(), cell.at(1).get<int>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("panel meta: ") + e.what());
    }

    CsvReader reader(csv);
    std::vector<std::string> fields;
    if (!reader.next(fields) || fields.size() < 3 || fields[0] != "day_index" ||
        fields[1] != "date") {
        throw DataError("panel csv: bad header");
    }
    panel.pollutants.assign(fields.begin() + 2, fields.end());

    std::vector<std::vector<double>> rows;
    while (reader.next(fields)) {
        if (fields.size() != panel.pollutants.size() + 2) {
            throw DataError("panel csv: wrong field count at line " +
                            std::to_string(reader.line()));
        }
        std::vector<double> row(panel.pollutants.size());
        for (size_t j = 0; j < panel.pollutants.size(); ++j) {
            try {
                row[j] = std::stod(fields[j + 2]);
            } catch (const std::exception&) {
                throw DataError("panel csv: bad number at line " + std::to_string(reader.line()));
            }
        }
        rows.push_back(std::move(row));
    }

    panel.values = Matrix(static_cast<int>(rows.size()), static_cast<int>(panel.pollutants.size()));
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < rows[i].size(); ++j)
            panel.values(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    return panel;
}

} // namespace dpca
