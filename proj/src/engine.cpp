#include "dpca/engine.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>

#include "dpca/csv.hpp"
#include "dpca/error.hpp"

namespace dpca {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

void DpcaConfig::validate(int pollutants) const {
    if (window <= pollutants + 1) {
        throw ConfigError("window " + std::to_string(window) + " must exceed pollutants+1 = " +
                          std::to_string(pollutants + 1));
    }
    if (smoothing_window < 1) throw ConfigError("smoothing_window must be >= 1");
    if (components_kept < 0 || components_kept > pollutants) {
        throw ConfigError("components_kept must lie in 0.." + std::to_string(pollutants));
    }
}

namespace {

Matrix centered_or_standardized(const Matrix& window, bool standardize) {
    if (standardize) return standardize_columns(window).values;
    Matrix out(window.rows(), window.cols());
    for (int j = 0; j < window.cols(); ++j) {
        double s = 0.0;
        for (int i = 0; i < window.rows(); ++i) s += window(i, j);
        const double m = s / window.rows();
        for (int i = 0; i < window.rows(); ++i) out(i, j) = window(i, j) - m;
    }
    return out;
}

} // namespace

WindowPca window_pca(const Matrix& window, bool standardize) {
    const int p = window.cols();
    const Matrix x = centered_or_standardized(window, standardize);
    const SymMatrix cov = covariance(x, /*centered=*/true);
    const EigenResult eg = eigen_sym(cov);

    WindowPca out;
    out.loadings = eg.vectors;
    out.singular_values.resize(p);
    out.ev.resize(p);
    out.cev.resize(p);

    double total = 0.0;
    for (int k = 0; k < p; ++k) {
        const double lambda2 = std::max(eg.values[k], 0.0);
        out.singular_values[k] = std::sqrt(lambda2);
        total += lambda2;
    }
    if (!(total > 0.0)) throw DegenerateError("window has zero total variance");

    double running = 0.0;
    for (int k = 0; k < p; ++k) {
        out.ev[k] = out.singular_values[k] * out.singular_values[k] / total;
        running += out.ev[k];
        out.cev[k] = running;
    }
    return out;
}

Matrix window_scores(const Matrix& window, bool standardize, const Matrix& loadings,
                     int components) {
    const Matrix z = matmul(centered_or_standardized(window, standardize), loadings);
    if (components <= 0 || components >= z.cols()) return z;
    Matrix kept(z.rows(), components);
    for (int i = 0; i < z.rows(); ++i)
        for (int k = 0; k < components; ++k) kept(i, k) = z(i, k);
    return kept;
}

std::vector<DpcaResult> run_dpca(const Panel& panel, const DpcaConfig& cfg) {
    const int p = panel.values.cols();
    cfg.validate(p);
    const int rows = panel.rows();
    if (rows < cfg.window) {
        throw DataError("panel has " + std::to_string(rows) + " rows, needs at least " +
                        std::to_string(cfg.window));
    }

    std::vector<DpcaResult> results;
    results.reserve(rows - cfg.window + 1);
    Matrix w(cfg.window, p);
    for (int end = cfg.window - 1; end < rows; ++end) {
        for (int i = 0; i < cfg.window; ++i)
            for (int j = 0; j < p; ++j) w(i, j) = panel.values(end - cfg.window + 1 + i, j);

        DpcaResult r;
        r.hour = panel.hour;
        r.day_index = panel.first_day + end;
        try {
            r.core = window_pca(w, cfg.standardize_per_window);
        } catch (const DegenerateColumnError& e) {
            r.degenerate = true;
            r.degenerate_column = e.column();
        } catch (const DegenerateError&) {
            r.degenerate = true;
        }
        if (r.degenerate) {
            r.core.singular_values.assign(p, kNaN);
            r.core.ev.assign(p, kNaN);
            r.core.cev.assign(p, kNaN);
            r.core.loadings = Matrix(p, p, kNaN);
        }
        results.push_back(std::move(r));
    }
    return results;
}

Matrix mean_abs_coefficients(std::span<const DpcaResult> results) {
    if (results.empty()) throw DataError("mean_abs_coefficients: no window results");
    const int p = results.front().core.loadings.rows();
    Matrix mac(p, p);
    long usable = 0;
    for (const auto& r : results) {
        if (r.degenerate) continue;
        ++usable;
        for (int i = 0; i < p; ++i)
            for (int k = 0; k < p; ++k) mac(i, k) += std::abs(r.core.loadings(i, k));
    }
    if (usable == 0) return Matrix(p, p, kNaN);
    for (int i = 0; i < p; ++i)
        for (int k = 0; k < p; ++k) mac(i, k) /= static_cast<double>(usable);
    return mac;
}

void sign_normalize(std::vector<DpcaResult>& results) {
    if (results.empty()) return;
    const Matrix mac = mean_abs_coefficients(results);
    const int p = mac.rows();
    if (std::isnan(mac(0, 0))) return; // every window degenerate

    for (int k = 0; k < p; ++k) {
        int anchor = 0;
        for (int i = 1; i < p; ++i) {
            if (mac(i, k) > mac(anchor, k)) anchor = i; // ties keep the lowest index
        }
        for (auto& r : results) {
            if (r.degenerate) continue;
            const double pivot = r.core.loadings(anchor, k);
            if (pivot >= 0.0) continue; // positive stays, exact zero stays
            for (int i = 0; i < p; ++i) r.core.loadings(i, k) = -r.core.loadings(i, k);
        }
    }
}

std::vector<double> trailing_mean(std::span<const double> series, int window) {
    if (window < 1) throw ConfigError("smoothing window must be >= 1");
    std::vector<double> out(series.size(), kNaN);
    for (size_t i = 0; i < series.size(); ++i) {
        const size_t start = i + 1 >= static_cast<size_t>(window) ? i + 1 - window : 0;
        double sum = 0.0;
        long count = 0;
        for (size_t j = start; j <= i; ++j) {
            if (std::isnan(series[j])) continue;
            sum += series[j];
            ++count;
        }
        if (count > 0) out[i] = sum / static_cast<double>(count);
    }
    return out;
}

LoadingTrajectory smooth_loadings(LoadingTrajectory t, int smoothing_window) {
    t.smoothed = trailing_mean(t.raw, smoothing_window);
    return t;
}

std::vector<LoadingTrajectory> loading_trajectories(std::span<const DpcaResult> results,
                                                    const Panel& panel, int smoothing_window) {
    std::vector<LoadingTrajectory> out;
    if (results.empty()) return out;
    const int p = panel.values.cols();
    const Matrix mac = mean_abs_coefficients(results);

    for (int pol = 0; pol < p; ++pol) {
        for (int k = 0; k < p; ++k) {
            LoadingTrajectory t;
            t.hour = panel.hour;
            t.pollutant = pol;
            t.component = k;
            t.mac = mac(pol, k);
            t.day_index.reserve(results.size());
            t.raw.reserve(results.size());
            for (const auto& r : results) {
                t.day_index.push_back(r.day_index);
                t.raw.push_back(r.degenerate ? kNaN : r.core.loadings(pol, k));
            }
            out.push_back(smooth_loadings(std::move(t), smoothing_window));
        }
    }
    return out;
}

EvSurfaceSet assemble_surfaces(const std::vector<std::vector<DpcaResult>>& per_hour,
                               const Panel& reference_panel, const DpcaConfig& cfg) {
    const int p = reference_panel.values.cols();
    const int width = reference_panel.rows() - cfg.window + 1;
    if (width < 1) throw DataError("panel too short for the configured window");

    EvSurfaceSet set;
    set.window = cfg.window;
    set.components = p;
    set.grid_start = reference_panel.grid_start;
    set.day_index.resize(width);
    for (int w = 0; w < width; ++w) {
        set.day_index[w] = reference_panel.first_day + cfg.window - 1 + w;
    }
    set.ev.assign(p, Matrix(24, width, kNaN));
    set.cev.assign(p, Matrix(24, width, kNaN));
    set.flags = Matrix(24, width, 1.0);

    for (const auto& results : per_hour) {
        if (results.empty()) continue;
        if (static_cast<int>(results.size()) != width) {
            throw DataError("hour result count does not match the surface width");
        }
        const int h = results.front().hour;
        for (int w = 0; w < width; ++w) {
            const DpcaResult& r = results[w];
            set.flags(h, w) = r.degenerate ? 1.0 : 0.0;
            if (r.degenerate) continue;
            for (int k = 0; k < p; ++k) {
                set.ev[k](h, w) = r.core.ev[k];
                set.cev[k](h, w) = r.core.cev[k];
            }
        }
    }
    return set;
}

void write_ev_surface_csv(std::ostream& out, const EvSurfaceSet& set, int only_hour) {
    out << "hour,day_index,date,k,ev,cev,flag\n";
    const int width = static_cast<int>(set.day_index.size());
    for (int h = 0; h < 24; ++h) {
        if (only_hour >= 0 && h != only_hour) continue;
        for (int w = 0; w < width; ++w) {
            const CivilDate date = add_days(set.grid_start, set.day_index[w]);
            for (int k = 0; k < set.components; ++k) {
                out << h << ',' << set.day_index[w] << ',' << format_date(date) << ',' << (k + 1)
                    << ',' << fmt_double(set.ev[k](h, w)) << ',' << fmt_double(set.cev[k](h, w))
                    << ',' << static_cast<int>(set.flags(h, w)) << '\n';
            }
        }
    }
}

EvSurfaceSet read_ev_surface_csv(std::istream& in) {
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields) || fields.size() != 7 || fields[0] != "hour") {
        throw DataError("ev surface csv: bad header");
    }

    struct Cell {
        int h, k;
        double ev, cev, flag;
    };
    std::map<int, std::vector<Cell>> by_day;
    CivilDate grid_start{};
    bool have_start = false;
    int components = 0;

    while (reader.next(fields)) {
        if (fields.size() != 7) {
            throw DataError("ev surface csv: bad row at line " + std::to_string(reader.line()));
        }
        Cell c;
        int day;
        try {
            day = std::stoi(fields[1]);
            c.h = std::stoi(fields[0]);
            c.k = std::stoi(fields[3]) - 1;
            c.ev = fields[4].empty() ? kNaN : std::stod(fields[4]);
            c.cev = fields[5].empty() ? kNaN : std::stod(fields[5]);
            c.flag = std::stod(fields[6]);
        } catch (const std::exception&) {
            throw DataError("ev surface csv: bad number at line " + std::to_string(reader.line()));
        }
        if (c.h < 0 || c.h > 23 || c.k < 0) {
            throw DataError("ev surface csv: bad hour or component at line " +
                            std::to_string(reader.line()));
        }
        components = std::max(components, c.k + 1);
        if (!have_start) {
            const auto ts = fields[2] + "T00:00:00Z";
            grid_start = civil_from_days(parse_timestamp(ts).hour / 24 - day);
            have_start = true;
        }
        by_day[day].push_back(c);
    }
    if (by_day.empty()) throw DataError("ev surface csv: no rows");

    EvSurfaceSet set;
    set.components = components;
    set.grid_start = grid_start;
    const int width = static_cast<int>(by_day.size());
    set.day_index.reserve(width);
    for (const auto& [day, cells] : by_day) set.day_index.push_back(day);
    set.ev.assign(components, Matrix(24, width, kNaN));
    set.cev.assign(components, Matrix(24, width, kNaN));
    set.flags = Matrix(24, width, 1.0);

    int w = 0;
    for (const auto& [day, cells] : by_day) {
        for (const Cell& c : cells) {
            set.ev[c.k](c.h, w) = c.ev;
            set.cev[c.k](c.h, w) = c.cev;
            set.flags(c.h, w) = c.flag;
        }
        ++w;
    }
    return set;
}

void write_loadings_csv(std::ostream& out, std::span<const LoadingTrajectory> trajectories,
                        const Panel& panel) {
    out << "hour,day_index,date,pollutant,k,weight_raw,weight_smoothed\n";
    for (const auto& t : trajectories) {
        for (size_t i = 0; i < t.raw.size(); ++i) {
            const CivilDate date = add_days(panel.grid_start, t.day_index[i]);
            out << t.hour << ',' << t.day_index[i] << ',' << format_date(date) << ','
                << panel.pollutants[t.pollutant] << ',' << (t.component + 1) << ','
                << fmt_double(t.raw[i]) << ',' << fmt_double(t.smoothed[i]) << '\n';
        }
    }
}

void write_mac_csv(std::ostream& out, const Matrix& mac, const Panel& panel) {
    out << "hour,pollutant,k,mac\n";
    for (int pol = 0; pol < mac.rows(); ++pol) {
        for (int k = 0; k < mac.cols(); ++k) {
            out << panel.hour << ',' << panel.pollutants[pol] << ',' << (k + 1) << ','
                << fmt_double(mac(pol, k)) << '\n';
        }
    }
}

} // namespace dpca
