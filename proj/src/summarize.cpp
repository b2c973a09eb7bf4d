#include "dpca/summarize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "dpca/csv.hpp"
#include "dpca/error.hpp"
#include "dpca/stats.hpp"

namespace dpca {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

HourlyMeanEv mean_ev_by_hour(const EvSurfaceSet& set) {
    const int p = set.components;
    const int width = static_cast<int>(set.day_index.size());
    HourlyMeanEv out;
    out.mean_ev = Matrix(24, p, kNaN);
    out.mean_cev = Matrix(24, p, kNaN);

    for (int h = 0; h < 24; ++h) {
        long usable = 0;
        std::vector<double> sums(p, 0.0);
        for (int w = 0; w < width; ++w) {
            if (set.flags(h, w) != 0.0) continue;
            ++usable;
            for (int k = 0; k < p; ++k) sums[k] += set.ev[k](h, w);
        }
        out.coverage[h] = width > 0 ? static_cast<double>(usable) / width : 0.0;
        if (usable == 0) continue;
        double running = 0.0;
        for (int k = 0; k < p; ++k) {
            out.mean_ev(h, k) = sums[k] / static_cast<double>(usable);
            running += out.mean_ev(h, k);
            out.mean_cev(h, k) = running;
        }
    }
    return out;
}

std::vector<double> overall_mean_ev(const Matrix& by_hour) {
    std::vector<double> out(by_hour.cols(), kNaN);
    for (int k = 0; k < by_hour.cols(); ++k) {
        double s = 0.0;
        long n = 0;
        for (int h = 0; h < by_hour.rows(); ++h) {
            if (std::isnan(by_hour(h, k))) continue;
            s += by_hour(h, k);
            ++n;
        }
        if (n > 0) out[k] = s / static_cast<double>(n);
    }
    return out;
}

std::vector<BoxSummary> ev_distribution_by_hour(const EvSurfaceSet& set, int component) {
    if (component < 1 || component > set.components) {
        throw ConfigError("component out of range 1.." + std::to_string(set.components));
    }
    const Matrix& surface = set.ev[component - 1];
    std::vector<BoxSummary> out;
    for (int h = 0; h < 24; ++h) {
        BoxSummary box;
        box.hour = h;
        std::vector<double> sample;
        for (int w = 0; w < surface.cols(); ++w) {
            if (set.flags(h, w) == 0.0) sample.push_back(surface(h, w));
        }
        box.n = static_cast<int>(sample.size());
        if (!sample.empty()) {
            std::sort(sample.begin(), sample.end());
            box.min = sample.front();
            box.max = sample.back();
            box.q1 = quantile_sorted(sample, 0.25);
            box.median = quantile_sorted(sample, 0.5);
            box.q3 = quantile_sorted(sample, 0.75);
            const double iqr = box.q3 - box.q1;
            const double lo = box.q1 - 1.5 * iqr;
            const double hi = box.q3 + 1.5 * iqr;
            for (double v : sample) {
                if (v < lo || v > hi) box.outliers.push_back(v);
            }
        }
        out.push_back(std::move(box));
    }
    return out;
}

namespace {

bool month_in(const std::array<int, 3>& months, int month) {
    return months[0] == month || months[1] == month || months[2] == month;
}

struct PartitionDef {
    std::string name;
    // Membership of an (hour, date) observation.
    bool (*member)(int hour, const CivilDate& date, const PartitionBounds& b);
};

const PartitionDef kSummer{"summer", [](int, const CivilDate& d, const PartitionBounds& b) {
                               return month_in(b.summer_months, d.month);
                           }};
const PartitionDef kWinter{"winter", [](int, const CivilDate& d, const PartitionBounds& b) {
                               return month_in(b.winter_months, d.month);
                           }};
const PartitionDef kDay{"daytime", [](int h, const CivilDate&, const PartitionBounds& b) {
                            return h >= b.day_start_hour && h <= b.day_end_hour;
                        }};
const PartitionDef kNight{"nighttime", [](int h, const CivilDate&, const PartitionBounds& b) {
                              return h < b.day_start_hour || h > b.day_end_hour;
                          }};
const PartitionDef kWhole{"whole", [](int, const CivilDate&, const PartitionBounds&) {
                              return true;
                          }};

} // namespace

std::vector<PartitionEv> static_pca_partition(const std::vector<Panel>& panels,
                                              PartitionScheme scheme,
                                              const PartitionBounds& bounds) {
    if (panels.empty()) throw ConfigError("static_pca_partition: no panels");
    const int p = panels.front().values.cols();

    std::vector<PartitionDef> defs;
    switch (scheme) {
        case PartitionScheme::SummerWinter: defs = {kSummer, kWinter}; break;
        case PartitionScheme::DayNight: defs = {kDay, kNight}; break;
        case PartitionScheme::Whole: defs = {kWhole}; break;
    }

    std::vector<PartitionEv> out;
    for (const auto& def : defs) {
        std::vector<std::vector<double>> pooled;
        for (const Panel& panel : panels) {
            for (int d = 0; d < panel.rows(); ++d) {
                if (!def.member(panel.hour, panel.date_of_row(d), bounds)) continue;
                pooled.push_back(panel.values.row(d));
            }
        }
        if (pooled.empty()) throw ConfigError("partition '" + def.name + "' is empty");
        if (pooled.size() < static_cast<size_t>(p) + 2) {
            throw DataError("partition '" + def.name + "' has too few observations");
        }

        Matrix x(static_cast<int>(pooled.size()), p);
        for (size_t i = 0; i < pooled.size(); ++i)
            for (int j = 0; j < p; ++j) x(static_cast<int>(i), j) = pooled[i][j];

        // Standardize once over the pooled sample, then one static PCA.
        const Standardized z = standardize_columns(x);
        const EigenResult eg = eigen_sym(covariance(z.values, /*centered=*/true));

        PartitionEv part;
        part.name = def.name;
        part.rows = static_cast<long>(pooled.size());
        double total = 0.0;
        for (double v : eg.values) total += std::max(v, 0.0);
        double running = 0.0;
        for (int k = 0; k < p; ++k) {
            const double ev = std::max(eg.values[k], 0.0) / total;
            running += ev;
            part.ev.push_back(ev);
            part.cev.push_back(running);
        }
        out.push_back(std::move(part));
    }
    return out;
}

TransformComparison transform_comparison(const ObservationGrid& grid, const DpcaConfig& cfg) {
    TransformComparison cmp;
    const std::array<Stage, 3> stages{Stage::SAO, Stage::LSAO, Stage::NSAO};
    const std::array<Aggregator, 2> aggregators{Aggregator::Median, Aggregator::Mean};

    for (Stage stage : stages) {
        for (Aggregator agg : aggregators) {
            cmp.variants.push_back(to_string(stage) + "/" + to_string(agg));
        }
    }
    cmp.mean_ev1 = Matrix(24, static_cast<int>(cmp.variants.size()), kNaN);

    int col = 0;
    for (Stage stage : stages) {
        for (Aggregator agg : aggregators) {
            for (int h = 0; h < 24; ++h) {
                Panel panel = build_sao(grid, h, agg);
                if (stage != Stage::SAO) panel = to_lsao(panel);
                if (stage == Stage::NSAO) panel = to_nsao(panel);
                const auto results = run_dpca(panel, cfg);
                double sum = 0.0;
                long n = 0;
                for (const auto& r : results) {
                    if (r.degenerate) continue;
                    sum += r.core.ev[0];
                    ++n;
                }
                if (n > 0) cmp.mean_ev1(h, col) = sum / static_cast<double>(n);
            }
            ++col;
        }
    }
    return cmp;
}

void write_mean_ev_csv(std::ostream& out, const HourlyMeanEv& table) {
    out << "hour,k,mean_ev,mean_cev,coverage\n";
    for (int h = 0; h < 24; ++h) {
        for (int k = 0; k < table.mean_ev.cols(); ++k) {
            out << h << ',' << (k + 1) << ',' << fmt_double(table.mean_ev(h, k)) << ','
                << fmt_double(table.mean_cev(h, k)) << ',' << fmt_double(table.coverage[h])
                << '\n';
        }
    }
}

void write_overall_mean_ev_csv(std::ostream& out, const std::vector<double>& ev,
                               const std::vector<double>& cev) {
    out << "k,mean_ev,mean_cev\n";
    for (size_t k = 0; k < ev.size(); ++k) {
        out << (k + 1) << ',' << fmt_double(ev[k]) << ',' << fmt_double(cev[k]) << '\n';
    }
}

void write_distribution_csv(std::ostream& out, const std::vector<BoxSummary>& rows,
                            int component) {
    out << "hour,k,n,min,q1,median,q3,max,outliers\n";
    for (const auto& box : rows) {
        out << box.hour << ',' << component << ',' << box.n << ',' << fmt_double(box.min) << ','
            << fmt_double(box.q1) << ',' << fmt_double(box.median) << ',' << fmt_double(box.q3)
            << ',' << fmt_double(box.max) << ',';
        for (size_t i = 0; i < box.outliers.size(); ++i) {
            if (i) out << ';';
            out << fmt_double(box.outliers[i]);
        }
        out << '\n';
    }
}

void write_partition_csv(std::ostream& out, const std::vector<PartitionEv>& parts) {
    out << "partition,rows,k,ev,cev\n";
    for (const auto& part : parts) {
        for (size_t k = 0; k < part.ev.size(); ++k) {
            out << part.name << ',' << part.rows << ',' << (k + 1) << ',' << fmt_double(part.ev[k])
                << ',' << fmt_double(part.cev[k]) << '\n';
        }
    }
}

void write_transform_comparison_csv(std::ostream& out, const TransformComparison& cmp) {
    out << "hour";
    for (const auto& v : cmp.variants) out << ',' << v;
    out << '\n';
    for (int h = 0; h < 24; ++h) {
        out << h;
        for (int c = 0; c < cmp.mean_ev1.cols(); ++c) out << ',' << fmt_double(cmp.mean_ev1(h, c));
        out << '\n';
    }
}

} // namespace dpca
