#ifndef DPCA_SUMMARIZE_HPP
#define DPCA_SUMMARIZE_HPP

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "dpca/engine.hpp"
#include "dpca/grid.hpp"
#include "dpca/panel.hpp"

namespace dpca {

// Per-hour means of the EV surfaces; flagged windows are excluded and the
// per-hour coverage fraction reported.
struct HourlyMeanEv {
    Matrix mean_ev;  // 24 x p
    Matrix mean_cev; // 24 x p (running sum of mean_ev over k)
    std::array<double, 24> coverage{}; // fraction of usable windows
};

HourlyMeanEv mean_ev_by_hour(const EvSurfaceSet& set);

// Unweighted mean over the 24 hours of a 24 x p table.
std::vector<double> overall_mean_ev(const Matrix& by_hour);

struct BoxSummary {
    int hour = 0;
    int n = 0;
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
    std::vector<double> outliers; // beyond q1/q3 -/+ 1.5 IQR
};

// Five-number summary of component k's EV values at each hour.
std::vector<BoxSummary> ev_distribution_by_hour(const EvSurfaceSet& set, int component);

enum class PartitionScheme { SummerWinter, DayNight, Whole };

struct PartitionBounds {
    std::array<int, 3> summer_months{6, 7, 8};
    std::array<int, 3> winter_months{12, 1, 2};
    int day_start_hour = 6; // day = 6am..5pm inclusive
    int day_end_hour = 17;
};

struct PartitionEv {
    std::string name;
    long rows = 0;
    std::vector<double> ev;
    std::vector<double> cev;
};

// Pool all (hour, day) observations of each partition, standardize once over
// the pooled sample, run a single static PCA. `panels` holds the 24 hourly
// panels of one stage.
std::vector<PartitionEv> static_pca_partition(const std::vector<Panel>& panels,
                                              PartitionScheme scheme,
                                              const PartitionBounds& bounds = {});

// Hourly mean EV1 of the full per-hour DPCA under each of the six pipeline
// variants {sao, lsao, nsao} x {median, mean}. The grid is expected to be
// short-gap imputed already.
struct TransformComparison {
    std::vector<std::string> variants; // e.g. "nsao/median"
    Matrix mean_ev1;                   // 24 x variants
};

TransformComparison transform_comparison(const ObservationGrid& grid, const DpcaConfig& cfg);

void write_mean_ev_csv(std::ostream& out, const HourlyMeanEv& table);
void write_overall_mean_ev_csv(std::ostream& out, const std::vector<double>& ev,
                               const std::vector<double>& cev);
void write_distribution_csv(std::ostream& out, const std::vector<BoxSummary>& rows,
                            int component);
void write_partition_csv(std::ostream& out, const std::vector<PartitionEv>& parts);
void write_transform_comparison_csv(std::ostream& out, const TransformComparison& cmp);

} // namespace dpca

#endif
