#ifndef DPCA_PANEL_HPP
#define DPCA_PANEL_HPP

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "dpca/civil_time.hpp"
#include "dpca/grid.hpp"
#include "dpca/linalg.hpp"

namespace dpca {

enum class Stage { SAO, LSAO, NSAO };
enum class Aggregator { Median, Mean };

std::string to_string(Stage s);
std::string to_string(Aggregator a);
Stage stage_from_string(const std::string& s);
Aggregator aggregator_from_string(const std::string& s);

// One hour's day x pollutant matrix, at some stage of the normalization
// ladder SAO -> LSAO -> NSAO. Row r corresponds to grid day first_day + r.
struct Panel {
    int hour = 0;
    Stage stage = Stage::SAO;
    Aggregator aggregator = Aggregator::Median;
    std::vector<std::string> pollutants;
    int first_day = 0;
    CivilDate grid_start{};
    Matrix values; // days x pollutants

    std::vector<std::pair<int, int>> flagged_cells; // (row, col) filled by interpolation

    int rows() const { return values.rows(); }
    CivilDate date_of_row(int r) const { return add_days(grid_start, first_day + r); }
};

// Collapse the site dimension at one hour. Cells where every site is missing
// are filled by linear interpolation along days (nearest value at the panel
// edges) and recorded in flagged_cells.
Panel build_sao(const ObservationGrid& grid, int hour, Aggregator aggregator);

// Elementwise log(1 + x). Requires a complete non-negative SAO panel.
Panel to_lsao(const Panel& sao);

// Day-over-day difference; drops the first day, so the output has rows-1
// rows and first_day advances by one.
Panel to_nsao(const Panel& lsao);

// CSV `day_index,date,<pollutant...>` plus a JSON sidecar carrying hour,
// stage, aggregator, grid start and flagged cells.
void write_panel_csv(std::ostream& out, const Panel& panel);
void write_panel_meta(std::ostream& out, const Panel& panel);
Panel read_panel(std::istream& csv, std::istream& meta);

} // namespace dpca

#endif
