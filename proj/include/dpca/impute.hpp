#ifndef DPCA_IMPUTE_HPP
#define DPCA_IMPUTE_HPP

#include <span>
#include <utility>
#include <vector>

#include "dpca/grid.hpp"

namespace dpca {

// Monotone cubic Hermite interpolant through (x, y) knots, x strictly
// increasing. Tangents use Fritsch-Carlson limiting: zero at local extrema,
// weighted harmonic mean of adjacent secants elsewhere, one-sided secants at
// the ends. The interpolant never overshoots the knot values between two
// adjacent knots.
class MonotoneHermite {
public:
    MonotoneHermite(std::vector<double> x, std::vector<double> y);

    double operator()(double t) const;
    const std::vector<double>& tangents() const { return m_; }

private:
    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> m_;
};

// Fill missing (NaN) runs of length <= short_gap_max that have observed
// values on both sides, fitting the spline over up to `context` consecutive
// observed points per side (as of the original series). Imputed values are
// kept within the closed range of the two bracketing observations. Returns
// the number of cells filled.
long impute_series(std::span<double> series, int short_gap_max, int context = 4);

// Grid-wide short-gap imputation over every (site, pollutant) series.
std::pair<ObservationGrid, long> impute_short_gaps(const ObservationGrid& grid,
                                                   int short_gap_max);

} // namespace dpca

#endif
