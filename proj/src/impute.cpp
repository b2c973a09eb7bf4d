#include "dpca/impute.hpp"

#include <algorithm>
#include <cmath>

#include "dpca/error.hpp"

namespace dpca {

MonotoneHermite::MonotoneHermite(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw DataError("monotone hermite needs at least 2 knots");
    for (size_t i = 1; i < n; ++i) {
        if (!(x_[i] > x_[i - 1])) throw DataError("monotone hermite knots must be increasing");
    }

    std::vector<double> h(n - 1), d(n - 1);
    for (size_t i = 0; i + 1 < n; ++i) {
        h[i] = x_[i + 1] - x_[i];
        d[i] = (y_[i + 1] - y_[i]) / h[i];
    }

    m_.assign(n, 0.0);
    m_[0] = d[0];
    m_[n - 1] = d[n - 2];
    for (size_t i = 1; i + 1 < n; ++i) {
        if (d[i - 1] == 0.0 || d[i] == 0.0 || (d[i - 1] > 0.0) != (d[i] > 0.0)) {
            m_[i] = 0.0; // local extremum or flat segment
        } else {
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            m_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
}

double MonotoneHermite::operator()(double t) const {
    const size_t n = x_.size();
    size_t k;
    if (t <= x_.front()) {
        k = 0;
    } else if (t >= x_.back()) {
        k = n - 2;
    } else {
        k = static_cast<size_t>(std::upper_bound(x_.begin(), x_.end(), t) - x_.begin()) - 1;
    }
    const double h = x_[k + 1] - x_[k];
    const double s = (t - x_[k]) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    const double h10 = s3 - 2.0 * s2 + s;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    const double h11 = s3 - s2;
    return h00 * y_[k] + h10 * h * m_[k] + h01 * y_[k + 1] + h11 * h * m_[k + 1];
}

long impute_series(std::span<double> series, int short_gap_max, int context) {
    const long n = static_cast<long>(series.size());
    // Contexts come from the original series so neighbouring gaps are filled
    // independently of each other.
    const std::vector<double> orig(series.begin(), series.end());

    long filled = 0;
    long i = 0;
    while (i < n) {
        if (!std::isnan(orig[i])) {
            ++i;
            continue;
        }
        long j = i;
        while (j < n && std::isnan(orig[j])) ++j;
        const long run = j - i;
        const bool bracketed = i > 0 && j < n;
        if (!bracketed || run > short_gap_max) {
            i = j;
            continue;
        }

        std::vector<double> xs, ys;
        long left = i - 1;
        int taken = 0;
        while (left >= 0 && taken < context && !std::isnan(orig[left])) {
            --left;
            ++taken;
        }
        for (long k = left + 1; k < i; ++k) {
            xs.push_back(static_cast<double>(k));
            ys.push_back(orig[k]);
        }
        long right = j;
        taken = 0;
        while (right < n && taken < context && !std::isnan(orig[right])) {
            ++right;
            ++taken;
        }
        for (long k = j; k < right; ++k) {
            xs.push_back(static_cast<double>(k));
            ys.push_back(orig[k]);
        }

        const MonotoneHermite spline(std::move(xs), std::move(ys));
        const double lo = std::min(orig[i - 1], orig[j]);
        const double hi = std::max(orig[i - 1], orig[j]);
        for (long k = i; k < j; ++k) {
            series[k] = std::clamp(spline(static_cast<double>(k)), lo, hi);
            ++filled;
        }
        i = j;
    }
    return filled;
}

std::pair<ObservationGrid, long> impute_short_gaps(const ObservationGrid& grid,
                                                   int short_gap_max) {
    if (short_gap_max < 1) throw ConfigError("short_gap_max must be >= 1");
    ObservationGrid out = grid;
    long total = 0;
    for (int s = 0; s < out.site_count(); ++s) {
        for (int p = 0; p < out.pollutant_count(); ++p) {
            total += impute_series(out.series(s, p), short_gap_max);
        }
    }
    return {std::move(out), total};
}

} // namespace dpca
