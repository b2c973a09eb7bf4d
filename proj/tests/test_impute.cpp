#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "dpca/impute.hpp"
#include "oracles.hpp"

namespace {

constexpr double kNA = std::numeric_limits<double>::quiet_NaN();

std::vector<double> run(std::vector<double> series, int max_gap = 4) {
    dpca::impute_series(series, max_gap);
    return series;
}

bool is_missing(double v) { return std::isnan(v); }

} // namespace

TEST_CASE("flat endpoints force a flat fill") {
    const auto out = run({10.0, kNA, 10.0});
    CHECK(out[1] == 10.0);
}

TEST_CASE("runs longer than the limit stay missing") {
    const auto out = run({0.0, kNA, kNA, kNA, kNA, kNA, 0.0});
    for (int i = 1; i <= 5; ++i) CHECK(is_missing(out[i]));
}

TEST_CASE("boundary runs stay missing") {
    const auto out = run({kNA, kNA, 5.0, 6.0, kNA});
    CHECK(is_missing(out[0]));
    CHECK(is_missing(out[1]));
    CHECK(is_missing(out[4]));
}

TEST_CASE("monotone context: values stay inside the bracket and ordered") {
    const auto out = run({2.0, 4.0, kNA, kNA, 8.0, 10.0});
    CHECK(out[2] > 4.0);
    CHECK(out[3] < 8.0);
    CHECK(out[2] <= out[3]);

    // Same knots through the reference interpolation.
    const auto ref = oracles::pchip_reference({0, 1, 4, 5}, {2, 4, 8, 10}, {2.0, 3.0});
    CHECK(std::abs(out[2] - ref[0]) < 1e-9);
    CHECK(std::abs(out[3] - ref[1]) < 1e-9);
}

TEST_CASE("imputation matches the reference interpolation on scattered gaps") {
    oracles::TestRng rng(101);
    for (int rep = 0; rep < 200; ++rep) {
        // 12 observed points, a gap of 1..4 in the middle.
        std::vector<double> xs, ys;
        double x = 0.0;
        for (int i = 0; i < 12; ++i) {
            xs.push_back(x);
            ys.push_back(rng.uniform(0.0, 50.0));
            x += 1.0;
        }
        const int gap = 1 + static_cast<int>(rng.uniform_int(4));
        const int start = 2 + static_cast<int>(rng.uniform_int(5));

        std::vector<double> series;
        std::vector<double> gap_x;
        std::vector<double> knot_x, knot_y;
        for (int i = 0, xi = 0; i < 12; ++i, ++xi) {
            series.push_back(ys[i]);
            if (i + 1 == start) {
                for (int g = 0; g < gap; ++g) {
                    series.push_back(kNA);
                    gap_x.push_back(static_cast<double>(++xi));
                }
            }
        }
        // Knots the library should see: up to 4 observed points per side.
        for (int i = std::max(0, start - 4); i < start; ++i) {
            knot_x.push_back(static_cast<double>(i));
            knot_y.push_back(ys[i]);
        }
        for (int i = start; i < std::min(12, start + 4); ++i) {
            knot_x.push_back(static_cast<double>(i + gap));
            knot_y.push_back(ys[i]);
        }

        const auto got = run(series);
        const auto ref = oracles::pchip_reference(knot_x, knot_y, gap_x);
        const double lo = std::min(ys[start - 1], ys[start]);
        const double hi = std::max(ys[start - 1], ys[start]);
        for (size_t g = 0; g < gap_x.size(); ++g) {
            const double v = got[static_cast<size_t>(gap_x[g])];
            const double clamped_ref = std::clamp(ref[g], lo, hi);
            CHECK(std::abs(v - clamped_ref) < 1e-9);
        }
    }
}

TEST_CASE("boundedness and monotonicity over random gap fixtures") {
    oracles::TestRng rng(103);
    long checked = 0;
    for (int rep = 0; rep < 2000; ++rep) {
        const int n = 10 + static_cast<int>(rng.uniform_int(20));
        std::vector<double> series(n);
        const bool monotone = rng.uniform() < 0.4;
        double level = rng.uniform(0.0, 20.0);
        for (int i = 0; i < n; ++i) {
            level = monotone ? level + rng.uniform(0.0, 3.0)
                             : std::max(0.0, level + rng.uniform(-3.0, 3.0));
            series[i] = level;
        }
        const std::vector<double> original = series;

        const int gap = 1 + static_cast<int>(rng.uniform_int(4));
        const int start = 1 + static_cast<int>(rng.uniform_int(n - gap - 2));
        for (int g = 0; g < gap; ++g) series[start + g] = kNA;

        std::vector<double> work = series;
        const long count = dpca::impute_series(work, 4);
        CHECK(count == gap);

        const double left = series[start - 1];
        const double right = series[start + gap];
        const double lo = std::min(left, right);
        const double hi = std::max(left, right);
        for (int g = 0; g < gap; ++g) {
            const double v = work[start + g];
            CHECK(!is_missing(v));
            CHECK(v >= lo);
            CHECK(v <= hi);
            CHECK(v >= 0.0); // non-negative inputs stay non-negative
            ++checked;
        }
        if (monotone) {
            for (int g = 0; g + 1 < gap; ++g) CHECK(work[start + g] <= work[start + g + 1]);
            CHECK(left <= work[start]);
            CHECK(work[start + gap - 1] <= right);
        }

        // Observed cells are untouched.
        for (int i = 0; i < n; ++i) {
            if (!is_missing(series[i])) CHECK(work[i] == series[i]);
        }
    }
    CHECK(checked > 2000);
}

TEST_CASE("adjacent gaps split by one point are filled independently") {
    // Second gap's context must come from the original series, not from the
    // first gap's fill.
    std::vector<double> series{1.0, 5.0, kNA, 7.0, kNA, 9.0, 13.0};
    std::vector<double> work = series;
    dpca::impute_series(work, 4);
    CHECK(!is_missing(work[2]));
    CHECK(!is_missing(work[4]));
    CHECK(work[2] >= 5.0);
    CHECK(work[2] <= 7.0);
    CHECK(work[4] >= 7.0);
    CHECK(work[4] <= 9.0);

    // A series where the first gap never existed gives the same fill for the
    // second gap: its context stops at the originally-missing cell either way.
    std::vector<double> no_first{7.0, kNA, 9.0, 13.0};
    dpca::impute_series(no_first, 4);
    CHECK(std::abs(work[4] - no_first[1]) < 1e-12);
}

TEST_CASE("count_imputed equals cells changed from missing to present") {
    std::vector<double> series{1.0, kNA, 3.0, kNA, kNA, kNA, kNA, kNA, 9.0, kNA};
    std::vector<double> work = series;
    const long count = dpca::impute_series(work, 4);
    long changed = 0;
    for (size_t i = 0; i < series.size(); ++i) {
        changed += is_missing(series[i]) && !is_missing(work[i]);
    }
    CHECK(count == changed);
    CHECK(count == 1); // the 5-run is too long, the trailing run unbracketed
}

TEST_CASE("grid-level imputation touches every series") {
    std::string csv = "timestamp,site_id,pollutant,value,qc_code\n";
    for (int h = 0; h < 24; ++h) {
        char buf[96];
        const bool missing = h == 5 || h == 6;
        std::snprintf(buf, sizeof(buf), "2009-01-01T%02d:00:00-06:00,C1,O3,%s,\n", h,
                      missing ? "" : std::to_string(h).c_str());
        csv += buf;
    }
    std::istringstream in(csv);
    const auto grid = dpca::parse_observations(in, {}, {"O3"});
    const auto [imputed, count] = dpca::impute_short_gaps(grid, 4);
    CHECK(count == 2);
    CHECK(imputed.present(5, 0, 0, 0));
    CHECK(imputed.present(6, 0, 0, 0));
    CHECK(grid.present_count() + 2 == imputed.present_count());
}
