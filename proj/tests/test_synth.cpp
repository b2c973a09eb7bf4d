#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dpca/engine.hpp"
#include "dpca/error.hpp"
#include "dpca/impute.hpp"
#include "dpca/stats.hpp"
#include "dpca/synth.hpp"

using dpca::Panel;
using dpca::SynthSpec;

namespace {

Panel nsao_panel(const dpca::ObservationGrid& grid, int hour) {
    return dpca::to_nsao(dpca::to_lsao(dpca::build_sao(grid, hour, dpca::Aggregator::Median)));
}

double abs_cos(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0, na = 0, nb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return std::abs(dot) / std::sqrt(na * nb);
}

} // namespace

TEST_CASE("same seed reproduces the grid bit for bit") {
    SynthSpec spec;
    spec.days = 50;
    spec.sites = 3;
    spec.missing_rate = 0.03;
    spec.seed = 42;
    const auto a = dpca::generate(spec);
    const auto b = dpca::generate(spec);
    REQUIRE(a.grid.values.size() == b.grid.values.size());
    for (size_t i = 0; i < a.grid.values.size(); ++i) {
        const double x = a.grid.values[i];
        const double y = b.grid.values[i];
        CHECK((std::isnan(x) ? std::isnan(y) : x == y));
    }

    SynthSpec other = spec;
    other.seed = 43;
    const auto c = dpca::generate(other);
    long diff = 0;
    for (size_t i = 0; i < a.grid.values.size(); ++i) {
        diff += !std::isnan(a.grid.values[i]) && !std::isnan(c.grid.values[i]) &&
                a.grid.values[i] != c.grid.values[i];
    }
    CHECK(diff > 0);
}

TEST_CASE("factor_share 1 with no noise is exactly low rank") {
    SynthSpec spec;
    spec.days = 80;
    spec.sites = 2;
    spec.factors = 2;
    spec.factor_share = 1.0;
    spec.site_noise_sd = 0.0;
    spec.seed = 7;
    const auto out = dpca::generate(spec);
    const Panel panel = nsao_panel(out.grid, 7);
    dpca::DpcaConfig cfg;
    cfg.window = 45;
    const auto results = dpca::run_dpca(panel, cfg);
    REQUIRE(!results.empty());
    for (const auto& r : results) {
        REQUIRE(!r.degenerate);
        CHECK(r.core.ev[0] + r.core.ev[1] >= 1.0 - 1e-6);
    }
}

TEST_CASE("planted two-factor share lands in the frozen interval") {
    double total = 0.0;
    long windows = 0;
    double cos_total = 0.0;
    for (uint64_t seed = 1; seed <= 3; ++seed) {
        SynthSpec spec;
        spec.days = 400;
        spec.factors = 2;
        spec.factor_share = 0.8;
        spec.seed = seed;
        const auto out = dpca::generate(spec);
        const Panel panel = nsao_panel(out.grid, 7);
        dpca::DpcaConfig cfg;
        cfg.window = 45;
        const auto results = dpca::run_dpca(panel, cfg);
        for (const auto& r : results) {
            REQUIRE(!r.degenerate);
            total += r.core.ev[0] + r.core.ev[1];
            cos_total += abs_cos(r.core.loadings.column(0), out.planted_first);
            ++windows;
        }
    }
    const double mean_share = total / static_cast<double>(windows);
    CHECK(mean_share >= 0.72);
    CHECK(mean_share <= 0.88);
    CHECK(cos_total / static_cast<double>(windows) >= 0.9);
}

TEST_CASE("seasonal envelope shows up in the ev1 series") {
    SynthSpec spec;
    spec.days = 500;
    spec.factors = 2;
    spec.factor_share = 0.8;
    spec.seasonal_amplitude = 0.6;
    spec.seed = 11;
    const auto out = dpca::generate(spec);
    const Panel panel = nsao_panel(out.grid, 7);
    dpca::DpcaConfig cfg;
    cfg.window = 45;
    const auto results = dpca::run_dpca(panel, cfg);

    std::vector<double> ev1, env;
    for (const auto& r : results) {
        REQUIRE(!r.degenerate);
        ev1.push_back(r.core.ev[0]);
        env.push_back(out.envelope[r.day_index]);
    }
    CHECK(dpca::pearson(ev1, env) > 0.5);
}

TEST_CASE("missingness injection tracks the requested rate") {
    SynthSpec spec;
    spec.days = 300;
    spec.sites = 3;
    spec.missing_rate = 0.05;
    spec.seed = 13;
    const auto out = dpca::generate(spec);
    const double total = static_cast<double>(out.grid.values.size());
    const double missing = total - static_cast<double>(out.grid.present_count());
    CHECK(missing / total > 0.02);
    CHECK(missing / total < 0.10);
}

TEST_CASE("generated csv feeds the whole ingest pipeline") {
    SynthSpec spec;
    spec.days = 60;
    spec.sites = 2;
    spec.missing_rate = 0.02;
    spec.seed = 17;
    const auto out = dpca::generate(spec);

    std::ostringstream csv;
    dpca::write_observations(csv, out.grid);
    std::istringstream in(csv.str());
    const auto grid = dpca::parse_observations(in, {}, out.grid.pollutants);
    CHECK(grid.days == out.grid.days);
    CHECK(grid.present_count() == out.grid.present_count());

    const auto [imputed, count] = dpca::impute_short_gaps(grid, 4);
    CHECK(count > 0);
    const Panel panel = nsao_panel(imputed, 7);
    CHECK(panel.rows() == 59);
}

TEST_CASE("NSAO medians sit near zero for every pollutant") {
    SynthSpec spec;
    spec.days = 600;
    spec.seed = 23;
    const auto out = dpca::generate(spec);
    const Panel panel = nsao_panel(out.grid, 7);
    for (int p = 0; p < panel.values.cols(); ++p) {
        CHECK(std::abs(dpca::median(panel.values.column(p))) <= 0.02);
    }
}

TEST_CASE("planted directions are orthonormal with equal per-variable mass") {
    SynthSpec spec;
    spec.factors = 2;
    const auto out = dpca::generate(spec);
    const auto& u = out.directions;
    REQUIRE(u.cols() == 3); // flat + one cos/sin pair
    for (int a = 0; a < u.cols(); ++a) {
        for (int b = 0; b < u.cols(); ++b) {
            double dot = 0.0;
            for (int i = 0; i < u.rows(); ++i) dot += u(i, a) * u(i, b);
            CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) < 1e-12);
        }
    }
    // Equal diagonal of sum_j mu_j u_j u_j'.
    std::vector<double> diag(u.rows(), 0.0);
    for (int i = 0; i < u.rows(); ++i) {
        for (int j = 0; j < u.cols(); ++j) diag[i] += out.strengths[j] * u(i, j) * u(i, j);
    }
    for (int i = 1; i < u.rows(); ++i) CHECK(std::abs(diag[i] - diag[0]) < 1e-12);

    // Leading-2 eigenvalue share of the level covariance is the target.
    const double lead = out.strengths[0] + out.strengths[1] + 2.0 * out.noise_variance;
    double trace = out.noise_variance * u.rows();
    for (double s : out.strengths) trace += s;
    CHECK(lead / trace == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("invalid specs are configuration errors") {
    SynthSpec spec;
    spec.factors = 5;
    CHECK_THROWS_AS(dpca::generate(spec), dpca::ConfigError);
    spec = SynthSpec{};
    spec.factor_share = 0.2; // below r/p
    CHECK_THROWS_AS(dpca::generate(spec), dpca::ConfigError);
    spec = SynthSpec{};
    spec.missing_rate = 1.0;
    CHECK_THROWS_AS(dpca::generate(spec), dpca::ConfigError);
}
