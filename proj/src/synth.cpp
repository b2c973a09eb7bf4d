#include "dpca/synth.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "dpca/error.hpp"

namespace dpca {

double SynthRng::uniform() {
    // 53-bit mantissa, shifted into the open interval.
    return (static_cast<double>(engine_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

double SynthRng::normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

uint64_t SynthRng::uniform_int(uint64_t n) {
    return n == 0 ? 0 : engine_() % n;
}

void SynthSpec::validate() const {
    if (days < 2) throw ConfigError("synth: days must be >= 2");
    if (pollutants < 2) throw ConfigError("synth: pollutants must be >= 2");
    if (sites < 1) throw ConfigError("synth: sites must be >= 1");
    if (factors < 1 || factors >= pollutants) {
        throw ConfigError("synth: factors must lie in 1..pollutants-1");
    }
    const double min_share = static_cast<double>(factors) / pollutants;
    if (!(factor_share > min_share && factor_share <= 1.0)) {
        throw ConfigError("synth: factor_share must lie in (" + std::to_string(min_share) +
                          ", 1]");
    }
    if (seasonal_amplitude < 0.0 || seasonal_amplitude >= 1.0) {
        throw ConfigError("synth: seasonal_amplitude must lie in [0, 1)");
    }
    if (site_noise_sd < 0.0) throw ConfigError("synth: site_noise_sd must be >= 0");
    if (missing_rate < 0.0 || missing_rate >= 1.0) {
        throw ConfigError("synth: missing_rate must lie in [0, 1)");
    }
    if (gap_len_max < 1) throw ConfigError("synth: gap_len_max must be >= 1");
    const int pairs_needed = factors / 2; // flat direction covers one factor
    if (pairs_needed > (pollutants - 1) / 2) {
        throw ConfigError("synth: too many factors for this pollutant count");
    }
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Orthonormal factor directions with equal per-variable mass: the flat
// vector plus cosine/sine harmonic pairs (equal strength within a pair keeps
// the diagonal of the factor covariance flat, so per-window standardization
// does not tilt the planted eigenstructure).
Matrix factor_directions(int p, int pairs, double phase) {
    const int m = 1 + 2 * pairs;
    Matrix u(p, m);
    for (int i = 0; i < p; ++i) u(i, 0) = 1.0 / std::sqrt(static_cast<double>(p));
    for (int j = 1; j <= pairs; ++j) {
        const double norm = std::sqrt(2.0 / p);
        for (int i = 0; i < p; ++i) {
            const double angle = kTwoPi * j * i / p + phase;
            u(i, 2 * j - 1) = norm * std::cos(angle);
            u(i, 2 * j) = norm * std::sin(angle);
        }
    }
    return u;
}

struct FactorPlan {
    int pairs = 0;
    std::vector<double> strengths; // per direction, flat first
    double noise_variance = 0.0;
};

// Solve strengths so the leading-r eigenvalue share of
// diag-equal covariance sum_j mu_j u_j u_j' + sigma^2 I equals `share`.
// Strengths decay geometrically across pairs (flat 1, pair j beta^j); beta
// shrinks until the share is feasible with sigma^2 >= 0.
FactorPlan solve_factor_plan(const SynthSpec& spec) {
    const int p = spec.pollutants;
    const int r = spec.factors;
    FactorPlan plan;
    // Flat direction plus ceil((r-1)/2) pairs: r or r+1 directions in total.
    plan.pairs = r / 2;

    double beta = r > 1 ? 0.25 : 0.0;
    for (;;) {
        std::vector<double> mu{1.0};
        for (int j = 1; j <= plan.pairs; ++j) {
            const double s = std::pow(beta, j);
            mu.push_back(s);
            mu.push_back(s);
        }
        double lead = 0.0, total = 0.0;
        for (size_t j = 0; j < mu.size(); ++j) {
            total += mu[j];
            if (static_cast<int>(j) < r) lead += mu[j];
        }
        const double gamma = (lead - spec.factor_share * total) /
                             (spec.factor_share * p - r);
        if (gamma >= 0.0 || beta < 1e-9) {
            // Scale so each variable's latent level variance is 0.0324
            // (daily log sd 0.18).
            const double per_var = total / p + std::max(gamma, 0.0);
            const double lambda1 = 0.0324 / per_var;
            for (double& v : mu) v *= lambda1;
            plan.strengths = std::move(mu);
            plan.noise_variance = std::max(gamma, 0.0) * lambda1;
            return plan;
        }
        beta *= 0.5;
    }
}

} // namespace

SynthOutput generate(const SynthSpec& spec) {
    spec.validate();
    const int p = spec.pollutants;

    const FactorPlan plan = solve_factor_plan(spec);
    const int m = 1 + 2 * plan.pairs;
    const double sigma = std::sqrt(plan.noise_variance);

    SynthOutput out;
    out.generator = SynthRng::name();
    out.directions = factor_directions(p, plan.pairs, 0.0);
    out.strengths = plan.strengths;
    out.noise_variance = plan.noise_variance;
    out.planted_first = out.directions.column(0);

    ObservationGrid& grid = out.grid;
    grid.days = spec.days;
    grid.start_date = spec.start_date;
    grid.utc_offset_minutes = -360;
    for (int s = 0; s < spec.sites; ++s) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "S%03d", s + 1);
        grid.sites.push_back(buf);
    }
    const char* kNames[] = {"O3", "CO", "NO2", "SO2", "PM2.5"};
    for (int j = 0; j < p; ++j) {
        grid.pollutants.push_back(j < 5 ? kNames[j] : "P" + std::to_string(j + 1));
        grid.units.push_back(grid.pollutants.back().rfind("PM", 0) == 0 ? "ug/m3" : "ppb");
    }
    grid.values.assign(static_cast<size_t>(spec.sites) * p * spec.days * 24, 0.0);

    out.envelope.resize(spec.days);
    for (int d = 0; d < spec.days; ++d) {
        out.envelope[d] = 1.0 + spec.seasonal_amplitude * std::sin(kTwoPi * d / 365.0);
    }

    // Per-hour direction phases; the flat leading direction is shared.
    std::vector<Matrix> dir_by_hour;
    dir_by_hour.reserve(24);
    for (int h = 0; h < 24; ++h) {
        dir_by_hour.push_back(factor_directions(p, plan.pairs, kTwoPi * h / 24.0));
    }
    std::vector<double> sqrt_mu(plan.strengths.size());
    for (size_t j = 0; j < plan.strengths.size(); ++j) sqrt_mu[j] = std::sqrt(plan.strengths[j]);

    SynthRng rng(spec.seed);
    std::vector<double> f(m), latent(p);
    for (int d = 0; d < spec.days; ++d) {
        const double g = out.envelope[d];
        const double season = 0.3 * spec.seasonal_amplitude * std::sin(kTwoPi * d / 365.0 +
                                                                       std::numbers::pi / 3.0);
        for (int h = 0; h < 24; ++h) {
            for (int j = 0; j < m; ++j) f[j] = rng.normal();
            const Matrix& u = dir_by_hour[h];
            for (int j = 0; j < p; ++j) {
                double factor_part = 0.0;
                for (int k = 0; k < m; ++k) factor_part += u(j, k) * sqrt_mu[k] * f[k];
                const double base = std::log(300.0) + 0.15 * std::sin(kTwoPi * h / 24.0) + 0.1 * j;
                latent[j] = base + season + g * factor_part + sigma * rng.normal();
            }
            for (int s = 0; s < spec.sites; ++s) {
                for (int j = 0; j < p; ++j) {
                    const double site_noise =
                        spec.site_noise_sd > 0.0 ? spec.site_noise_sd * rng.normal() : 0.0;
                    grid.set_cell(h, d, s, j, std::exp(latent[j] + site_noise));
                }
            }
        }
    }

    if (spec.missing_rate > 0.0) {
        const double mean_gap = 0.5 * (1.0 + spec.gap_len_max);
        const double start_prob = std::min(1.0, spec.missing_rate / mean_gap);
        for (int s = 0; s < spec.sites; ++s) {
            for (int j = 0; j < p; ++j) {
                auto series = grid.series(s, j);
                size_t t = 0;
                while (t < series.size()) {
                    if (rng.uniform() < start_prob) {
                        const uint64_t len =
                            1 + rng.uniform_int(static_cast<uint64_t>(spec.gap_len_max));
                        for (uint64_t k = 0; k < len && t < series.size(); ++k, ++t) {
                            series[t] = std::numeric_limits<double>::quiet_NaN();
                        }
                    } else {
                        ++t;
                    }
                }
            }
        }
    }
    return out;
}

} // namespace dpca
