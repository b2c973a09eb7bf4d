#ifndef DPCA_SYNTH_HPP
#define DPCA_SYNTH_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dpca/grid.hpp"
#include "dpca/linalg.hpp"

namespace dpca {

// Deterministic normal sampler: the (bit-exact, standardized) mt19937_64
// engine plus a hand-rolled Box-Muller cosine branch, two uniforms per draw
// and no cached spare. std:: distributions are avoided because their byte
// streams vary across standard libraries.
class SynthRng {
public:
    explicit SynthRng(uint64_t seed) : engine_(seed) {}
    double uniform();                 // (0, 1)
    double normal();                  // standard normal
    uint64_t uniform_int(uint64_t n); // 0..n-1
    static std::string name() { return "mt19937_64/box-muller"; }

private:
    std::mt19937_64 engine_;
};

struct SynthSpec {
    int days = 400;
    int pollutants = 5;
    int sites = 4;
    int factors = 2;              // r < pollutants
    double factor_share = 0.8;    // leading-r eigenvalue share of the latent
                                  // daily-increment covariance, in (r/p, 1]
    double seasonal_amplitude = 0.0; // envelope amplitude a in [0, 1)
    double site_noise_sd = 0.1;   // lognormal site noise sigma
    double missing_rate = 0.0;    // target missing fraction, [0, 1)
    int gap_len_max = 6;          // gap lengths drawn uniformly from 1..max
    uint64_t seed = 1;
    CivilDate start_date{2009, 1, 1};

    void validate() const;
};

struct SynthOutput {
    ObservationGrid grid;
    // Population structure of the latent log-concentration levels:
    // orthonormal factor directions (columns, phase of hour 0) and their
    // variances; direction 0 is the flat vector and the leading one.
    Matrix directions;
    std::vector<double> strengths;
    double noise_variance = 0.0;
    std::vector<double> planted_first; // convenience copy of direction 0
    std::vector<double> envelope;      // g(d), per day
    std::string generator;
};

// Latent log-levels are iid across days: seasonal mean + envelope-modulated
// factors + isotropic noise, built so the factor directions share a flat
// per-variable variance and the leading-r eigenvalue share of the level (and
// hence day-difference) covariance equals factor_share exactly. Sites
// observe exp(latent) with multiplicative lognormal noise; gaps are injected
// last. Emits the same grid the CSV reader produces.
SynthOutput generate(const SynthSpec& spec);

} // namespace dpca

#endif
