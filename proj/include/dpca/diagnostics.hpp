#ifndef DPCA_DIAGNOSTICS_HPP
#define DPCA_DIAGNOSTICS_HPP

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpca/linalg.hpp"
#include "dpca/panel.hpp"

namespace dpca {

enum class DiagnosticMetric { HzPvalue, OutlierProp, PearsonR };

std::string metric_label(DiagnosticMetric metric, const std::string& pair_label = "");

// One rolling diagnostic at a fixed hour, emitted at trailing window ends.
// NaN values carry flag 1 (degenerate window).
struct DiagnosticsSeries {
    int hour = 0;
    int window = 0;
    DiagnosticMetric metric = DiagnosticMetric::HzPvalue;
    std::string pair_label;      // "O3:CO" for correlations, empty otherwise
    CivilDate grid_start{};
    std::vector<int> day_index;  // absolute grid day of each window end
    std::vector<double> values;
    std::vector<unsigned char> flags;
};

struct HzResult {
    double statistic = 0.0;
    double pvalue = 0.0;
    bool singular = false;
};

// Henze-Zirkler multivariate normality test of an n x p sample, smoothing
// parameter beta = 2^(-1/2) * ((2p+1) n / 4)^(1/(p+4)), p-value from the
// lognormal approximation. Singular sample covariance sets `singular`.
HzResult henze_zirkler(const Matrix& x);

struct RobustDistances {
    std::vector<double> center;
    SymMatrix scatter;
    std::vector<double> d2; // squared robust Mahalanobis distances
    bool singular = false;
};

// Deterministic reweighting estimator: start from the coordinatewise median
// and a scaled-MAD diagonal scatter, then alternate hard rejection at the
// chi-square(p, 0.975) quantile with re-estimation on the kept points until
// the kept set stabilizes (at most 50 rounds).
RobustDistances robust_mahalanobis_sq(const Matrix& x);

// Adjusted cutoff for outlier flagging. With G the chi-square(p) CDF and
// F_n the empirical CDF of the squared distances, the tail excess is
//   a_n = max over d2_i >= chi2(p, 0.975) of (G(d2_i) - F_n(d2_i))+,
// and the cutoff is the chi-square(p) quantile at level max(alpha, 1 - a_n).
// Level >= 1 means no point is flagged.
double adjusted_outlier_cutoff(const std::vector<double>& d2, int p, double alpha);

DiagnosticsSeries rolling_hz_test(const Panel& panel, int window);
DiagnosticsSeries rolling_outliers(const Panel& panel, int window, double alpha = 0.75);
DiagnosticsSeries rolling_pearson(const Panel& panel, int window, std::pair<int, int> pair);

// CSV `hour,day_index,date,metric,value,flag`.
void write_diagnostics_csv(std::ostream& out, std::span<const DiagnosticsSeries> series);

} // namespace dpca

#endif
