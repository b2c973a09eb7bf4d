#include "dpca/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>

#include "dpca/csv.hpp"
#include "dpca/error.hpp"
#include "dpca/stats.hpp"

namespace dpca {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Inverse of a symmetric PSD matrix through its eigendecomposition; nullopt
// when the smallest eigenvalue collapses relative to the largest.
std::optional<SymMatrix> inverse_spd(const SymMatrix& s) {
    const EigenResult eg = eigen_sym(s);
    const double max_ev = eg.values.front();
    if (!(max_ev > 0.0) || eg.values.back() <= 1e-12 * max_ev) return std::nullopt;
    const int p = s.dim();
    SymMatrix inv(p);
    for (int i = 0; i < p; ++i) {
        for (int j = i; j < p; ++j) {
            double acc = 0.0;
            for (int k = 0; k < p; ++k) {
                acc += eg.vectors(i, k) * eg.vectors(j, k) / eg.values[k];
            }
            inv.set(i, j, acc);
        }
    }
    return inv;
}

std::vector<double> column_means(const Matrix& x) {
    std::vector<double> m(x.cols(), 0.0);
    for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < x.cols(); ++j) m[j] += x(i, j);
    for (double& v : m) v /= x.rows();
    return m;
}

double quadratic_form(const SymMatrix& a, std::span<const double> v) {
    double acc = 0.0;
    for (int i = 0; i < a.dim(); ++i) {
        for (int j = 0; j < a.dim(); ++j) acc += v[i] * a(i, j) * v[j];
    }
    return acc;
}

Matrix window_rows(const Matrix& m, int first, int count) {
    Matrix w(count, m.cols());
    for (int i = 0; i < count; ++i)
        for (int j = 0; j < m.cols(); ++j) w(i, j) = m(first + i, j);
    return w;
}

} // namespace

std::string metric_label(DiagnosticMetric metric, const std::string& pair_label) {
    switch (metric) {
        case DiagnosticMetric::HzPvalue: return "hz_pvalue";
        case DiagnosticMetric::OutlierProp: return "outlier_prop";
        case DiagnosticMetric::PearsonR: return "pearson_r(" + pair_label + ")";
    }
    return "?";
}

HzResult henze_zirkler(const Matrix& x) {
    const int n = x.rows();
    const int p = x.cols();
    if (n < p + 2) throw DataError("henze_zirkler: sample too small");

    HzResult res;

    // MLE covariance (divisor n), per the original test definition.
    SymMatrix s = covariance(x, false);
    for (int i = 0; i < p; ++i)
        for (int j = i; j < p; ++j) s.set(i, j, s(i, j) * (n - 1) / static_cast<double>(n));

    const auto inv = inverse_spd(s);
    if (!inv) {
        res.singular = true;
        res.pvalue = kNaN;
        res.statistic = kNaN;
        return res;
    }

    const std::vector<double> mu = column_means(x);
    Matrix centered(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) centered(i, j) = x(i, j) - mu[j];

    // Gram matrix G_ij = (x_i - mu)' S^-1 (x_j - mu); pair distances follow.
    Matrix half(n, p);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) {
            double acc = 0.0;
            for (int k = 0; k < p; ++k) acc += centered(i, k) * (*inv)(k, j);
            half(i, j) = acc;
        }
    }

    std::vector<double> di(n);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int k = 0; k < p; ++k) acc += half(i, k) * centered(i, k);
        di[i] = acc;
    }

    const double beta =
        (1.0 / std::sqrt(2.0)) * std::pow((2.0 * p + 1.0) * n / 4.0, 1.0 / (p + 4.0));
    const double b2 = beta * beta;

    double pair_sum = 0.0;
    for (int i = 0; i < n; ++i) {
        pair_sum += 1.0; // D_ii = 0
        for (int j = i + 1; j < n; ++j) {
            double gij = 0.0;
            for (int k = 0; k < p; ++k) gij += half(i, k) * centered(j, k);
            const double dij = di[i] + di[j] - 2.0 * gij;
            pair_sum += 2.0 * std::exp(-0.5 * b2 * dij);
        }
    }

    double mean_sum = 0.0;
    for (int i = 0; i < n; ++i) mean_sum += std::exp(-0.5 * b2 * di[i] / (1.0 + b2));

    const double stat = n * (pair_sum / (static_cast<double>(n) * n) -
                             2.0 * std::pow(1.0 + b2, -p / 2.0) * mean_sum / n +
                             std::pow(1.0 + 2.0 * b2, -p / 2.0));

    // Lognormal approximation of the null distribution.
    const double a = 1.0 + 2.0 * b2;
    const double wb = (1.0 + b2) * (1.0 + 3.0 * b2);
    const double b4 = b2 * b2;
    const double b8 = b4 * b4;
    const double mu_hz = 1.0 - std::pow(a, -p / 2.0) *
                                   (1.0 + p * b2 / a + p * (p + 2.0) * b4 / (2.0 * a * a));
    const double si2 =
        2.0 * std::pow(1.0 + 4.0 * b2, -p / 2.0) +
        2.0 * std::pow(a, -static_cast<double>(p)) *
            (1.0 + 2.0 * p * b4 / (a * a) + 3.0 * p * (p + 2.0) * b8 / (4.0 * std::pow(a, 4.0))) -
        4.0 * std::pow(wb, -p / 2.0) *
            (1.0 + 3.0 * p * b4 / (2.0 * wb) + p * (p + 2.0) * b8 / (2.0 * wb * wb));
    const double pmu = std::log(std::sqrt(mu_hz * mu_hz * mu_hz * mu_hz / (si2 + mu_hz * mu_hz)));
    const double psi = std::sqrt(std::log((si2 + mu_hz * mu_hz) / (mu_hz * mu_hz)));

    res.statistic = stat;
    res.pvalue = stat <= 0.0 ? 1.0 : 1.0 - normal_cdf((std::log(stat) - pmu) / psi);
    return res;
}

RobustDistances robust_mahalanobis_sq(const Matrix& x) {
    const int n = x.rows();
    const int p = x.cols();
    RobustDistances out;
    if (n < p + 2) throw DataError("robust_mahalanobis_sq: sample too small");

    // Initial center/scatter: coordinatewise median, scaled-MAD diagonal
    // (1.4826 makes the MAD consistent for the normal sd; zero MAD falls
    // back to the sample sd).
    std::vector<double> center(p), scale(p);
    for (int j = 0; j < p; ++j) {
        std::vector<double> col = x.column(j);
        center[j] = median(col);
        std::vector<double> dev(col.size());
        for (size_t i = 0; i < col.size(); ++i) dev[i] = std::abs(col[i] - center[j]);
        double s = 1.4826 * median(dev);
        if (s <= 0.0) s = sample_sd(col);
        if (s <= 0.0) {
            out.singular = true;
            return out;
        }
        scale[j] = s;
    }
    SymMatrix scatter(p);
    for (int j = 0; j < p; ++j) scatter.set(j, j, scale[j] * scale[j]);

    const double reject = chi2_quantile(0.975, p);
    // Hard rejection at the 0.975 quantile truncates the tail, so the
    // covariance of the kept points underestimates the true scatter by the
    // Tallis factor chi2_cdf(reject, p+2) / 0.975; dividing it back keeps
    // the distances chi-square distributed for clean data.
    const double consistency = chi2_cdf(reject, static_cast<double>(p) + 2.0) / 0.975;
    std::vector<char> kept(n, 1);
    std::vector<double> d2(n, 0.0);
    std::vector<double> diff(p);

    for (int round = 0; round < 50; ++round) {
        const auto inv = inverse_spd(scatter);
        if (!inv) {
            out.singular = true;
            return out;
        }
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < p; ++j) diff[j] = x(i, j) - center[j];
            d2[i] = quadratic_form(*inv, diff);
        }

        std::vector<char> next(n);
        int kept_count = 0;
        for (int i = 0; i < n; ++i) {
            next[i] = d2[i] <= reject;
            kept_count += next[i];
        }
        if (kept_count < p + 2) {
            out.singular = true;
            return out;
        }
        if (next == kept && round > 0) break;
        kept = std::move(next);

        for (int j = 0; j < p; ++j) {
            double s = 0.0;
            for (int i = 0; i < n; ++i)
                if (kept[i]) s += x(i, j);
            center[j] = s / kept_count;
        }
        for (int a = 0; a < p; ++a) {
            for (int b = a; b < p; ++b) {
                double s = 0.0;
                for (int i = 0; i < n; ++i) {
                    if (kept[i]) s += (x(i, a) - center[a]) * (x(i, b) - center[b]);
                }
                scatter.set(a, b, s / ((kept_count - 1) * consistency));
            }
        }
    }

    // Distances from the final re-estimated center/scatter (covers the
    // iteration-cap path, where d2 would otherwise lag one re-estimate).
    const auto inv = inverse_spd(scatter);
    if (!inv) {
        out.singular = true;
        return out;
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) diff[j] = x(i, j) - center[j];
        d2[i] = quadratic_form(*inv, diff);
    }

    out.center = std::move(center);
    out.scatter = std::move(scatter);
    out.d2 = std::move(d2);
    return out;
}

double adjusted_outlier_cutoff(const std::vector<double>& d2, int p, double alpha) {
    const double delta = chi2_quantile(0.975, p);
    std::vector<double> sorted = d2;
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());

    double tail_excess = 0.0;
    for (size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i] < delta) continue;
        const double gap = chi2_cdf(sorted[i], p) - static_cast<double>(i + 1) / n;
        tail_excess = std::max(tail_excess, gap);
    }
    // Small-sample noise floor on the tail excess: below it the empirical
    // tail is indistinguishable from chi-square noise and nothing is
    // flagged. Constant (0.24 - 0.003 p) / sqrt(n), the adjusted-quantile
    // critical value for p <= 10.
    const double p_crit = (0.24 - 0.003 * p) / std::sqrt(n);
    if (tail_excess < p_crit) return std::numeric_limits<double>::infinity();

    const double level = std::max(alpha, 1.0 - tail_excess);
    if (level >= 1.0) return std::numeric_limits<double>::infinity();
    return chi2_quantile(level, p);
}

namespace {

DiagnosticsSeries make_series(const Panel& panel, int window, DiagnosticMetric metric,
                              std::string pair_label = "") {
    DiagnosticsSeries s;
    s.hour = panel.hour;
    s.window = window;
    s.metric = metric;
    s.pair_label = std::move(pair_label);
    s.grid_start = panel.grid_start;
    return s;
}

void check_window(const Panel& panel, int window) {
    const int p = panel.values.cols();
    if (window <= p + 1) {
        throw DataError("window " + std::to_string(window) + " must exceed " +
                        std::to_string(p + 1));
    }
    if (window > panel.rows()) {
        throw DataError("window " + std::to_string(window) + " exceeds panel rows " +
                        std::to_string(panel.rows()));
    }
}

} // namespace

DiagnosticsSeries rolling_hz_test(const Panel& panel, int window) {
    check_window(panel, window);
    DiagnosticsSeries s = make_series(panel, window, DiagnosticMetric::HzPvalue);
    for (int end = window - 1; end < panel.rows(); ++end) {
        const Matrix w = window_rows(panel.values, end - window + 1, window);
        const HzResult hz = henze_zirkler(w);
        s.day_index.push_back(panel.first_day + end);
        s.values.push_back(hz.singular ? kNaN : hz.pvalue);
        s.flags.push_back(hz.singular ? 1 : 0);
    }
    return s;
}

DiagnosticsSeries rolling_outliers(const Panel& panel, int window, double alpha) {
    check_window(panel, window);
    if (alpha < 0.5 || alpha > 1.0) throw ConfigError("alpha must lie in [0.5, 1]");
    DiagnosticsSeries s = make_series(panel, window, DiagnosticMetric::OutlierProp);
    for (int end = window - 1; end < panel.rows(); ++end) {
        const Matrix w = window_rows(panel.values, end - window + 1, window);
        const RobustDistances rd = robust_mahalanobis_sq(w);
        s.day_index.push_back(panel.first_day + end);
        if (rd.singular) {
            s.values.push_back(kNaN);
            s.flags.push_back(1);
            continue;
        }
        const double cutoff = adjusted_outlier_cutoff(rd.d2, panel.values.cols(), alpha);
        int flagged = 0;
        for (double v : rd.d2) flagged += v > cutoff;
        s.values.push_back(static_cast<double>(flagged) / window);
        s.flags.push_back(0);
    }
    return s;
}

DiagnosticsSeries rolling_pearson(const Panel& panel, int window, std::pair<int, int> pair) {
    check_window(panel, window);
    const int p = panel.values.cols();
    if (pair.first < 0 || pair.first >= p || pair.second < 0 || pair.second >= p ||
        pair.first == pair.second) {
        throw ConfigError("bad pollutant pair");
    }
    DiagnosticsSeries s = make_series(
        panel, window, DiagnosticMetric::PearsonR,
        panel.pollutants[pair.first] + ":" + panel.pollutants[pair.second]);
    std::vector<double> a(window), b(window);
    for (int end = window - 1; end < panel.rows(); ++end) {
        for (int i = 0; i < window; ++i) {
            a[i] = panel.values(end - window + 1 + i, pair.first);
            b[i] = panel.values(end - window + 1 + i, pair.second);
        }
        const double r = pearson(a, b);
        s.day_index.push_back(panel.first_day + end);
        s.values.push_back(r);
        s.flags.push_back(std::isnan(r) ? 1 : 0);
    }
    return s;
}

void write_diagnostics_csv(std::ostream& out, std::span<const DiagnosticsSeries> series) {
    out << "hour,day_index,date,metric,value,flag\n";
    for (const auto& s : series) {
        const std::string label = metric_label(s.metric, s.pair_label);
        for (size_t i = 0; i < s.values.size(); ++i) {
            const CivilDate date = add_days(s.grid_start, s.day_index[i]);
            out << s.hour << ',' << s.day_index[i] << ',' << format_date(date) << ',' << label
                << ',' << fmt_double(s.values[i]) << ',' << static_cast<int>(s.flags[i]) << '\n';
        }
    }
}

} // namespace dpca
