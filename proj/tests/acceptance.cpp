// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Criteria that need the real TCEQ dataset are skipped with
// a reason unless DPCA_TCEQ_CSV points at it.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dpca/diagnostics.hpp"
#include "dpca/engine.hpp"
#include "dpca/grid.hpp"
#include "dpca/impute.hpp"
#include "dpca/panel.hpp"
#include "dpca/stats.hpp"
#include "dpca/summarize.hpp"
#include "dpca/synth.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using dpca::Matrix;
using dpca::Panel;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << name << " — "
              << detail << '\n';
    if (!pass) ++failures;
}

void report_skip(int id, const std::string& name, const std::string& reason) {
    std::cout << "SKIP criterion " << id << ": " << name << " — " << reason << '\n';
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

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

// --------------------------------------------------------------------------

void criterion_1_ev_normalization() {
    const auto t0 = std::chrono::steady_clock::now();
    oracles::TestRng rng(1001);
    bool ok = true;
    double worst = 0.0;
    for (int rep = 0; rep < 1000 && ok; ++rep) {
        Matrix w(45, 5);
        for (int i = 0; i < 45; ++i)
            for (int j = 0; j < 5; ++j) w(i, j) = rng.uniform(-1.0, 1.0);
        const auto pca = dpca::window_pca(w, true);
        double total = 0.0;
        for (double ev : pca.ev) total += ev;
        worst = std::max(worst, std::abs(total - 1.0));
        ok = ok && std::abs(total - 1.0) <= 1e-10;
        for (size_t k = 1; k < pca.cev.size(); ++k) ok = ok && pca.cev[k] >= pca.cev[k - 1];
    }
    const double elapsed = seconds_since(t0);
    std::ostringstream detail;
    detail << "1000 windows, worst |sum(ev)-1| = " << worst << ", cev non-decreasing, "
           << elapsed << "s";
    report(1, "EV normalization", ok && elapsed < 5.0, detail.str());
}

void criterion_2_eigensolver_oracle() {
    oracles::TestRng rng(1002);
    bool ok = true;
    double worst_val = 0.0, worst_rec = 0.0;
    for (int rep = 0; rep < 500 && ok; ++rep) {
        dpca::SymMatrix m(5);
        for (int i = 0; i < 5; ++i)
            for (int j = i; j < 5; ++j) m.set(i, j, rng.uniform(-1.0, 1.0));
        const auto eg = dpca::eigen_sym(m);
        const auto roots = oracles::eigenvalues_charpoly(m);
        for (int k = 0; k < 5; ++k) {
            worst_val = std::max(worst_val, std::abs(eg.values[k] - roots[k]));
        }
        for (int i = 0; i < 5; ++i) {
            for (int j = 0; j < 5; ++j) {
                double acc = 0.0;
                for (int k = 0; k < 5; ++k)
                    acc += eg.vectors(i, k) * eg.values[k] * eg.vectors(j, k);
                worst_rec = std::max(worst_rec, std::abs(acc - m(i, j)));
            }
        }
        ok = worst_val < 1e-9 && worst_rec < 1e-9;
    }
    std::ostringstream detail;
    detail << "500 matrices, worst |lambda - root| = " << worst_val
           << ", worst reconstruction = " << worst_rec;
    report(2, "eigensolver vs characteristic-polynomial oracle", ok, detail.str());
}

void criterion_3_lsao_points() {
    dpca::ObservationGrid grid;
    grid.days = 2;
    grid.start_date = {2009, 1, 1};
    grid.sites = {"S1"};
    grid.pollutants = {"CO"};
    grid.units = {"ppb"};
    grid.values.assign(2 * 24, std::numeric_limits<double>::quiet_NaN());
    grid.set_cell(7, 0, 0, 0, 182.61);
    grid.set_cell(7, 1, 0, 0, 23.00);
    const Panel lsao = dpca::to_lsao(dpca::build_sao(grid, 7, dpca::Aggregator::Median));
    const double co = lsao.values(0, 0);
    const double o3 = lsao.values(1, 0);
    const bool ok = std::abs(co - 5.21) <= 0.01 && std::abs(o3 - 3.18) <= 0.01;
    std::ostringstream detail;
    detail << "log(1+182.61) = " << co << " (5.21 ± .01), log(1+23.00) = " << o3
           << " (3.18 ± .01)";
    report(3, "LSAO point checks", ok, detail.str());
}

void criterion_4_planted_structure() {
    const auto t0 = std::chrono::steady_clock::now();
    double share_total = 0.0, cos_total = 0.0;
    long windows = 0;
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        dpca::SynthSpec spec;
        spec.days = 400;
        spec.factors = 2;
        spec.factor_share = 0.8;
        spec.seed = seed;
        const auto out = dpca::generate(spec);
        const Panel panel = nsao_panel(out.grid, 7);
        dpca::DpcaConfig cfg;
        cfg.window = 45;
        for (const auto& r : dpca::run_dpca(panel, cfg)) {
            share_total += r.core.ev[0] + r.core.ev[1];
            cos_total += abs_cos(r.core.loadings.column(0), out.planted_first);
            ++windows;
        }
    }
    const double mean_share = share_total / static_cast<double>(windows);
    const double mean_cos = cos_total / static_cast<double>(windows);
    const double elapsed = seconds_since(t0);
    const bool ok =
        mean_share >= 0.72 && mean_share <= 0.88 && mean_cos >= 0.9 && elapsed < 60.0;
    std::ostringstream detail;
    detail << "mean(ev1+ev2) = " << mean_share << " in [0.72, 0.88], mean |cos| = " << mean_cos
           << " >= 0.9, " << elapsed << "s over " << windows << " windows";
    report(4, "planted two-factor recovery", ok, detail.str());
}

void criterion_5_seasonal_tracking() {
    dpca::SynthSpec spec;
    spec.days = 500;
    spec.factors = 2;
    spec.factor_share = 0.8;
    spec.seasonal_amplitude = 0.6;
    spec.seed = 11;
    const auto out = dpca::generate(spec);
    const Panel panel = nsao_panel(out.grid, 7);
    dpca::DpcaConfig cfg;
    cfg.window = 45;
    std::vector<double> ev1, env;
    for (const auto& r : dpca::run_dpca(panel, cfg)) {
        ev1.push_back(r.core.ev[0]);
        env.push_back(out.envelope[r.day_index]);
    }
    const double corr = dpca::pearson(ev1, env);
    std::ostringstream detail;
    detail << "corr(ev1(d), envelope) = " << corr << " > 0.5";
    report(5, "seasonal envelope tracking", corr > 0.5, detail.str());
}

void criterion_6_hz_calibration() {
    oracles::TestRng rng(1006);
    int null_rej = 0, alt_rej = 0, one_coord_rej = 0;
    const int trials = 500;
    for (int t = 0; t < trials; ++t) {
        Matrix x(45, 5);
        for (int i = 0; i < 45; ++i)
            for (int j = 0; j < 5; ++j) x(i, j) = rng.normal();
        null_rej += dpca::henze_zirkler(x).pvalue < 0.05;

        Matrix cubed = x;
        for (int i = 0; i < 45; ++i)
            for (int j = 0; j < 5; ++j) cubed(i, j) = std::pow(cubed(i, j), 3);
        alt_rej += dpca::henze_zirkler(cubed).pvalue < 0.05;

        Matrix one = x;
        for (int i = 0; i < 45; ++i) one(i, 2) = std::pow(one(i, 2), 3);
        one_coord_rej += dpca::henze_zirkler(one).pvalue < 0.05;
    }
    const double size = static_cast<double>(null_rej) / trials;
    const double power = static_cast<double>(alt_rej) / trials;
    const double one_power = static_cast<double>(one_coord_rej) / trials;
    const bool ok = size >= 0.02 && size <= 0.09 && power > 0.9;
    std::ostringstream detail;
    detail << "null rejection = " << size << " in [0.02, 0.09]; cubed-coordinates power = "
           << power << " > 0.9 (single-coordinate variant: " << one_power << ")";
    report(6, "Henze-Zirkler calibration", ok, detail.str());
}

void criterion_7_imputation_boundedness() {
    oracles::TestRng rng(1007);
    long violations = 0, monotone_breaks = 0, cells = 0;
    for (int rep = 0; rep < 10000; ++rep) {
        const int n = 8 + static_cast<int>(rng.uniform_int(16));
        std::vector<double> series(n);
        const bool monotone = rng.uniform() < 0.5;
        double level = rng.uniform(0.0, 30.0);
        for (int i = 0; i < n; ++i) {
            level = monotone ? level + rng.uniform(0.0, 2.0)
                             : std::max(0.0, level + rng.uniform(-2.0, 2.0));
            series[i] = level;
        }
        const int gap = 1 + static_cast<int>(rng.uniform_int(4));
        const int start = 1 + static_cast<int>(rng.uniform_int(n - gap - 1));
        std::vector<double> work = series;
        for (int g = 0; g < gap; ++g) work[start + g] = std::numeric_limits<double>::quiet_NaN();
        dpca::impute_series(work, 4);

        const double lo = std::min(series[start - 1], series[start + gap]);
        const double hi = std::max(series[start - 1], series[start + gap]);
        double prev = series[start - 1];
        for (int g = 0; g < gap; ++g) {
            const double v = work[start + g];
            ++cells;
            if (!(v >= lo && v <= hi)) ++violations;
            if (monotone && v + 1e-12 < prev) ++monotone_breaks;
            prev = v;
        }
        if (monotone && series[start + gap] + 1e-12 < prev) ++monotone_breaks;
    }
    std::ostringstream detail;
    detail << cells << " imputed cells over 10000 fixtures, " << violations
           << " bound violations, " << monotone_breaks << " monotonicity breaks";
    report(7, "imputation boundedness", violations == 0 && monotone_breaks == 0, detail.str());
}

void criterion_8_scale_invariance() {
    oracles::TestRng rng(1008);
    Matrix x(80, 5);
    for (int i = 0; i < 80; ++i) {
        const double f = rng.normal();
        for (int j = 0; j < 5; ++j) x(i, j) = 0.6 * f + rng.normal();
    }
    double worst = 0.0;
    dpca::DpcaConfig cfg;
    cfg.window = 45;
    for (int scaled_col = 0; scaled_col < 5; ++scaled_col) {
        Matrix y = x;
        for (int i = 0; i < 80; ++i) y(i, scaled_col) *= 7.0;
        Panel pa, pb;
        pa.values = x;
        pb.values = y;
        pa.pollutants = pb.pollutants = {"A", "B", "C", "D", "E"};
        const auto ra = dpca::run_dpca(pa, cfg);
        const auto rb = dpca::run_dpca(pb, cfg);
        for (size_t w = 0; w < ra.size(); ++w) {
            for (int k = 0; k < 5; ++k) {
                worst = std::max(worst, std::abs(ra[w].core.ev[k] - rb[w].core.ev[k]));
                for (int i = 0; i < 5; ++i) {
                    worst = std::max(worst, std::abs(std::abs(ra[w].core.loadings(i, k)) -
                                                     std::abs(rb[w].core.loadings(i, k))));
                }
            }
        }
    }
    std::ostringstream detail;
    detail << "worst |delta| across ev and |loadings| after x7 column scaling = " << worst;
    report(8, "per-window standardization scale invariance", worst <= 1e-10, detail.str());
}

void criterion_9_sign_normalization() {
    oracles::TestRng rng(1009);
    Matrix x(90, 5);
    for (int i = 0; i < 90; ++i) {
        const double f = rng.normal();
        for (int j = 0; j < 5; ++j) x(i, j) = 0.8 * f + rng.normal();
    }
    Panel panel;
    panel.values = x;
    panel.pollutants = {"A", "B", "C", "D", "E"};
    dpca::DpcaConfig cfg;
    cfg.window = 45;
    auto results = dpca::run_dpca(panel, cfg);
    const auto before = results;
    dpca::sign_normalize(results);
    const Matrix mac = dpca::mean_abs_coefficients(results);

    bool ok = true;
    for (int k = 0; k < 5; ++k) {
        int anchor = 0;
        for (int i = 1; i < 5; ++i)
            if (mac(i, k) > mac(anchor, k)) anchor = i;
        for (size_t w = 0; w < results.size(); ++w) {
            const double pivot = results[w].core.loadings(anchor, k);
            if (pivot != 0.0 && pivot <= 0.0) ok = false;
            ok = ok && results[w].core.ev == before[w].core.ev;
            ok = ok && results[w].core.singular_values == before[w].core.singular_values;
            for (int i = 0; i < 5; ++i) {
                ok = ok && std::abs(results[w].core.loadings(i, k)) ==
                               std::abs(before[w].core.loadings(i, k));
            }
        }
    }
    report(9, "sign normalization invariance", ok,
           ok ? "pivot positive on every nonzero day; |coefficients|, lambda, ev bit-identical"
              : "violated");
}

void criterion_10_static_vs_dynamic() {
    dpca::SynthSpec spec;
    spec.days = 200;
    spec.factors = 2;
    spec.factor_share = 0.8;
    spec.seed = 10;
    const auto out = dpca::generate(spec);

    std::vector<Panel> panels;
    for (int h = 0; h < 24; ++h) panels.push_back(nsao_panel(out.grid, h));

    // Whole-sample partition vs one window covering the pooled sample.
    const auto parts = dpca::static_pca_partition(panels, dpca::PartitionScheme::Whole);
    std::vector<std::vector<double>> pooled;
    for (const auto& panel : panels) {
        for (int d = 0; d < panel.rows(); ++d) pooled.push_back(panel.values.row(d));
    }
    Matrix all(static_cast<int>(pooled.size()), 5);
    for (size_t i = 0; i < pooled.size(); ++i)
        for (int j = 0; j < 5; ++j) all(static_cast<int>(i), j) = pooled[i][j];
    const auto pca = dpca::window_pca(all, true);

    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
        worst = std::max(worst, std::abs(parts[0].ev[k] - pca.ev[k]));
        worst = std::max(worst, std::abs(parts[0].cev[k] - pca.cev[k]));
    }
    std::ostringstream detail;
    detail << "whole-sample partition vs full-length window PCA: worst |delta| = " << worst;
    report(10, "static-vs-dynamic harness", worst <= 1e-10, detail.str());

    const char* tceq = std::getenv("DPCA_TCEQ_CSV");
    if (!tceq) {
        report_skip(10, "TCEQ reference values (winter EV1=.58, CEV2=.78; overall EV1=.51, CEV2=.74)",
                    "TCEQ dataset not supplied; set DPCA_TCEQ_CSV to the raw observation CSV");
        return;
    }
    std::ifstream in(tceq);
    if (!in) {
        report(10, "TCEQ reference values", false, std::string("cannot open ") + tceq);
        return;
    }
    const auto grid = dpca::parse_observations(in, {}, {"O3", "CO", "NO2", "SO2", "PM2.5"});
    const auto [imputed, n_imputed] = dpca::impute_short_gaps(grid, 4);
    std::vector<Panel> tceq_panels;
    for (int h = 0; h < 24; ++h) tceq_panels.push_back(nsao_panel(imputed, h));

    const auto seasonal =
        dpca::static_pca_partition(tceq_panels, dpca::PartitionScheme::SummerWinter);
    const auto& winter = seasonal[1];

    dpca::DpcaConfig cfg;
    cfg.window = 45;
    std::vector<std::vector<dpca::DpcaResult>> per_hour;
    for (const auto& panel : tceq_panels) per_hour.push_back(dpca::run_dpca(panel, cfg));
    const auto set = dpca::assemble_surfaces(per_hour, tceq_panels[0], cfg);
    const auto table = dpca::mean_ev_by_hour(set);
    const auto overall = dpca::overall_mean_ev(table.mean_ev);
    const auto overall_cev = dpca::overall_mean_ev(table.mean_cev);

    const bool tceq_ok = std::abs(winter.ev[0] - 0.58) <= 0.03 &&
                         std::abs(winter.cev[1] - 0.78) <= 0.03 &&
                         std::abs(overall[0] - 0.51) <= 0.03 &&
                         std::abs(overall_cev[1] - 0.74) <= 0.03;
    std::ostringstream tceq_detail;
    tceq_detail << "winter EV1 = " << winter.ev[0] << " (.58 ± .03), winter CEV2 = "
                << winter.cev[1] << " (.78 ± .03), overall EV1 = " << overall[0]
                << " (.51 ± .03), overall CEV2 = " << overall_cev[1] << " (.74 ± .03)";
    report(10, "TCEQ reference values", tceq_ok, tceq_detail.str());
}

void criterion_11_end_to_end_determinism() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::string cli = DPCA_CLI_PATH;
    const fs::path base = fs::temp_directory_path() / "dpca_acceptance";
    fs::remove_all(base);
    fs::create_directories(base);

    const auto run = [&](const std::string& args) {
        const std::string cmd = cli + " " + args + " >/dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) && WEXITSTATUS(status) == 0;
    };

    bool ok = run("synth --out-dir " + (base / "in").string() +
                  " --days 400 --sites 4 --seed 77 --missing-rate 0.02 --seasonal-amplitude 0.4");
    const std::string input = (base / "in" / "observations.csv").string();
    ok = ok && run("pipeline --input " + input + " --out-dir " + (base / "a").string());
    ok = ok && run("pipeline --input " + input + " --out-dir " + (base / "a").string());

    // Snapshot after the double run of `a`, then a fresh run in `b` driven
    // with identical arguments via a relative working path is not possible
    // through std::system portably, so determinism is judged by the rerun
    // leaving `a` byte-identical and by a second tree matching on all
    // non-manifest artifacts (manifests embed the differing --out-dir).
    ok = ok && run("pipeline --input " + input + " --out-dir " + (base / "b").string());

    auto snapshot = [](const fs::path& root, bool data_only) {
        std::map<std::string, std::string> snap;
        for (const auto& entry : fs::recursive_directory_iterator(root)) {
            if (!entry.is_regular_file()) continue;
            const std::string rel = fs::relative(entry.path(), root).string();
            if (data_only && rel.find("manifest") != std::string::npos) continue;
            std::ifstream in(entry.path(), std::ios::binary);
            std::ostringstream ss;
            ss << in.rdbuf();
            snap[rel] = ss.str();
        }
        return snap;
    };

    ok = ok && snapshot(base / "a", true) == snapshot(base / "b", true);

    // And a rerun into `b` itself must reproduce everything, manifests
    // included.
    const auto before = snapshot(base / "b", false);
    ok = ok && run("pipeline --input " + input + " --out-dir " + (base / "b").string());
    ok = ok && before == snapshot(base / "b", false);

    const double elapsed = seconds_since(t0);
    std::ostringstream detail;
    detail << "four pipeline runs over 24h x 400d, trees byte-identical, total " << elapsed
           << "s (< 300s budget)";
    report(11, "end-to-end determinism and runtime", ok && elapsed < 300.0, detail.str());
    fs::remove_all(base);
}

} // namespace

int main() {
    criterion_1_ev_normalization();
    criterion_2_eigensolver_oracle();
    criterion_3_lsao_points();
    criterion_4_planted_structure();
    criterion_5_seasonal_tracking();
    criterion_6_hz_calibration();
    criterion_7_imputation_boundedness();
    criterion_8_scale_invariance();
    criterion_9_sign_normalization();
    criterion_10_static_vs_dynamic();
    criterion_11_end_to_end_determinism();

    if (failures == 0) {
        std::cout << "All acceptance criteria passed.\n";
        return 0;
    }
    std::cout << failures << " acceptance criteria FAILED.\n";
    return 1;
}
