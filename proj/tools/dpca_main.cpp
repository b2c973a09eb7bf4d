// Command-line front end: stages of the pipeline as subcommands, each reading
// its inputs from (and writing its outputs into) a run directory, plus a
// `pipeline` command chaining them for all 24 hours.
#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpca/diagnostics.hpp"
#include "dpca/engine.hpp"
#include "dpca/error.hpp"
#include "dpca/grid.hpp"
#include "dpca/impute.hpp"
#include "dpca/panel.hpp"
#include "dpca/summarize.hpp"
#include "dpca/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Options {
    std::string input;
    std::string out_dir;
    int window = 45;
    int hour = -1;
    std::string aggregator = "median";
    std::string transform = "nsao";
    double alpha = 0.75;
    int short_gap_max = 4;
    int smoothing_window = 45;
    uint64_t seed = 1;
    int jobs = 0; // 0 = hardware default
    std::string qc_codes;
    std::string zone_rules;
    std::string pollutants = "O3,CO,NO2,SO2,PM2.5";
    bool json_bundle = false;

    // synth knobs
    int days = 400;
    int sites = 4;
    int factors = 2;
    double factor_share = 0.8;
    double seasonal_amplitude = 0.0;
    double site_noise_sd = 0.1;
    double missing_rate = 0.02;
    int gap_len_max = 6;
};

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(csv);
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw dpca::DataError("cannot open input file " + path.string());
    return in;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw dpca::DataError("cannot open output file " + path.string());
    return out;
}

fs::path require_out_dir(const Options& opt) {
    if (opt.out_dir.empty()) throw dpca::ConfigError("--out-dir is required");
    fs::create_directories(opt.out_dir);
    return opt.out_dir;
}

// One manifest per stage, overwritten on rerun; carries no timestamps.
// Identical runs must leave byte-identical trees.
void write_manifest(const fs::path& dir, const std::string& stage, const json& config,
                    const json& inputs, const json& outputs, const json& counts) {
    json doc;
    doc["stage"] = stage;
    doc["version"] = kVersion;
    doc["config"] = config;
    doc["config_hash"] = fnv1a(config.dump());
    doc["inputs"] = inputs;
    doc["outputs"] = outputs;
    doc["counts"] = counts;
    auto out = open_output(dir / (stage + "_manifest.json"));
    out << doc.dump(2) << '\n';
}

void run_hours_parallel(int jobs, int only_hour, const std::function<void(int)>& fn) {
    if (only_hour >= 0) {
        fn(only_hour);
        return;
    }
    int workers = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, 24);
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int h = next.fetch_add(1); h < 24; h = next.fetch_add(1)) fn(h);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

dpca::ObservationGrid load_grid(const fs::path& path, const Options& opt) {
    auto in = open_input(path);
    dpca::QcPolicy policy;
    for (auto& code : split_list(opt.qc_codes)) policy.invalid_codes.insert(code);
    return dpca::parse_observations(in, policy, split_list(opt.pollutants));
}

fs::path panel_csv_path(const fs::path& dir, const std::string& stage, int hour) {
    char name[32];
    std::snprintf(name, sizeof(name), "%s_h%02d.csv", stage.c_str(), hour);
    return dir / "panels" / name;
}

fs::path panel_meta_path(const fs::path& dir, const std::string& stage, int hour) {
    char name[40];
    std::snprintf(name, sizeof(name), "%s_h%02d.meta.json", stage.c_str(), hour);
    return dir / "panels" / name;
}

void save_panel(const fs::path& dir, const dpca::Panel& panel) {
    const std::string stage = dpca::to_string(panel.stage);
    auto csv = open_output(panel_csv_path(dir, stage, panel.hour));
    dpca::write_panel_csv(csv, panel);
    auto meta = open_output(panel_meta_path(dir, stage, panel.hour));
    dpca::write_panel_meta(meta, panel);
}

dpca::Panel load_panel(const fs::path& dir, const std::string& stage, int hour) {
    auto csv = open_input(panel_csv_path(dir, stage, hour));
    auto meta = open_input(panel_meta_path(dir, stage, hour));
    return dpca::read_panel(csv, meta);
}

json options_json(const Options& opt, std::initializer_list<const char*> keys) {
    json all;
    all["input"] = opt.input;
    all["out_dir"] = opt.out_dir;
    all["window"] = opt.window;
    all["hour"] = opt.hour;
    all["aggregator"] = opt.aggregator;
    all["transform"] = opt.transform;
    all["alpha"] = opt.alpha;
    all["short_gap_max"] = opt.short_gap_max;
    all["smoothing_window"] = opt.smoothing_window;
    all["seed"] = opt.seed;
    all["qc_codes"] = opt.qc_codes;
    all["zone_rules"] = opt.zone_rules;
    all["pollutants"] = opt.pollutants;
    all["days"] = opt.days;
    all["sites"] = opt.sites;
    all["factors"] = opt.factors;
    all["factor_share"] = opt.factor_share;
    all["seasonal_amplitude"] = opt.seasonal_amplitude;
    all["site_noise_sd"] = opt.site_noise_sd;
    all["missing_rate"] = opt.missing_rate;
    all["gap_len_max"] = opt.gap_len_max;
    json picked;
    for (const char* k : keys) picked[k] = all.at(k);
    return picked;
}

// ---------------------------------------------------------------------------
// Stage implementations.

void stage_synth(const Options& opt) {
    const fs::path dir = require_out_dir(opt);
    dpca::SynthSpec spec;
    spec.days = opt.days;
    spec.sites = opt.sites;
    spec.factors = opt.factors;
    spec.factor_share = opt.factor_share;
    spec.seasonal_amplitude = opt.seasonal_amplitude;
    spec.site_noise_sd = opt.site_noise_sd;
    spec.missing_rate = opt.missing_rate;
    spec.gap_len_max = opt.gap_len_max;
    spec.seed = opt.seed;

    const auto out = dpca::generate(spec);
    {
        auto csv = open_output(dir / "observations.csv");
        dpca::write_observations(csv, out.grid);
    }
    {
        json truth;
        truth["generator"] = out.generator;
        truth["seed"] = spec.seed;
        truth["factor_share"] = spec.factor_share;
        truth["noise_variance"] = out.noise_variance;
        truth["strengths"] = out.strengths;
        truth["planted_first"] = out.planted_first;
        truth["envelope"] = out.envelope;
        auto f = open_output(dir / "truth.json");
        f << truth.dump(2) << '\n';
    }
    write_manifest(dir, "synth",
                   options_json(opt, {"seed", "days", "sites", "factors", "factor_share",
                                      "seasonal_amplitude", "site_noise_sd", "missing_rate",
                                      "gap_len_max"}),
                   json::array(), json::array({"observations.csv", "truth.json"}),
                   json{{"cells", out.grid.values.size()},
                        {"present", out.grid.present_count()}});
}

void stage_ingest(const Options& opt) {
    const fs::path dir = require_out_dir(opt);
    if (opt.input.empty()) throw dpca::ConfigError("ingest needs --input");

    dpca::ParseReport report;
    dpca::QcPolicy policy;
    for (auto& code : split_list(opt.qc_codes)) policy.invalid_codes.insert(code);
    auto in = open_input(opt.input);
    auto grid = dpca::parse_observations(in, policy, split_list(opt.pollutants), &report);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';

    if (!opt.zone_rules.empty()) {
        auto rules_in = open_input(opt.zone_rules);
        grid = dpca::apply_dst(grid, dpca::parse_zone_rules(rules_in));
    }

    {
        auto csv = open_output(dir / "grid.csv");
        dpca::write_observations(csv, grid);
    }
    {
        auto csv = open_output(dir / "missingness.csv");
        dpca::write_missingness_csv(csv, dpca::missingness_report(grid, opt.short_gap_max));
    }
    write_manifest(dir, "ingest",
                   options_json(opt, {"input", "qc_codes", "zone_rules", "pollutants",
                                      "short_gap_max"}),
                   json::array({opt.input}), json::array({"grid.csv", "missingness.csv"}),
                   json{{"rows", report.rows},
                        {"masked_by_qc", report.masked_by_qc},
                        {"present", grid.present_count()},
                        {"days", grid.days}});
}

void stage_impute(const Options& opt) {
    const fs::path dir = require_out_dir(opt);
    const fs::path src = opt.input.empty() ? dir / "grid.csv" : fs::path(opt.input);
    const auto grid = load_grid(src, opt);
    const auto [imputed, count] = dpca::impute_short_gaps(grid, opt.short_gap_max);
    {
        auto csv = open_output(dir / "grid_imputed.csv");
        dpca::write_observations(csv, imputed);
    }
    write_manifest(dir, "impute", options_json(opt, {"input", "short_gap_max", "pollutants"}),
                   json::array({src.string()}), json::array({"grid_imputed.csv"}),
                   json{{"imputed_cells", count}, {"present", imputed.present_count()}});
}

void stage_sao(const Options& opt) {
    const fs::path dir = require_out_dir(opt);
    const fs::path src = opt.input.empty() ? dir / "grid_imputed.csv" : fs::path(opt.input);
    const auto grid = load_grid(src, opt);
    const auto aggregator = dpca::aggregator_from_string(opt.aggregator);
    fs::create_directories(dir / "panels");

    std::atomic<long> flagged{0};
    run_hours_parallel(opt.jobs, opt.hour, [&](int h) {
        const dpca::Panel panel = dpca::build_sao(grid, h, aggregator);
        flagged += static_cast<long>(panel.flagged_cells.size());
        save_panel(dir, panel);
    });
    write_manifest(dir, "sao", options_json(opt, {"input", "aggregator", "hour", "pollutants"}),
                   json::array({src.string()}), json::array({"panels/sao_h*.csv"}),
                   json{{"interpolated_cells", flagged.load()}, {"days", grid.days}});
}

void stage_transform(const Options& opt) {
    const fs::path dir = require_out_dir(opt);
    const auto target = dpca::stage_from_string(opt.transform);
    if (target == dpca::Stage::SAO) {
        throw dpca::ConfigError("transform target must be lsao or nsao");
    }
    fs::create_directories(dir / "panels");
    run_hours_parallel(opt.jobs, opt.hour, [&](int h) {
        dpca::Panel panel = dpca::to_lsao(load_panel(dir, "sao", h));
        save_panel(dir, panel);
        if (target == dpca::Stage::NSAO) save_panel(dir, dpca::to_nsao(panel));
    });
    write_manifest(dir, "transform", options_json(opt, {"transform", "hour"}),
                   json::array({"panels/sao_h*.csv"}),
                   json::array({"panels/lsao_h*.csv", "panels/nsao_h*.csv"}), json::object());
}

void stage_diagnose(const Options& opt) {
    const fs::path dir = require_out_dir(opt);
    std::vector<std::vector<dpca::DiagnosticsSeries>> by_hour(24);
    run_hours_parallel(opt.jobs, opt.hour, [&](int h) {
        const dpca::Panel panel = load_panel(dir, opt.transform, h);
        auto& bucket = by_hour[h];
        bucket.push_back(dpca::rolling_hz_test(panel, opt.window));
        bucket.push_back(dpca::rolling_outliers(panel, opt.window, opt.alpha));
        const int p = panel.values.cols();
        for (int a = 0; a < p; ++a) {
            for (int b = a + 1; b < p; ++b) {
                bucket.push_back(dpca::rolling_pearson(panel, opt.window, {a, b}));
            }
        }
    });

    std::vector<dpca::DiagnosticsSeries> all;
    for (auto& bucket : by_hour) {
        for (auto& s : bucket) all.push_back(std::move(s));
    }
    long rows = 0;
    for (const auto& s : all) rows += static_cast<long>(s.values.size());
    {
        auto csv = open_output(dir / "diagnostics.csv");
        dpca::write_diagnostics_csv(csv, all);
    }
    write_manifest(dir, "diagnose",
                   options_json(opt, {"transform", "window", "alpha", "hour"}),
                   json::array({"panels/" + opt.transform + "_h*.csv"}),
                   json::array({"diagnostics.csv"}), json{{"rows", rows}});
}

void stage_dpca(const Options& opt) {
    const fs::path dir = require_out_dir(opt);
    dpca::DpcaConfig cfg;
    cfg.window = opt.window;
    cfg.smoothing_window = opt.smoothing_window;

    std::vector<std::vector<dpca::DpcaResult>> per_hour(24);
    std::vector<std::optional<dpca::Panel>> panels(24);
    run_hours_parallel(opt.jobs, opt.hour, [&](int h) {
        dpca::Panel panel = load_panel(dir, opt.transform, h);
        auto results = dpca::run_dpca(panel, cfg);
        dpca::sign_normalize(results);
        per_hour[h] = std::move(results);
        panels[h] = std::move(panel);
    });

    const int reference_hour = opt.hour >= 0 ? opt.hour : 0;
    const dpca::Panel& reference = *panels[reference_hour];
    const auto surfaces = dpca::assemble_surfaces(per_hour, reference, cfg);
    {
        auto csv = open_output(dir / "ev_surface.csv");
        dpca::write_ev_surface_csv(csv, surfaces, opt.hour);
    }
    {
        auto loadings_csv = open_output(dir / "loadings.csv");
        auto mac_csv = open_output(dir / "mac.csv");
        loadings_csv << "hour,day_index,date,pollutant,k,weight_raw,weight_smoothed\n";
        mac_csv << "hour,pollutant,k,mac\n";
        for (int h = 0; h < 24; ++h) {
            if (per_hour[h].empty()) continue;
            const auto trajectories =
                dpca::loading_trajectories(per_hour[h], *panels[h], cfg.smoothing_window);
            std::ostringstream block, mac_block;
            dpca::write_loadings_csv(block, trajectories, *panels[h]);
            dpca::write_mac_csv(mac_block, dpca::mean_abs_coefficients(per_hour[h]), *panels[h]);
            // Strip the per-hour headers; one header per file.
            const std::string text = block.str();
            loadings_csv << text.substr(text.find('\n') + 1);
            const std::string mac_text = mac_block.str();
            mac_csv << mac_text.substr(mac_text.find('\n') + 1);
        }
    }
    long windows = 0, degenerate = 0;
    for (const auto& results : per_hour) {
        for (const auto& r : results) {
            ++windows;
            degenerate += r.degenerate;
        }
    }
    write_manifest(dir, "dpca",
                   options_json(opt, {"transform", "window", "smoothing_window", "hour"}),
                   json::array({"panels/" + opt.transform + "_h*.csv"}),
                   json::array({"ev_surface.csv", "loadings.csv", "mac.csv"}),
                   json{{"windows", windows}, {"degenerate", degenerate}});
}

void stage_summarize(const Options& opt) {
    const fs::path dir = require_out_dir(opt);
    auto in = open_input(dir / "ev_surface.csv");
    const auto set = dpca::read_ev_surface_csv(in);
    const auto table = dpca::mean_ev_by_hour(set);
    const auto overall = dpca::overall_mean_ev(table.mean_ev);
    const auto overall_cev = dpca::overall_mean_ev(table.mean_cev);
    const auto boxes = dpca::ev_distribution_by_hour(set, 1);

    {
        auto csv = open_output(dir / "mean_ev_by_hour.csv");
        dpca::write_mean_ev_csv(csv, table);
    }
    {
        auto csv = open_output(dir / "overall_mean_ev.csv");
        dpca::write_overall_mean_ev_csv(csv, overall, overall_cev);
    }
    {
        auto csv = open_output(dir / "ev_distribution_k1.csv");
        dpca::write_distribution_csv(csv, boxes, 1);
    }
    if (opt.json_bundle) {
        json bundle;
        auto& mean_ev = bundle["mean_ev_by_hour"] = json::array();
        for (int h = 0; h < 24; ++h) {
            json row;
            row["hour"] = h;
            row["coverage"] = table.coverage[h];
            for (int k = 0; k < table.mean_ev.cols(); ++k) {
                row["ev"].push_back(table.mean_ev(h, k));
                row["cev"].push_back(table.mean_cev(h, k));
            }
            mean_ev.push_back(row);
        }
        bundle["overall_mean_ev"] = overall;
        bundle["overall_mean_cev"] = overall_cev;
        auto& dist = bundle["ev1_distribution"] = json::array();
        for (const auto& box : boxes) {
            dist.push_back(json{{"hour", box.hour},
                                {"n", box.n},
                                {"min", box.min},
                                {"q1", box.q1},
                                {"median", box.median},
                                {"q3", box.q3},
                                {"max", box.max},
                                {"outliers", box.outliers}});
        }
        auto f = open_output(dir / "summary.json");
        f << bundle.dump(2) << '\n';
    }
    write_manifest(dir, "summarize", options_json(opt, {"hour"}),
                   json::array({"ev_surface.csv"}),
                   json::array({"mean_ev_by_hour.csv", "overall_mean_ev.csv",
                                "ev_distribution_k1.csv"}),
                   json{{"components", set.components},
                        {"windows", set.day_index.size()}});
}

std::vector<dpca::Panel> nsao_panels_all_hours(const dpca::ObservationGrid& grid,
                                               dpca::Aggregator aggregator, int jobs) {
    std::vector<std::optional<dpca::Panel>> slots(24);
    run_hours_parallel(jobs, -1, [&](int h) {
        slots[h] = dpca::to_nsao(dpca::to_lsao(dpca::build_sao(grid, h, aggregator)));
    });
    std::vector<dpca::Panel> panels;
    panels.reserve(24);
    for (auto& slot : slots) panels.push_back(std::move(*slot));
    return panels;
}

void stage_compare_static(const Options& opt) {
    const fs::path dir = require_out_dir(opt);
    const fs::path src = opt.input.empty() ? dir / "grid_imputed.csv" : fs::path(opt.input);
    const auto grid = load_grid(src, opt);
    const auto panels =
        nsao_panels_all_hours(grid, dpca::aggregator_from_string(opt.aggregator), opt.jobs);

    std::vector<dpca::PartitionEv> parts;
    for (auto scheme : {dpca::PartitionScheme::SummerWinter, dpca::PartitionScheme::DayNight}) {
        for (auto& part : dpca::static_pca_partition(panels, scheme)) {
            parts.push_back(std::move(part));
        }
    }
    {
        auto csv = open_output(dir / "static_partitions.csv");
        dpca::write_partition_csv(csv, parts);
    }
    write_manifest(dir, "compare_static", options_json(opt, {"input", "aggregator"}),
                   json::array({src.string()}), json::array({"static_partitions.csv"}),
                   json{{"partitions", parts.size()}});
}

void stage_compare_transforms(const Options& opt) {
    const fs::path dir = require_out_dir(opt);
    const fs::path src = opt.input.empty() ? dir / "grid_imputed.csv" : fs::path(opt.input);
    const auto grid = load_grid(src, opt);
    dpca::DpcaConfig cfg;
    cfg.window = opt.window;
    cfg.smoothing_window = opt.smoothing_window;
    const auto cmp = dpca::transform_comparison(grid, cfg);
    {
        auto csv = open_output(dir / "transform_comparison.csv");
        dpca::write_transform_comparison_csv(csv, cmp);
    }
    write_manifest(dir, "compare_transforms", options_json(opt, {"input", "window"}),
                   json::array({src.string()}), json::array({"transform_comparison.csv"}),
                   json{{"variants", cmp.variants.size()}});
}

void stage_pipeline(const Options& opt) {
    const fs::path dir = require_out_dir(opt);
    if (opt.input.empty()) throw dpca::ConfigError("pipeline needs --input");
    stage_ingest(opt);
    Options chained = opt;
    chained.input.clear(); // later stages read from the run directory
    stage_impute(chained);
    stage_sao(chained);
    stage_transform(chained);
    stage_diagnose(chained);
    stage_dpca(chained);
    stage_summarize(chained);
    write_manifest(dir, "pipeline",
                   options_json(opt, {"input", "window", "aggregator", "transform", "alpha",
                                      "short_gap_max", "smoothing_window", "hour"}),
                   json::array({opt.input}),
                   json::array({"grid.csv", "grid_imputed.csv", "panels/", "diagnostics.csv",
                                "ev_surface.csv", "loadings.csv", "mac.csv",
                                "mean_ev_by_hour.csv", "overall_mean_ev.csv",
                                "ev_distribution_k1.csv"}),
                   json::object());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sliding-window PCA pipeline for hourly multivariate air-quality panels"};
    app.set_version_flag("--version", std::string("dpca ") + kVersion);
    app.set_config("--config", "", "TOML-style key=value config file; flags take precedence");
    app.require_subcommand(1);

    Options opt;
    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--input", opt.input, "Input file (stage-dependent default)");
        cmd->add_option("--out-dir", opt.out_dir, "Run directory for outputs");
        cmd->add_option("--jobs", opt.jobs, "Worker threads for per-hour stages (0 = auto)");
        cmd->add_option("--pollutants", opt.pollutants, "Pollutant order, comma-separated");
    };

    auto* synth = app.add_subcommand("synth", "Generate a synthetic observation file");
    add_common(synth);
    synth->add_option("--seed", opt.seed, "Generator seed");
    synth->add_option("--days", opt.days, "Days to generate");
    synth->add_option("--sites", opt.sites, "Monitoring sites");
    synth->add_option("--factors", opt.factors, "Planted factor count");
    synth->add_option("--factor-share", opt.factor_share, "Leading-factor variance share");
    synth->add_option("--seasonal-amplitude", opt.seasonal_amplitude, "Envelope amplitude");
    synth->add_option("--site-noise-sd", opt.site_noise_sd, "Lognormal site noise sd");
    synth->add_option("--missing-rate", opt.missing_rate, "Target missing fraction");
    synth->add_option("--gap-len-max", opt.gap_len_max, "Longest injected gap");

    auto* ingest = app.add_subcommand("ingest", "Parse raw observations; QC mask + DST repair");
    add_common(ingest);
    ingest->add_option("--qc-codes", opt.qc_codes, "Comma-separated invalid QC codes");
    ingest->add_option("--zone-rules", opt.zone_rules, "JSON file of DST jump/compression rules");
    ingest->add_option("--short-gap-max", opt.short_gap_max, "Short-run threshold (hours)");

    auto* impute = app.add_subcommand("impute", "Fill short gaps with monotone splines");
    add_common(impute);
    impute->add_option("--short-gap-max", opt.short_gap_max, "Longest gap to fill (hours)");

    auto* sao = app.add_subcommand("sao", "Collapse sites into per-hour panels");
    add_common(sao);
    sao->add_option("--aggregator", opt.aggregator, "median or mean");
    sao->add_option("--hour", opt.hour, "Single hour (default all 24)");

    auto* transform = app.add_subcommand("transform", "Apply the log / log-difference ladder");
    add_common(transform);
    transform->add_option("--transform", opt.transform, "Target stage: lsao or nsao");
    transform->add_option("--hour", opt.hour, "Single hour (default all 24)");

    auto* diagnose = app.add_subcommand("diagnose", "Rolling normality/outlier/correlation");
    add_common(diagnose);
    diagnose->add_option("--transform", opt.transform, "Panel stage to diagnose");
    diagnose->add_option("--window", opt.window, "Rolling window (days)");
    diagnose->add_option("--alpha", opt.alpha, "Outlier decision parameter in [0.5, 1]");
    diagnose->add_option("--hour", opt.hour, "Single hour (default all 24)");

    auto* dpca_cmd = app.add_subcommand("dpca", "Sliding-window PCA: EV surfaces + loadings");
    add_common(dpca_cmd);
    dpca_cmd->add_option("--transform", opt.transform, "Panel stage to analyze");
    dpca_cmd->add_option("--window", opt.window, "Window length (days)");
    dpca_cmd->add_option("--smoothing-window", opt.smoothing_window, "Loading smoothing (days)");
    dpca_cmd->add_option("--hour", opt.hour, "Single hour (default all 24)");

    auto* summarize = app.add_subcommand("summarize", "Aggregate EV surfaces");
    add_common(summarize);
    summarize->add_flag("--json", opt.json_bundle, "Also write a summary.json bundle");

    auto* cmp_static = app.add_subcommand("compare-static", "Static PCA on pooled partitions");
    add_common(cmp_static);
    cmp_static->add_option("--aggregator", opt.aggregator, "median or mean");

    auto* cmp_transforms =
        app.add_subcommand("compare-transforms", "Mean EV1 across the six pipeline variants");
    add_common(cmp_transforms);
    cmp_transforms->add_option("--window", opt.window, "Window length (days)");

    auto* pipeline = app.add_subcommand("pipeline", "Run every stage for all 24 hours");
    add_common(pipeline);
    pipeline->add_option("--qc-codes", opt.qc_codes, "Comma-separated invalid QC codes");
    pipeline->add_option("--zone-rules", opt.zone_rules, "JSON file of DST rules");
    pipeline->add_option("--short-gap-max", opt.short_gap_max, "Short-gap threshold (hours)");
    pipeline->add_option("--aggregator", opt.aggregator, "median or mean");
    pipeline->add_option("--transform", opt.transform, "Analysis stage (lsao or nsao)");
    pipeline->add_option("--window", opt.window, "Window length (days)");
    pipeline->add_option("--alpha", opt.alpha, "Outlier decision parameter");
    pipeline->add_option("--smoothing-window", opt.smoothing_window, "Loading smoothing (days)");
    pipeline->add_option("--hour", opt.hour, "Single hour (default all 24)");
    pipeline->add_flag("--json", opt.json_bundle, "Also write a summary.json bundle");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help / --version
        std::cerr << "error: config: " << e.what() << '\n';
        return 2;
    }

    try {
        if (synth->parsed()) stage_synth(opt);
        if (ingest->parsed()) stage_ingest(opt);
        if (impute->parsed()) stage_impute(opt);
        if (sao->parsed()) stage_sao(opt);
        if (transform->parsed()) stage_transform(opt);
        if (diagnose->parsed()) stage_diagnose(opt);
        if (dpca_cmd->parsed()) stage_dpca(opt);
        if (summarize->parsed()) stage_summarize(opt);
        if (cmp_static->parsed()) stage_compare_static(opt);
        if (cmp_transforms->parsed()) stage_compare_transforms(opt);
        if (pipeline->parsed()) stage_pipeline(opt);
    } catch (const dpca::ConfigError& e) {
        std::cerr << "error: config: " << e.what() << '\n';
        return 2;
    } catch (const dpca::DegenerateError& e) {
        std::cerr << "error: degenerate: " << e.what() << '\n';
        return 4;
    } catch (const dpca::DataError& e) {
        std::cerr << "error: data: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
