#ifndef DPCA_ENGINE_HPP
#define DPCA_ENGINE_HPP

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dpca/linalg.hpp"
#include "dpca/panel.hpp"

namespace dpca {

struct DpcaConfig {
    int window = 45;
    int components_kept = 0; // 0 = all
    bool standardize_per_window = true;
    int smoothing_window = 45;

    void validate(int pollutants) const;
};

// PCA of one window: lambda_k are singular values (sqrt of covariance
// eigenvalues), loadings columns are the eigenvectors, ev_k = lambda_k^2 /
// sum_j lambda_j^2, cev the running sum.
struct WindowPca {
    std::vector<double> singular_values;
    Matrix loadings; // p x p
    std::vector<double> ev;
    std::vector<double> cev;
};

// Columns are centered (and standardized when `standardize`), then the
// sample covariance is eigendecomposed. A zero-variance column raises
// DegenerateColumnError.
WindowPca window_pca(const Matrix& window, bool standardize);

// Scores Z = X V of the centered/standardized window; components > 0 keeps
// only the leading columns (EV is always reported for all of them).
Matrix window_scores(const Matrix& window, bool standardize, const Matrix& loadings,
                     int components = 0);

struct DpcaResult {
    int hour = 0;
    int day_index = 0;      // grid day of the window end
    bool degenerate = false;
    int degenerate_column = -1;
    WindowPca core;
};

// One result per trailing window position. Windows with a degenerate column
// are flagged and carry NaN values instead of aborting the run.
std::vector<DpcaResult> run_dpca(const Panel& panel, const DpcaConfig& cfg);

// Mean of absolute loading coefficients over non-degenerate days; p x p,
// entry (pollutant, component).
Matrix mean_abs_coefficients(std::span<const DpcaResult> results);

// The largest-MAC pollutant of each component anchors its sign: every day's
// column is flipped so that the anchor coefficient is positive (days where
// it is exactly zero are left alone). Ties pick the lowest pollutant index.
void sign_normalize(std::vector<DpcaResult>& results);

// Trailing moving average; the first window-1 entries average the available
// prefix. NaN entries are skipped (all-NaN span stays NaN).
std::vector<double> trailing_mean(std::span<const double> series, int window);

struct LoadingTrajectory {
    int hour = 0;
    int pollutant = 0;
    int component = 0;
    std::vector<int> day_index;
    std::vector<double> raw;
    std::vector<double> smoothed;
    double mac = 0.0;
};

LoadingTrajectory smooth_loadings(LoadingTrajectory t, int smoothing_window);

// All p x p trajectories for one hour's (sign-normalized) results.
std::vector<LoadingTrajectory> loading_trajectories(std::span<const DpcaResult> results,
                                                    const Panel& panel, int smoothing_window);

// EV and CEV per component over the 24 x windows grid, assembled from the
// per-hour result lists (an empty list leaves that hour flagged missing).
struct EvSurfaceSet {
    int window = 0;
    int components = 0;
    CivilDate grid_start{};
    std::vector<int> day_index; // shared window-end days (columns)
    std::vector<Matrix> ev;     // per component: 24 x W
    std::vector<Matrix> cev;
    Matrix flags; // 24 x W; 1 = missing/degenerate
};

EvSurfaceSet assemble_surfaces(const std::vector<std::vector<DpcaResult>>& per_hour,
                               const Panel& reference_panel, const DpcaConfig& cfg);

// CSV exports. `only_hour` restricts the surface rows to one hour (-1 = all).
void write_ev_surface_csv(std::ostream& out, const EvSurfaceSet& set, int only_hour = -1);
EvSurfaceSet read_ev_surface_csv(std::istream& in);
void write_loadings_csv(std::ostream& out, std::span<const LoadingTrajectory> trajectories,
                        const Panel& panel);
void write_mac_csv(std::ostream& out, const Matrix& mac, const Panel& panel);

} // namespace dpca

#endif
