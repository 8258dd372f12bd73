#ifndef ADPDA_HARNESS_HPP
#define ADPDA_HARNESS_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "adpda/filter.hpp"
#include "adpda/simulator.hpp"

namespace adpda {

/// Full description of one Monte-Carlo experiment.
struct ExperimentConfig {
    ScenarioConfig scenario;
    std::string algorithm = "AL5";  // AL1..AL5
    int runs = 500;
    std::size_t r_init = 10000;
    std::size_t r_track = 1000;
    std::size_t r_u = 400;
    double sigma_a = 0.3;      // m/s^2
    double sigma_u = 0.2;
    double gamma = 0.0;        // detection threshold
    double u_max = 100.0;
    double q_fixed = 0.999;    // used when q tracking is off
    double sigma_const = 0.1;  // meters, used when CRLB sigma is off
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    int workers = 0;  // 0 = hardware concurrency

    FilterParams filter_params() const;
    FilterParams filter_params(const std::string& variant) const;
    void validate() const;
};

ExperimentConfig default_experiment();

/// JSON round trip. Parsing accepts partial configs (missing keys keep
/// their defaults) and also accepts a manifest file (config under "config").
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);
std::string canonical_config_json(const ExperimentConfig& cfg);

/// Per-run record of one tracked trajectory.
struct RunResult {
    std::vector<Vec2> true_pos;
    std::vector<Vec2> est_pos;
    std::vector<double> sq_error;              // squared position error per step
    std::vector<std::vector<double>> u_mmse;   // [step][anchor]
    std::vector<std::vector<double>> q_mmse;   // [step][anchor]
    std::vector<double> sp_crlb;               // bound along the true trajectory
    int lost_step = -1;                        // first rejected update, -1 if none
};

/// One simulated + tracked realization. The simulation stream depends only
/// on (seed, run_index) so all variants see identical measurements.
RunResult run_single(const ExperimentConfig& cfg, const std::string& variant, int run_index);

/// All runs of one variant, executed across worker threads.
std::vector<RunResult> run_experiment(const ExperimentConfig& cfg,
                                      const std::string& variant);
std::vector<RunResult> run_experiment(const ExperimentConfig& cfg);

/// Per-step RMSE across runs.
std::vector<double> rmse_over_time(const std::vector<RunResult>& results);

/// Empirical CDF of the per-step RMSE over steps with t in [t0, t1].
/// Returns (error level, cumulative frequency) pairs.
std::vector<std::pair<double, double>> rmse_cdf(const std::vector<RunResult>& results,
                                                double t0, double t1, double dt);

/// Mean of the per-step RMSE over steps with t in [t0, t1].
double mean_rmse(const std::vector<RunResult>& results, double t0, double t1, double dt);

/// Writes rmse_vs_time.csv, rmse_cdf.csv, per-run traces and manifest.json.
void export_results(
    const ExperimentConfig& cfg,
    const std::vector<std::pair<std::string, std::vector<RunResult>>>& per_variant,
    const std::string& out_dir);

}  // namespace adpda

#endif  // ADPDA_HARNESS_HPP
