#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "adpda/harness.hpp"

namespace fs = std::filesystem;
using namespace adpda;

namespace {

ExperimentConfig load_or_default(const std::string& path) {
    if (path.empty()) return default_experiment();
    return load_experiment_config(path);
}

int cmd_simulate(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    Rng rng = make_rng(cfg.seed, 0);
    const std::vector<AgentState> traj = gen_trajectory(cfg.scenario, rng);
    const int n_steps = cfg.scenario.n_steps();

    std::vector<std::vector<SimulatedScan>> scans(n_steps);
    for (int n = 1; n <= n_steps; ++n)
        for (const Anchor& a : cfg.scenario.anchors)
            scans[n - 1].push_back(gen_scan(traj[n - 1], a, n, cfg.scenario, rng));

    {
        std::ofstream os(fs::path(cfg.out_dir) / "scans.jsonl");
        write_scans(os, scans, cfg.scenario.dt);
    }
    {
        std::ofstream os(fs::path(cfg.out_dir) / "trajectory.csv");
        os << "n,t,x,y,vx,vy\n";
        for (int n = 1; n <= n_steps; ++n) {
            const AgentState& x = traj[n - 1];
            os << n << "," << n * cfg.scenario.dt << "," << x.p.x << "," << x.p.y << ","
               << x.v.x << "," << x.v.y << "\n";
        }
    }
    std::cout << "wrote " << (fs::path(cfg.out_dir) / "scans.jsonl").string() << " and "
              << (fs::path(cfg.out_dir) / "trajectory.csv").string() << "\n";
    return 0;
}

int cmd_track(const ExperimentConfig& cfg, const std::string& scan_path) {
    std::ifstream is(scan_path);
    if (!is) {
        std::cerr << "cannot open scan file: " << scan_path << "\n";
        return 1;
    }
    const auto sim_scans = read_scans(is);

    Filter filter(cfg.scenario.anchors, cfg.filter_params(),
                  derive_seed(cfg.seed, 1));
    fs::create_directories(cfg.out_dir);
    std::ofstream os(fs::path(cfg.out_dir) / "track.csv");
    const std::size_t j_count = cfg.scenario.anchors.size();
    os << "n,t,est_x,est_y,est_vx,est_vy,lost";
    for (std::size_t j = 1; j <= j_count; ++j) os << ",u" << j;
    for (std::size_t j = 1; j <= j_count; ++j) os << ",q" << j;
    os << "\n";
    for (std::size_t n = 0; n < sim_scans.size(); ++n) {
        std::vector<Scan> scans;
        for (const SimulatedScan& s : sim_scans[n]) scans.push_back(s.scan);
        const Filter::StepResult res = filter.step(scans);
        os << (n + 1) << "," << (n + 1) * cfg.scenario.dt << "," << res.est.x.p.x << ","
           << res.est.x.p.y << "," << res.est.x.v.x << "," << res.est.x.v.y << ","
           << (res.lost ? 1 : 0);
        for (double u : res.est.u) os << "," << u;
        for (double q : res.est.q) os << "," << q;
        os << "\n";
    }
    std::cout << "wrote " << (fs::path(cfg.out_dir) / "track.csv").string() << "\n";
    return 0;
}

int cmd_bench(const ExperimentConfig& cfg, const std::vector<std::string>& variants) {
    std::vector<std::pair<std::string, std::vector<RunResult>>> per_variant;
    for (const std::string& v : variants) {
        std::cout << "running " << cfg.runs << " realizations of " << v << "...\n";
        per_variant.emplace_back(v, run_experiment(cfg, v));
        int lost = 0;
        for (const RunResult& r : per_variant.back().second)
            if (r.lost_step >= 0) ++lost;
        std::cout << "  mean RMSE [0," << cfg.scenario.duration
                  << "]s: " << mean_rmse(per_variant.back().second, 0.0,
                                         cfg.scenario.duration, cfg.scenario.dt)
                  << " m, lost tracks: " << lost << "\n";
    }
    export_results(cfg, per_variant, cfg.out_dir);
    std::cout << "results in " << cfg.out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive PDA message-passing localization: simulator, tracker and "
                 "Monte-Carlo benchmark"};
    app.require_subcommand(1);

    std::string config_path, scan_path;
    std::vector<std::string> algorithms;
    int runs = -1, workers = -1;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file (defaults used if absent)");
        sub->add_option("--seed", seed, "master seed override")->each([&](const std::string&) {
            seed_set = true;
        });
        sub->add_option("--out", out_dir, "output directory override");
    };

    CLI::App* sim = app.add_subcommand("simulate", "generate one measurement realization");
    add_common(sim);

    CLI::App* track = app.add_subcommand("track", "run the filter on a scan file");
    add_common(track);
    track->add_option("--scans", scan_path, "line-delimited scan file")->required();
    track->add_option("--algorithm", algorithms, "variant AL1..AL5");

    CLI::App* bench = app.add_subcommand("bench", "full Monte-Carlo study");
    add_common(bench);
    bench->add_option("--algorithm", algorithms, "variant(s) AL1..AL5, repeatable");
    bench->add_option("--runs", runs, "number of Monte-Carlo runs");
    bench->add_option("--workers", workers, "worker thread count (0 = hardware)");

    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentConfig cfg = load_or_default(config_path);
        if (seed_set) cfg.seed = seed;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (runs > 0) cfg.runs = runs;
        if (workers >= 0) cfg.workers = workers;
        if (!algorithms.empty()) cfg.algorithm = algorithms.front();
        cfg.validate();

        if (sim->parsed()) return cmd_simulate(cfg);
        if (track->parsed()) return cmd_track(cfg, scan_path);
        if (bench->parsed()) {
            std::vector<std::string> variants =
                algorithms.empty() ? std::vector<std::string>{cfg.algorithm} : algorithms;
            return cmd_bench(cfg, variants);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
