#include "adpda/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#ifndef ADPDA_GIT_DESC
#define ADPDA_GIT_DESC "unknown"
#endif

namespace adpda {

using nlohmann::json;

// ---- JSON mapping -------------------------------------------------------

static json to_json(const Vec2& v) { return json::array({v.x, v.y}); }
static Vec2 vec2_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

static json scenario_to_json(const ScenarioConfig& s) {
    json j;
    json anchors = json::array();
    for (const Anchor& a : s.anchors) anchors.push_back(to_json(a.position));
    j["anchors"] = std::move(anchors);
    j["duration"] = s.duration;
    j["dt"] = s.dt;
    j["speed_nominal"] = s.speed_nominal;
    j["snr_ref_db"] = s.snr_ref_db;
    j["pathloss_exponent"] = s.pathloss_exponent;
    j["pathloss_power_domain"] = s.pathloss_power_domain;
    j["clutter_rate"] = s.clutter_rate;
    j["nlos"] = {{"p_mp", s.nlos.p_mp},   {"gamma_r", s.nlos.gamma_r},
                 {"gamma_f", s.nlos.gamma_f}, {"bias_b", s.nlos.bias_b},
                 {"d_max", s.nlos.d_max}};
    json windows = json::array();
    for (const OlosWindow& w : s.olos_windows)
        windows.push_back({{"anchors", w.anchor_ids}, {"start", w.start}, {"end", w.end}});
    j["olos_windows"] = std::move(windows);
    j["effective_bandwidth"] = s.effective_bandwidth;
    json wps = json::array();
    for (const Vec2& p : s.waypoint_offsets) wps.push_back(to_json(p));
    j["waypoint_offsets"] = std::move(wps);
    j["waypoint_jitter"] = s.waypoint_jitter;
    j["speed_mod_amp"] = s.speed_mod_amp;
    j["speed_mod_period"] = s.speed_mod_period;
    return j;
}

static ScenarioConfig scenario_from_json(const json& j, ScenarioConfig s) {
    if (j.contains("anchors")) {
        s.anchors.clear();
        int id = 1;
        for (const auto& a : j.at("anchors")) s.anchors.push_back({id++, vec2_from(a)});
    }
    s.duration = j.value("duration", s.duration);
    s.dt = j.value("dt", s.dt);
    s.speed_nominal = j.value("speed_nominal", s.speed_nominal);
    s.snr_ref_db = j.value("snr_ref_db", s.snr_ref_db);
    s.pathloss_exponent = j.value("pathloss_exponent", s.pathloss_exponent);
    s.pathloss_power_domain = j.value("pathloss_power_domain", s.pathloss_power_domain);
    s.clutter_rate = j.value("clutter_rate", s.clutter_rate);
    if (j.contains("nlos")) {
        const json& n = j.at("nlos");
        s.nlos.p_mp = n.value("p_mp", s.nlos.p_mp);
        s.nlos.gamma_r = n.value("gamma_r", s.nlos.gamma_r);
        s.nlos.gamma_f = n.value("gamma_f", s.nlos.gamma_f);
        s.nlos.bias_b = n.value("bias_b", s.nlos.bias_b);
        s.nlos.d_max = n.value("d_max", s.nlos.d_max);
    }
    if (j.contains("olos_windows")) {
        s.olos_windows.clear();
        for (const auto& w : j.at("olos_windows"))
            s.olos_windows.push_back({w.at("anchors").get<std::vector<int>>(),
                                      w.at("start").get<double>(), w.at("end").get<double>()});
    }
    s.effective_bandwidth = j.value("effective_bandwidth", s.effective_bandwidth);
    if (j.contains("waypoint_offsets")) {
        s.waypoint_offsets.clear();
        for (const auto& p : j.at("waypoint_offsets")) s.waypoint_offsets.push_back(vec2_from(p));
    }
    s.waypoint_jitter = j.value("waypoint_jitter", s.waypoint_jitter);
    s.speed_mod_amp = j.value("speed_mod_amp", s.speed_mod_amp);
    s.speed_mod_period = j.value("speed_mod_period", s.speed_mod_period);
    return s;
}

ExperimentConfig default_experiment() {
    ExperimentConfig c;
    c.scenario = default_scenario();
    return c;
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json j = json::parse(json_text);
    if (j.contains("config")) j = j.at("config");  // manifest files wrap the config
    ExperimentConfig c = default_experiment();
    if (j.contains("scenario")) c.scenario = scenario_from_json(j.at("scenario"), c.scenario);
    c.algorithm = j.value("algorithm", c.algorithm);
    c.runs = j.value("runs", c.runs);
    c.r_init = j.value("r_init", c.r_init);
    c.r_track = j.value("r_track", c.r_track);
    c.r_u = j.value("r_u", c.r_u);
    c.sigma_a = j.value("sigma_a", c.sigma_a);
    c.sigma_u = j.value("sigma_u", c.sigma_u);
    c.gamma = j.value("gamma", c.gamma);
    c.u_max = j.value("u_max", c.u_max);
    c.q_fixed = j.value("q_fixed", c.q_fixed);
    c.sigma_const = j.value("sigma_const", c.sigma_const);
    c.out_dir = j.value("out", c.out_dir);
    c.seed = j.value("seed", c.seed);
    c.workers = j.value("workers", c.workers);
    c.validate();
    return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_experiment_config(ss.str());
}

std::string canonical_config_json(const ExperimentConfig& c) {
    json j;
    j["scenario"] = scenario_to_json(c.scenario);
    j["algorithm"] = c.algorithm;
    j["runs"] = c.runs;
    j["r_init"] = c.r_init;
    j["r_track"] = c.r_track;
    j["r_u"] = c.r_u;
    j["sigma_a"] = c.sigma_a;
    j["sigma_u"] = c.sigma_u;
    j["gamma"] = c.gamma;
    j["u_max"] = c.u_max;
    j["q_fixed"] = c.q_fixed;
    j["sigma_const"] = c.sigma_const;
    j["out"] = c.out_dir;
    j["seed"] = c.seed;
    j["workers"] = c.workers;
    return j.dump(2);
}

void ExperimentConfig::validate() const {
    scenario.validate();
    FilterFeatures::variant(algorithm);  // throws on unknown names
    if (runs < 1) throw std::invalid_argument("ExperimentConfig: runs must be >= 1");
    if (r_init < 1 || r_track < 1 || r_u < 1)
        throw std::invalid_argument("ExperimentConfig: particle counts must be >= 1");
    if (!(sigma_u > 0.0)) throw std::invalid_argument("ExperimentConfig: sigma_u must be > 0");
    if (!(gamma >= 0.0 && u_max > gamma))
        throw std::invalid_argument("ExperimentConfig: need 0 <= gamma < u_max");
}

FilterParams ExperimentConfig::filter_params() const { return filter_params(algorithm); }

FilterParams ExperimentConfig::filter_params(const std::string& variant) const {
    FilterParams p;
    p.kin = {scenario.dt, sigma_a};
    p.walk = {sigma_u, u_max};
    p.grid = default_los_grid();
    p.nlos = scenario.nlos;
    p.amp = {gamma, u_max};
    p.features = FilterFeatures::variant(variant);
    p.q_fixed = q_fixed;
    p.sigma_const = sigma_const;
    p.r_init = r_init;
    p.r_track = r_track;
    p.r_u = r_u;
    return p;
}

// ---- Monte-Carlo execution ----------------------------------------------

namespace {

std::uint64_t variant_level(const std::string& v) {
    return static_cast<std::uint64_t>(v.back() - '0');
}

}  // namespace

RunResult run_single(const ExperimentConfig& cfg, const std::string& variant, int run_index) {
    const ScenarioConfig& sc = cfg.scenario;
    const int n_steps = sc.n_steps();
    const std::size_t j_count = sc.anchors.size();

    Rng sim_rng = make_rng(cfg.seed, static_cast<std::uint64_t>(run_index) * 16);
    const std::uint64_t filter_seed =
        derive_seed(cfg.seed, static_cast<std::uint64_t>(run_index) * 16 + variant_level(variant));

    const std::vector<AgentState> traj = gen_trajectory(sc, sim_rng);
    std::vector<std::vector<Scan>> scans(n_steps);
    for (int n = 1; n <= n_steps; ++n) {
        scans[n - 1].reserve(j_count);
        for (const Anchor& a : sc.anchors)
            scans[n - 1].push_back(gen_scan(traj[n - 1], a, n, sc, sim_rng).scan);
    }

    Filter filter(sc.anchors, cfg.filter_params(variant), filter_seed);

    const CrlbContext ctx{299792458.0, sc.effective_bandwidth};
    RunResult res;
    res.true_pos.resize(n_steps);
    res.est_pos.resize(n_steps);
    res.sq_error.resize(n_steps);
    res.u_mmse.resize(n_steps);
    res.q_mmse.resize(n_steps);
    res.sp_crlb.resize(n_steps);
    std::vector<double> sigmas(j_count);
    for (int n = 1; n <= n_steps; ++n) {
        const Filter::StepResult step = filter.step(scans[n - 1]);
        const Vec2& truth = traj[n - 1].p;
        res.true_pos[n - 1] = truth;
        res.est_pos[n - 1] = step.est.x.p;
        const Vec2 err = step.est.x.p - truth;
        res.sq_error[n - 1] = err.x * err.x + err.y * err.y;
        res.u_mmse[n - 1] = step.est.u;
        res.q_mmse[n - 1] = step.est.q;
        if (step.lost && res.lost_step < 0) res.lost_step = n;
        for (std::size_t j = 0; j < j_count; ++j) {
            const double d = los_distance(truth, sc.anchors[j]);
            sigmas[j] = sigma_from_amplitude(los_amplitude(d, sc), ctx);
        }
        res.sp_crlb[n - 1] = sp_crlb(truth, sc.anchors, sigmas);
    }
    return res;
}

std::vector<RunResult> run_experiment(const ExperimentConfig& cfg,
                                      const std::string& variant) {
    cfg.validate();
    const int runs = cfg.runs;
    std::vector<RunResult> results(runs);
    int workers = cfg.workers > 0 ? cfg.workers
                                  : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, runs));
    if (workers == 1) {
        for (int r = 0; r < runs; ++r) results[r] = run_single(cfg, variant, r);
        return results;
    }
    std::atomic<int> next{0};
    auto work = [&] {
        for (;;) {
            const int r = next.fetch_add(1);
            if (r >= runs) return;
            results[r] = run_single(cfg, variant, r);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
    return results;
}

std::vector<RunResult> run_experiment(const ExperimentConfig& cfg) {
    return run_experiment(cfg, cfg.algorithm);
}

// ---- statistics ---------------------------------------------------------

std::vector<double> rmse_over_time(const std::vector<RunResult>& results) {
    if (results.empty()) throw std::invalid_argument("rmse_over_time: no runs");
    const std::size_t n = results.front().sq_error.size();
    std::vector<double> out(n, 0.0);
    for (const RunResult& r : results) {
        if (r.sq_error.size() != n)
            throw std::invalid_argument("rmse_over_time: run length mismatch");
        for (std::size_t i = 0; i < n; ++i) out[i] += r.sq_error[i];
    }
    for (double& v : out) v = std::sqrt(v / static_cast<double>(results.size()));
    return out;
}

std::vector<std::pair<double, double>> rmse_cdf(const std::vector<RunResult>& results,
                                                double t0, double t1, double dt) {
    if (!(t1 > t0)) throw std::invalid_argument("rmse_cdf: empty time range");
    const std::vector<double> rmse = rmse_over_time(results);
    std::vector<double> levels;
    for (std::size_t i = 0; i < rmse.size(); ++i) {
        const double t = static_cast<double>(i + 1) * dt;
        if (t >= t0 && t <= t1) levels.push_back(rmse[i]);
    }
    if (levels.empty()) throw std::invalid_argument("rmse_cdf: no steps in time range");
    std::sort(levels.begin(), levels.end());
    std::vector<std::pair<double, double>> out(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i)
        out[i] = {levels[i], static_cast<double>(i + 1) / static_cast<double>(levels.size())};
    return out;
}

double mean_rmse(const std::vector<RunResult>& results, double t0, double t1, double dt) {
    const std::vector<double> rmse = rmse_over_time(results);
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < rmse.size(); ++i) {
        const double t = static_cast<double>(i + 1) * dt;
        if (t >= t0 && t <= t1) {
            sum += rmse[i];
            ++count;
        }
    }
    if (count == 0) throw std::invalid_argument("mean_rmse: no steps in time range");
    return sum / count;
}

// ---- export -------------------------------------------------------------

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

double full_olos_start(const ScenarioConfig& sc) {
    for (const OlosWindow& w : sc.olos_windows)
        if (w.anchor_ids.size() == sc.anchors.size()) return w.start;
    return sc.duration;
}

}  // namespace

void export_results(
    const ExperimentConfig& cfg,
    const std::vector<std::pair<std::string, std::vector<RunResult>>>& per_variant,
    const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const double dt = cfg.scenario.dt;
    const int n_steps = cfg.scenario.n_steps();

    // rmse_vs_time.csv
    {
        std::ofstream os(fs::path(out_dir) / "rmse_vs_time.csv");
        os << "t";
        for (const auto& [name, results] : per_variant) os << "," << name;
        os << ",sp_crlb\n";
        std::vector<std::vector<double>> series;
        for (const auto& [name, results] : per_variant)
            series.push_back(rmse_over_time(results));
        // bound averaged (RMS) across the runs of the first variant; the
        // simulation stream is shared so every variant sees the same value
        std::vector<double> bound(n_steps, 0.0);
        const std::vector<RunResult>& ref = per_variant.front().second;
        for (const RunResult& r : ref)
            for (int i = 0; i < n_steps; ++i) bound[i] += r.sp_crlb[i] * r.sp_crlb[i];
        for (double& b : bound) b = std::sqrt(b / static_cast<double>(ref.size()));
        for (int i = 0; i < n_steps; ++i) {
            os << fmt((i + 1) * dt);
            for (const auto& s : series) os << "," << fmt(s[i]);
            os << "," << fmt(bound[i]) << "\n";
        }
    }

    // rmse_cdf.csv for the full window and the pre-full-OLOS window
    {
        std::ofstream os(fs::path(out_dir) / "rmse_cdf.csv");
        os << "variant,window_start,window_end,error,cum_freq\n";
        const double t_pre = full_olos_start(cfg.scenario);
        for (const auto& [name, results] : per_variant) {
            for (const double t1 : {cfg.scenario.duration, t_pre}) {
                for (const auto& [lvl, freq] : rmse_cdf(results, 0.0, t1, dt))
                    os << name << ",0," << fmt(t1) << "," << fmt(lvl) << "," << fmt(freq)
                       << "\n";
            }
        }
    }

    // per-run traces
    for (const auto& [name, results] : per_variant) {
        const fs::path dir = fs::path(out_dir) / "traces" / name;
        fs::create_directories(dir);
        for (std::size_t r = 0; r < results.size(); ++r) {
            char fname[32];
            std::snprintf(fname, sizeof(fname), "run_%04zu.csv", r);
            std::ofstream os(dir / fname);
            const std::size_t j_count = cfg.scenario.anchors.size();
            os << "n,t,true_x,true_y,est_x,est_y,err";
            for (std::size_t j = 1; j <= j_count; ++j) os << ",u" << j;
            for (std::size_t j = 1; j <= j_count; ++j) os << ",q" << j;
            os << "\n";
            const RunResult& run = results[r];
            for (int i = 0; i < n_steps; ++i) {
                os << (i + 1) << "," << fmt((i + 1) * dt) << "," << fmt(run.true_pos[i].x)
                   << "," << fmt(run.true_pos[i].y) << "," << fmt(run.est_pos[i].x) << ","
                   << fmt(run.est_pos[i].y) << "," << fmt(std::sqrt(run.sq_error[i]));
                for (std::size_t j = 0; j < j_count; ++j) os << "," << fmt(run.u_mmse[i][j]);
                for (std::size_t j = 0; j < j_count; ++j) os << "," << fmt(run.q_mmse[i][j]);
                os << "\n";
            }
        }
    }

    // manifest
    {
        json manifest;
        manifest["config"] = json::parse(canonical_config_json(cfg));
        json variants = json::array();
        for (const auto& [name, results] : per_variant) {
            int lost = 0;
            for (const RunResult& r : results)
                if (r.lost_step >= 0) ++lost;
            variants.push_back({{"name", name},
                                {"runs", results.size()},
                                {"lost_tracks", lost}});
        }
        manifest["variants"] = std::move(variants);
        manifest["seed"] = cfg.seed;
        manifest["build"] = ADPDA_GIT_DESC;
        std::ofstream os(fs::path(out_dir) / "manifest.json");
        os << manifest.dump(2) << "\n";
    }
}

}  // namespace adpda
