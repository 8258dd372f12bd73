#include "adpda/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace adpda {

int ScenarioConfig::n_steps() const {
    const double ratio = duration / dt;
    const int n = static_cast<int>(std::lround(ratio));
    if (std::abs(ratio - n) > 1e-9)
        throw std::invalid_argument("ScenarioConfig: duration must be a multiple of dt");
    return n;
}

Vec2 ScenarioConfig::anchor_centroid() const {
    Vec2 c;
    for (const Anchor& a : anchors) c += a.position;
    return c * (1.0 / static_cast<double>(anchors.size()));
}

bool ScenarioConfig::is_olos(int anchor_id, double t) const {
    for (const OlosWindow& w : olos_windows) {
        if (t < w.start || t > w.end) continue;
        if (std::find(w.anchor_ids.begin(), w.anchor_ids.end(), anchor_id) !=
            w.anchor_ids.end())
            return true;
    }
    return false;
}

void ScenarioConfig::validate() const {
    if (anchors.empty()) throw std::invalid_argument("ScenarioConfig: no anchors");
    for (std::size_t j = 0; j < anchors.size(); ++j)
        if (anchors[j].id != static_cast<int>(j) + 1)
            throw std::invalid_argument("ScenarioConfig: anchor ids must be 1..J in order");
    if (!(duration > 0.0 && dt > 0.0 && speed_nominal > 0.0))
        throw std::invalid_argument("ScenarioConfig: durations and speed must be > 0");
    if (!(clutter_rate >= 0.0))
        throw std::invalid_argument("ScenarioConfig: clutter_rate must be >= 0");
    if (!(effective_bandwidth > 0.0))
        throw std::invalid_argument("ScenarioConfig: effective_bandwidth must be > 0");
    if (waypoint_offsets.size() < 2)
        throw std::invalid_argument("ScenarioConfig: at least two waypoints required");
    nlos.validate();
    n_steps();
}

ScenarioConfig default_scenario() {
    ScenarioConfig c;
    c.anchors = {{1, {-2.0, 0.0}}, {2, {2.0, 0.0}}, {3, {0.0, 2.0}}};
    c.olos_windows = {{{1}, 6.0, 8.0}, {{1, 2, 3}, 14.2, 16.2}};
    // curvy approach from ~25 m out, ending on the centroid
    c.waypoint_offsets = {
        {-24.0, 9.0}, {-19.0, 3.0}, {-14.0, 7.0}, {-9.5, 2.0},
        {-5.5, 5.0},  {-2.5, 1.5},  {0.0, 0.0},
    };
    return c;
}

namespace {

// Catmull-Rom interpolation between p1 and p2 (s in [0,1]).
Vec2 catmull_rom(const Vec2& p0, const Vec2& p1, const Vec2& p2, const Vec2& p3, double s) {
    const double s2 = s * s;
    const double s3 = s2 * s;
    return 0.5 * ((2.0 * p1) + (p2 - p0) * s +
                  (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * s2 +
                  (3.0 * p1 - 3.0 * p2 + p3 - p0) * s3);
}

struct ArcTable {
    std::vector<Vec2> pts;
    std::vector<double> s;  // cumulative arclength

    Vec2 at(double target) const {
        if (target <= 0.0) return pts.front();
        if (target >= s.back()) return pts.back();
        auto it = std::lower_bound(s.begin(), s.end(), target);
        const std::size_t hi = static_cast<std::size_t>(it - s.begin());
        const std::size_t lo = hi - 1;
        const double seg = s[hi] - s[lo];
        const double f = (seg > 0.0) ? (target - s[lo]) / seg : 0.0;
        return pts[lo] + (pts[hi] - pts[lo]) * f;
    }
};

ArcTable densify(const std::vector<Vec2>& wp) {
    constexpr int kSamplesPerSeg = 256;
    ArcTable t;
    t.pts.push_back(wp.front());
    t.s.push_back(0.0);
    const std::size_t n = wp.size();
    for (std::size_t seg = 0; seg + 1 < n; ++seg) {
        const Vec2& p0 = wp[(seg == 0) ? 0 : seg - 1];
        const Vec2& p1 = wp[seg];
        const Vec2& p2 = wp[seg + 1];
        const Vec2& p3 = wp[(seg + 2 < n) ? seg + 2 : n - 1];
        for (int k = 1; k <= kSamplesPerSeg; ++k) {
            const Vec2 p = catmull_rom(p0, p1, p2, p3, static_cast<double>(k) / kSamplesPerSeg);
            t.s.push_back(t.s.back() + (p - t.pts.back()).norm());
            t.pts.push_back(p);
        }
    }
    return t;
}

}  // namespace

std::vector<AgentState> gen_trajectory(const ScenarioConfig& config, Rng& rng) {
    config.validate();
    const int n_steps = config.n_steps();
    const Vec2 centroid = config.anchor_centroid();

    std::vector<Vec2> wp(config.waypoint_offsets.size());
    std::normal_distribution<double> jitter(0.0, config.waypoint_jitter);
    for (std::size_t i = 0; i < wp.size(); ++i) {
        wp[i] = centroid + config.waypoint_offsets[i];
        if (i > 0 && i + 1 < wp.size() && config.waypoint_jitter > 0.0)
            wp[i] += Vec2(jitter(rng), jitter(rng));
    }

    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double phase = 2.0 * M_PI * unif(rng);
    const double v0 = config.speed_nominal;
    const double amp = config.speed_mod_amp;
    const double om = 2.0 * M_PI / config.speed_mod_period;
    // s(t) = v0 t - (v0 amp / om) (cos(om t + phase) - cos(phase))
    auto arclen_at = [&](double t) {
        return v0 * t - v0 * amp / om * (std::cos(om * t + phase) - std::cos(phase));
    };
    const double target_len = arclen_at(config.duration);

    ArcTable table = densify(wp);
    // scale the curve about its end point so the total length matches the
    // distance budget of the speed profile
    const double scale = target_len / table.s.back();
    const Vec2 end = table.pts.back();
    for (Vec2& p : table.pts) p = end + (p - end) * scale;
    for (double& s : table.s) s *= scale;

    std::vector<AgentState> traj(n_steps);
    // walk the curve backwards from the end point: arclength remaining at
    // time t is target_len - s(t), so the path lands on the centroid at T
    Vec2 prev = table.at(0.0);
    for (int n = 0; n < n_steps; ++n) {
        const double t = (n + 1) * config.dt;
        const Vec2 p = table.at(arclen_at(t));
        traj[n].p = p;
        traj[n].v = (p - prev) * (1.0 / config.dt);
        prev = p;
    }
    return traj;
}

double los_amplitude(double d, const ScenarioConfig& config) {
    if (d < 0.1) d = 0.1;
    const double u_ref = std::pow(10.0, config.snr_ref_db / 20.0);
    const double expn = config.pathloss_power_domain ? 0.5 * config.pathloss_exponent
                                                     : config.pathloss_exponent;
    return u_ref * std::pow(d, -expn);
}

double sample_mp_delta(const NlosParams& params, Rng& rng) {
    // rejection from an Exp(gamma_f) proposal; acceptance 1 - e^{-delta/gamma_r}
    std::exponential_distribution<double> prop(1.0 / params.gamma_f);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (;;) {
        const double delta = prop(rng);
        if (unif(rng) < 1.0 - std::exp(-delta / params.gamma_r)) return delta;
    }
}

SimulatedScan gen_scan(const AgentState& x_true, const Anchor& anchor, int n,
                       const ScenarioConfig& config, Rng& rng) {
    const double t = n * config.dt;
    const double d_los = los_distance(x_true.p, anchor);
    const CrlbContext ctx{299792458.0, config.effective_bandwidth};

    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    SimulatedScan out;
    out.scan.anchor_id = anchor.id;
    out.scan.time_index = n;

    std::vector<Measurement> meas;
    int los_pos = -1;
    if (!config.is_olos(anchor.id, t)) {
        const double u_true = los_amplitude(d_los, config);
        // Rician draw: magnitude of the noncentral complex amplitude
        const double re = u_true + gauss(rng);
        const double im = gauss(rng);
        Measurement z;
        z.u_hat = std::hypot(re, im);
        z.sigma_d_hat = sigma_from_amplitude(z.u_hat, ctx);
        do {
            z.d_hat = d_los + z.sigma_d_hat * gauss(rng);
        } while (z.d_hat < 0.0 || z.d_hat > config.nlos.d_max);
        los_pos = static_cast<int>(meas.size());
        meas.push_back(z);
    }

    std::poisson_distribution<int> clutter(config.clutter_rate);
    const int k = (config.clutter_rate > 0.0) ? clutter(rng) : 0;
    for (int i = 0; i < k; ++i) {
        Measurement z;
        if (unif(rng) < config.nlos.p_mp) {
            do {
                z.d_hat = d_los + config.nlos.bias_b + sample_mp_delta(config.nlos, rng);
            } while (z.d_hat > config.nlos.d_max);
        } else {
            z.d_hat = config.nlos.d_max * unif(rng);
        }
        z.u_hat = std::sqrt(-2.0 * std::log(1.0 - unif(rng)));  // Rayleigh(1)
        z.sigma_d_hat = sigma_from_amplitude(z.u_hat, ctx);
        meas.push_back(z);
    }

    // shuffle so the LOS measurement position carries no information
    std::vector<std::size_t> order(meas.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    out.scan.measurements.resize(meas.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        out.scan.measurements[i] = meas[order[i]];
        if (los_pos >= 0 && order[i] == static_cast<std::size_t>(los_pos))
            out.los_index = static_cast<int>(i);
    }
    return out;
}

void write_scans(std::ostream& os, const std::vector<std::vector<SimulatedScan>>& scans,
                 double dt) {
    for (const auto& per_time : scans) {
        for (const SimulatedScan& s : per_time) {
            nlohmann::json rec;
            rec["n"] = s.scan.time_index;
            rec["t"] = s.scan.time_index * dt;
            rec["anchor"] = s.scan.anchor_id;
            rec["los_index"] = s.los_index;
            nlohmann::json meas = nlohmann::json::array();
            for (const Measurement& z : s.scan.measurements)
                meas.push_back({z.d_hat, z.u_hat, z.sigma_d_hat});
            rec["meas"] = std::move(meas);
            os << rec.dump() << '\n';
        }
    }
}

std::vector<std::vector<SimulatedScan>> read_scans(std::istream& is) {
    std::vector<std::vector<SimulatedScan>> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const nlohmann::json rec = nlohmann::json::parse(line);
        SimulatedScan s;
        s.scan.time_index = rec.at("n").get<int>();
        s.scan.anchor_id = rec.at("anchor").get<int>();
        s.los_index = rec.at("los_index").get<int>();
        for (const auto& m : rec.at("meas"))
            s.scan.measurements.push_back({m.at(0).get<double>(), m.at(1).get<double>(),
                                           m.at(2).get<double>()});
        const int n = s.scan.time_index;
        if (n < 1) throw std::invalid_argument("read_scans: time indices must start at 1");
        if (static_cast<int>(out.size()) < n) out.resize(n);
        out[n - 1].push_back(std::move(s));
    }
    return out;
}

}  // namespace adpda
