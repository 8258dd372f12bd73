#ifndef ADPDA_SIMULATOR_HPP
#define ADPDA_SIMULATOR_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "adpda/crlb.hpp"
#include "adpda/rng.hpp"
#include "adpda/types.hpp"

namespace adpda {

/// Time window during which the LOS to a subset of anchors is blocked.
struct OlosWindow {
    std::vector<int> anchor_ids;
    double start = 0.0;  // seconds
    double end = 0.0;
};

struct ScenarioConfig {
    std::vector<Anchor> anchors;
    double duration = 20.0;        // seconds
    double dt = 0.05;              // seconds
    double speed_nominal = 1.4;    // m/s
    double snr_ref_db = 30.0;      // component SNR at 1 m, dB
    double pathloss_exponent = 0.4;
    bool pathloss_power_domain = false;  // apply the exponent to SNR instead of amplitude
    double clutter_rate = 10.0;    // mean NLOS measurements per scan
    NlosParams nlos;
    double effective_bandwidth = 1.0e8;  // Hz
    std::vector<OlosWindow> olos_windows;
    // trajectory shape: offsets from the anchor centroid; the last entry is
    // the end point. Interior points receive Gaussian jitter per run.
    std::vector<Vec2> waypoint_offsets;
    double waypoint_jitter = 0.3;   // meters
    double speed_mod_amp = 0.15;    // relative speed modulation amplitude
    double speed_mod_period = 7.0;  // seconds

    int n_steps() const;
    Vec2 anchor_centroid() const;
    bool is_olos(int anchor_id, double t) const;
    void validate() const;
};

/// The default three-anchor scenario: curvy 20 s approach, partial OLOS of
/// anchor 1 on [6, 8] s and full OLOS on [14.2, 16.2] s.
ScenarioConfig default_scenario();

/// Curvy constant-ish-speed trajectory ending at the anchor centroid.
/// Velocities are finite differences of the positions over dt.
std::vector<AgentState> gen_trajectory(const ScenarioConfig& config, Rng& rng);

/// Deterministic LOS amplitude at distance d (path-loss law). d is clamped
/// below at 0.1 m.
double los_amplitude(double d, const ScenarioConfig& config);

/// One scan plus its association ground truth for diagnostics.
struct SimulatedScan {
    Scan scan;
    int los_index = -1;  // 0-based index of the LOS measurement, -1 if absent
};

/// Generates one anchor's scan at time index n: a LOS measurement unless
/// the anchor is obstructed, plus Poisson clutter from the NLOS mixture.
SimulatedScan gen_scan(const AgentState& x_true, const Anchor& anchor, int n,
                       const ScenarioConfig& config, Rng& rng);

/// Samples the excess-distance density of the multipath component.
double sample_mp_delta(const NlosParams& params, Rng& rng);

// ---- scan file interface (line-delimited JSON, one scan per line) -------

void write_scans(std::ostream& os, const std::vector<std::vector<SimulatedScan>>& scans,
                 double dt);
/// Reads scans grouped per time step (inner vector: one scan per anchor).
std::vector<std::vector<SimulatedScan>> read_scans(std::istream& is);

}  // namespace adpda

#endif  // ADPDA_SIMULATOR_HPP
