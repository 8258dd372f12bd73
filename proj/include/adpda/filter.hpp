#ifndef ADPDA_FILTER_HPP
#define ADPDA_FILTER_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "adpda/likelihoods.hpp"
#include "adpda/motion.hpp"
#include "adpda/rng.hpp"
#include "adpda/types.hpp"

namespace adpda {

/// Feature switches of the algorithm variants AL1..AL5. The ladder is
/// cumulative: AL1 = all off, AL2 = +track_q, AL3 = +use_amplitude,
/// AL4 = +nonuniform_nlos, AL5 = +crlb_sigma.
struct FilterFeatures {
    bool track_q = false;
    bool use_amplitude = false;
    bool nonuniform_nlos = false;
    bool crlb_sigma = false;

    static FilterFeatures variant(std::string_view name);
    std::string name() const;
};

struct FilterParams {
    KinematicModel kin;
    AmplitudeWalk walk;
    LosGrid grid;
    NlosParams nlos;
    AmplitudeParams amp;
    FilterFeatures features;
    double q_fixed = 0.999;     // q substitute when track_q is off
    double sigma_const = 0.1;   // meters, sigma substitute when crlb_sigma is off
    std::size_t r_init = 10000;
    std::size_t r_track = 1000;
    std::size_t r_u = 1000;
    double ess_ratio = 0.5;     // resample when ESS < ess_ratio * R
};

/// Joint filter belief: weighted agent-state particles, per-anchor
/// weighted amplitude particles and per-anchor LOS-probability PMFs.
struct Belief {
    std::vector<AgentState> x_particles;
    std::vector<double> x_weights;
    std::vector<std::vector<double>> u_particles;  // [anchor][particle]
    std::vector<std::vector<double>> u_weights;
    std::vector<std::vector<double>> q_pmf;        // [anchor][grid index]
    std::vector<double> q_values;                  // grid values backing q_pmf
};

struct Estimate {
    AgentState x;
    std::vector<double> u;  // per anchor
    std::vector<double> q;  // per anchor
};

/// Raised when every particle weight collapses to numerical zero.
class TrackLostError : public std::runtime_error {
  public:
    explicit TrackLostError(int time_index)
        : std::runtime_error("track lost at time index " + std::to_string(time_index)),
          time_index_(time_index) {}
    int time_index() const { return time_index_; }

  private:
    int time_index_;
};

double effective_sample_size(const std::vector<double>& weights);

/// Systematic resampling: returns r_out indices into the weight vector.
std::vector<std::size_t> systematic_resample(const std::vector<double>& weights,
                                             std::size_t r_out, Rng& rng);

/// Initial belief: positions uniform on discs of radius d_max around the
/// anchors, zero velocity, amplitudes uniform on (0, u_max], LOS PMF a
/// point mass at the top grid value.
Belief init_belief(const std::vector<Anchor>& anchors, double d_max,
                   const AmplitudeParams& amp, const LosGrid& grid,
                   std::size_t r_init, std::size_t r_u, Rng& rng);

/// Prediction step: propagates all three belief components, weights
/// unchanged.
Belief predict(const Belief& belief, const KinematicModel& kin, const AmplitudeWalk& walk,
               const LosGrid& grid, Rng& rng);

/// Per-particle measurement update weight of one anchor (the message from
/// the anchor's factor to the agent state). Linear domain.
std::vector<double> anchor_update_message(const Belief& belief, const Scan& scan,
                                          const Anchor& anchor, const FilterParams& params);

/// Full measurement update across all anchors: reweights agent particles,
/// amplitude particles and LOS PMFs, then resamples degenerate particle
/// sets. Throws TrackLostError when the posterior mass vanishes entirely.
Belief measurement_update(const Belief& belief, const std::vector<Scan>& scans,
                          const std::vector<Anchor>& anchors, const FilterParams& params,
                          Rng& rng);

/// MMSE estimates from the current belief.
Estimate estimate(const Belief& belief);

/// Resamples the agent particles down to r_track with uniform weights.
Belief downselect(const Belief& belief, std::size_t r_track, Rng& rng);

/// Convenience driver running init / predict / update / downselect over a
/// scan sequence.
class Filter {
  public:
    Filter(std::vector<Anchor> anchors, FilterParams params, std::uint64_t seed);

    struct StepResult {
        Estimate est;
        bool lost = false;  // update rejected this step, prediction kept
    };

    /// Processes one time step (one scan per anchor).
    StepResult step(const std::vector<Scan>& scans);

    const Belief& belief() const { return belief_; }
    const std::vector<Anchor>& anchors() const { return anchors_; }

  private:
    std::vector<Anchor> anchors_;
    FilterParams params_;
    Rng rng_;
    Belief belief_;
    bool updated_once_ = false;
};

}  // namespace adpda

#endif  // ADPDA_FILTER_HPP
