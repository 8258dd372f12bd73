#ifndef ADPDA_MOTION_HPP
#define ADPDA_MOTION_HPP

#include <array>

#include "adpda/rng.hpp"
#include "adpda/types.hpp"

namespace adpda {

/// Constant-velocity / stochastic-acceleration kinematic model.
/// State ordering is [px py vx vy].
struct KinematicModel {
    double dt = 0.05;     // seconds
    double sigma_a = 0.3; // m/s^2, acceleration noise std

    std::array<std::array<double, 4>, 4> a_matrix() const {
        return {{{1, 0, dt, 0}, {0, 1, 0, dt}, {0, 0, 1, 0}, {0, 0, 0, 1}}};
    }
    std::array<std::array<double, 2>, 4> b_matrix() const {
        const double h = 0.5 * dt * dt;
        return {{{h, 0}, {0, h}, {dt, 0}, {0, dt}}};
    }
};

/// Gaussian random walk of the normalized amplitude, reflected at zero
/// and clipped at u_max.
struct AmplitudeWalk {
    double sigma_u = 0.2;
    double u_max = 100.0;
};

/// One draw of x_n = A x_{n-1} + B w_n with w ~ N(0, sigma_a^2 I).
AgentState sample_state_transition(const AgentState& x, const KinematicModel& model, Rng& rng);

/// One draw of u_n ~ N(u_{n-1}, sigma_u^2), reflected into [0, u_max].
double sample_amplitude_transition(double u, const AmplitudeWalk& walk, Rng& rng);

/// The 10-state LOS probability chain with values {0.1, ..., 1.0}.
LosGrid default_los_grid();

/// One prediction step of the LOS-probability PMF: transition * pmf.
/// Throws std::invalid_argument when the input is not normalized.
std::vector<double> propagate_q_pmf(const std::vector<double>& pmf, const LosGrid& grid);

}  // namespace adpda

#endif  // ADPDA_MOTION_HPP
