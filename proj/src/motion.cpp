#include "adpda/motion.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace adpda {

AgentState sample_state_transition(const AgentState& x, const KinematicModel& model, Rng& rng) {
    std::normal_distribution<double> acc(0.0, model.sigma_a);
    const double wx = (model.sigma_a > 0.0) ? acc(rng) : 0.0;
    const double wy = (model.sigma_a > 0.0) ? acc(rng) : 0.0;
    const double dt = model.dt;
    const double h = 0.5 * dt * dt;
    AgentState out;
    out.p = x.p + x.v * dt + Vec2(wx, wy) * h;
    out.v = x.v + Vec2(wx, wy) * dt;
    return out;
}

double sample_amplitude_transition(double u, const AmplitudeWalk& walk, Rng& rng) {
    std::normal_distribution<double> step(0.0, walk.sigma_u);
    double next = u + ((walk.sigma_u > 0.0) ? step(rng) : 0.0);
    next = std::abs(next);
    if (next > walk.u_max) next = walk.u_max;
    return next;
}

LosGrid default_los_grid() {
    constexpr int q = 10;
    LosGrid grid;
    grid.values.resize(q);
    for (int i = 0; i < q; ++i) grid.values[i] = 0.1 * (i + 1);
    grid.transition.assign(q, std::vector<double>(q, 0.0));
    // columns are the conditioning state
    grid.transition[0][0] = 0.9;
    grid.transition[1][0] = 0.1;
    grid.transition[q - 1][q - 1] = 0.95;
    grid.transition[q - 2][q - 1] = 0.05;
    for (int k = 1; k < q - 1; ++k) {
        grid.transition[k][k] = 0.85;
        grid.transition[k - 1][k] = 0.05;
        grid.transition[k + 1][k] = 0.1;
    }
    return grid;
}

std::vector<double> propagate_q_pmf(const std::vector<double>& pmf, const LosGrid& grid) {
    const std::size_t q = grid.size();
    if (pmf.size() != q)
        throw std::invalid_argument("propagate_q_pmf: pmf size mismatch");
    const double total = std::accumulate(pmf.begin(), pmf.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("propagate_q_pmf: pmf must sum to 1");
    std::vector<double> out(q, 0.0);
    for (std::size_t k = 0; k < q; ++k) {
        if (pmf[k] == 0.0) continue;
        for (std::size_t i = 0; i < q; ++i) out[i] += grid.transition[i][k] * pmf[k];
    }
    return out;
}

}  // namespace adpda
