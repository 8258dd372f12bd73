#ifndef ADPDA_TYPES_HPP
#define ADPDA_TYPES_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace adpda {

/// 2-D vector in meters (or meters/second for velocities).
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }

    double norm() const { return std::hypot(x, y); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

/// Mobile agent state: position and velocity.
struct AgentState {
    Vec2 p;  // meters
    Vec2 v;  // meters/second
};

/// Fixed receiving anchor. Ids are 1-based and contiguous.
struct Anchor {
    int id = 0;
    Vec2 position;
};

/// One detected component: distance, normalized amplitude (sqrt SNR) and
/// the per-measurement distance standard deviation.
struct Measurement {
    double d_hat = 0.0;        // meters
    double u_hat = 0.0;        // dimensionless, >= detection threshold
    double sigma_d_hat = 0.0;  // meters, > 0
};

/// All measurements of one anchor at one time step.
struct Scan {
    int anchor_id = 0;
    int time_index = 0;
    std::vector<Measurement> measurements;
};

/// Parameters of the NLOS distance mixture (multipath + false alarm).
struct NlosParams {
    double p_mp = 0.9;     // weight of the multipath component
    double gamma_r = 1.5;  // rise distance, meters
    double gamma_f = 6.0;  // fall distance, meters
    double bias_b = 0.2;   // bias, meters
    double d_max = 50.0;   // maximum distance, meters

    void validate() const {
        if (!(p_mp >= 0.0 && p_mp <= 1.0))
            throw std::invalid_argument("NlosParams: p_mp must be in [0,1]");
        if (!(gamma_r > 0.0 && gamma_f > 0.0 && d_max > 0.0))
            throw std::invalid_argument("NlosParams: gamma_r, gamma_f, d_max must be > 0");
        if (!(bias_b >= 0.0))
            throw std::invalid_argument("NlosParams: bias_b must be >= 0");
    }
};

/// Amplitude model constants: detection threshold and upper support bound
/// of the amplitude prior.
struct AmplitudeParams {
    double gamma = 0.0;    // detection threshold, dimensionless
    double u_max = 100.0;  // upper amplitude bound, > gamma

    void validate() const {
        if (!(gamma >= 0.0))
            throw std::invalid_argument("AmplitudeParams: gamma must be >= 0");
        if (!(u_max > gamma))
            throw std::invalid_argument("AmplitudeParams: u_max must exceed gamma");
    }
};

/// Discrete LOS-probability grid with its Markov transition matrix.
/// transition[i][k] = Prob(q_n = values[i] | q_{n-1} = values[k]);
/// columns (fixed k) sum to one.
struct LosGrid {
    std::vector<double> values;                   // strictly increasing, in (0,1]
    std::vector<std::vector<double>> transition;  // Q x Q, column-stochastic

    std::size_t size() const { return values.size(); }

    void validate() const {
        const std::size_t q = values.size();
        if (q == 0) throw std::invalid_argument("LosGrid: empty value set");
        for (std::size_t i = 0; i < q; ++i) {
            if (!(values[i] > 0.0 && values[i] <= 1.0))
                throw std::invalid_argument("LosGrid: values must lie in (0,1]");
            if (i > 0 && !(values[i] > values[i - 1]))
                throw std::invalid_argument("LosGrid: values must be strictly increasing");
        }
        if (transition.size() != q)
            throw std::invalid_argument("LosGrid: transition matrix size mismatch");
        for (std::size_t k = 0; k < q; ++k) {
            double col = 0.0;
            for (std::size_t i = 0; i < q; ++i) {
                if (transition[i].size() != q)
                    throw std::invalid_argument("LosGrid: transition matrix not square");
                col += transition[i][k];
            }
            if (std::abs(col - 1.0) > 1e-12)
                throw std::invalid_argument("LosGrid: transition columns must sum to 1");
        }
    }
};

/// Euclidean distance between an agent position and an anchor.
inline double los_distance(const Vec2& p, const Anchor& anchor) {
    return (p - anchor.position).norm();
}

}  // namespace adpda

#endif  // ADPDA_TYPES_HPP
