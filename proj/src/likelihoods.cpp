#include "adpda/likelihoods.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace adpda {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double log_gaussian(double x, double mean, double sigma) {
    const double z = (x - mean) / sigma;
    return -0.5 * z * z - std::log(sigma) - 0.5 * kLog2Pi;
}

}  // namespace

double log_bessel_i0(double x) {
    if (x < 0.0) x = -x;
    if (x < 40.0) {
        return std::log(std::cyl_bessel_i(0.0, x));
    }
    // Asymptotic expansion: I0(x) ~ e^x / sqrt(2 pi x) * sum a_k / x^k
    static const double a[] = {
        0.125,
        0.0703125,
        0.0732421875,
        0.112152099609375,
        0.22710800170898438,
        0.5725014209747314,
        1.7277275025844574,
        6.074042001273483,
    };
    double inv = 1.0 / x;
    double term = 1.0;
    double sum = 0.0;
    for (double ak : a) {
        term *= inv;
        sum += ak * term;
    }
    return x - 0.5 * std::log(2.0 * M_PI * x) + std::log1p(sum);
}

double marcum_q1(double a, double b) {
    if (a < 0.0 || b < 0.0)
        throw std::invalid_argument("marcum_q1: arguments must be non-negative");
    if (b == 0.0) return 1.0;
    const double la = 0.5 * a * a;  // Poisson mean of the mixture index
    const double lb = 0.5 * b * b;

    // Q1(a,b) = sum_k Pois(k; la) * P(Pois(lb) <= k).  Terms are computed
    // from logs so that both very small and very large means are handled.
    const int kmax = static_cast<int>(std::ceil(la + 12.0 * std::sqrt(la + 1.0) + 40.0));
    const double log_la = (la > 0.0) ? std::log(la) : -std::numeric_limits<double>::infinity();
    const double log_lb = std::log(lb);

    double q = 0.0;
    double inner = 0.0;  // cumulative Poisson(lb) CDF up to k
    for (int k = 0; k <= kmax; ++k) {
        const double log_pb = -lb + k * log_lb - std::lgamma(k + 1.0);
        inner += std::exp(log_pb);
        double log_pa;
        if (la == 0.0) {
            log_pa = (k == 0) ? 0.0 : -std::numeric_limits<double>::infinity();
        } else {
            log_pa = -la + k * log_la - std::lgamma(k + 1.0);
        }
        q += std::exp(log_pa) * std::min(inner, 1.0);
        if (la == 0.0 && k == 0) break;
    }
    return std::min(q, 1.0);
}

double f_los_distance(const Measurement& meas, const Vec2& p, const Anchor& anchor) {
    if (!(meas.sigma_d_hat > 0.0))
        throw std::invalid_argument("f_los_distance: sigma_d_hat must be > 0");
    return std::exp(log_gaussian(meas.d_hat, los_distance(p, anchor), meas.sigma_d_hat));
}

double f_mp(double d_hat, const Vec2& p, const Anchor& anchor, const NlosParams& params) {
    params.validate();
    const double delta = d_hat - los_distance(p, anchor) - params.bias_b;
    if (delta <= 0.0) return 0.0;
    const double gr = params.gamma_r;
    const double gf = params.gamma_f;
    return (gf + gr) / (gf * gf) * (1.0 - std::exp(-delta / gr)) * std::exp(-delta / gf);
}

double f_fa(double d_hat, double d_max) {
    if (!(d_max > 0.0)) throw std::invalid_argument("f_fa: d_max must be > 0");
    return (d_hat >= 0.0 && d_hat <= d_max) ? 1.0 / d_max : 0.0;
}

double f_nlos_distance(double d_hat, const Vec2& p, const Anchor& anchor,
                       const NlosParams& params) {
    return params.p_mp * f_mp(d_hat, p, anchor, params) +
           (1.0 - params.p_mp) * f_fa(d_hat, params.d_max);
}

double f_los_amplitude(double u_hat, double u, const AmplitudeParams& params) {
    params.validate();
    if (!(u >= 0.0)) throw std::invalid_argument("f_los_amplitude: u must be >= 0");
    if (u_hat < params.gamma || u_hat <= 0.0) return 0.0;
    // Rice(u_hat; 1, u) = u_hat exp(-(u_hat^2+u^2)/2) I0(u_hat u)
    const double log_rice = std::log(u_hat) - 0.5 * (u_hat * u_hat + u * u) +
                            log_bessel_i0(u_hat * u);
    const double norm = (params.gamma == 0.0) ? 1.0 : marcum_q1(u, params.gamma);
    return std::exp(log_rice) / norm;
}

double f_nlos_amplitude(double u_hat, const AmplitudeParams& params) {
    params.validate();
    if (u_hat < params.gamma || u_hat <= 0.0) return 0.0;
    const double g = params.gamma;
    return u_hat * std::exp(-0.5 * (u_hat * u_hat - g * g));
}

double detection_prob(double u, double gamma) {
    if (gamma == 0.0) return 1.0;
    return marcum_q1(u, gamma);
}

double log_amplitude_ratio(double u_hat, double u, const AmplitudeParams& params) {
    // Rice/Rayleigh with matched truncation; the u_hat prefactors cancel.
    const double g = params.gamma;
    double lr = log_bessel_i0(u_hat * u) - 0.5 * u * u;
    if (g > 0.0) lr += -0.5 * g * g - std::log(marcum_q1(u, g));
    return lr;
}

double association_prior(const AssociationHypothesis& a, int m_count, double p_e) {
    if (!(p_e >= 0.0 && p_e <= 1.0))
        throw std::invalid_argument("association_prior: p_e must be in [0,1]");
    if (m_count < 0)
        throw std::invalid_argument("association_prior: m_count must be >= 0");
    if (a.a < 0 || a.a > m_count)
        throw std::domain_error("association_prior: hypothesis outside 0..M");
    if (a.a == 0) return 1.0 - p_e;
    return p_e / m_count;
}

double likelihood_ratio(const Measurement& meas, const Vec2& p, const Anchor& anchor,
                        double u, const NlosParams& nlos, const AmplitudeParams& amp) {
    if (meas.d_hat < 0.0 || meas.d_hat > nlos.d_max)
        throw std::domain_error("likelihood_ratio: d_hat outside [0, d_max]");
    const double num_d = f_los_distance(meas, p, anchor);
    const double den_d = f_nlos_distance(meas.d_hat, p, anchor, nlos);
    const double amp_ratio = std::exp(log_amplitude_ratio(meas.u_hat, u, amp));
    return num_d / den_d * amp_ratio;
}

double pseudo_likelihood(const Scan& scan, const Vec2& p, double u,
                         const AssociationHypothesis& a, const Anchor& anchor,
                         const NlosParams& nlos, const AmplitudeParams& amp) {
    const int m = static_cast<int>(scan.measurements.size());
    if (a.a < 0 || a.a > m)
        throw std::domain_error("pseudo_likelihood: hypothesis outside 0..M");
    double log_w = 0.0;
    for (const Measurement& z : scan.measurements) {
        if (z.d_hat < 0.0 || z.d_hat > nlos.d_max)
            throw std::domain_error("pseudo_likelihood: d_hat outside [0, d_max]");
        log_w += std::log(f_nlos_distance(z.d_hat, p, anchor, nlos));
    }
    if (a.a > 0) {
        log_w += std::log(
            likelihood_ratio(scan.measurements[a.a - 1], p, anchor, u, nlos, amp));
    }
    return std::exp(log_w);
}

double joint_factor(const Scan& scan, const Vec2& p, double u,
                    const AssociationHypothesis& a, double q, const Anchor& anchor,
                    const NlosParams& nlos, const AmplitudeParams& amp) {
    const int m = static_cast<int>(scan.measurements.size());
    const double p_e = detection_prob(u, amp.gamma) * q;
    return association_prior(a, m, p_e) * pseudo_likelihood(scan, p, u, a, anchor, nlos, amp);
}

}  // namespace adpda
