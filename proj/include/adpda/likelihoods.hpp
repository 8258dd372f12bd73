#ifndef ADPDA_LIKELIHOODS_HPP
#define ADPDA_LIKELIHOODS_HPP

#include "adpda/types.hpp"

namespace adpda {

/// Association hypothesis: 0 means "no LOS measurement in the scan",
/// a in 1..M selects the LOS-originated measurement.
struct AssociationHypothesis {
    int a = 0;
};

// ---- special functions -------------------------------------------------

/// log of the modified Bessel function I0(x), x >= 0. Stable for large x.
double log_bessel_i0(double x);

/// Marcum Q-function Q1(a, b): tail probability P(X > b) of a Rician
/// variable with spread 1 and noncentrality a. Series evaluation, absolute
/// accuracy better than 1e-10.
double marcum_q1(double a, double b);

// ---- measurement-model densities ---------------------------------------

/// Gaussian LOS distance density: N(d_hat; ||p - anchor||, sigma_d_hat).
double f_los_distance(const Measurement& meas, const Vec2& p, const Anchor& anchor);

/// Multipath distance density: double-exponential in the excess distance
/// delta = d_hat - d_los - B; zero for delta <= 0.
double f_mp(double d_hat, const Vec2& p, const Anchor& anchor, const NlosParams& params);

/// False-alarm distance density: uniform on [0, d_max].
double f_fa(double d_hat, double d_max);

/// NLOS distance mixture: p_mp * f_mp + (1 - p_mp) * f_fa.
double f_nlos_distance(double d_hat, const Vec2& p, const Anchor& anchor,
                       const NlosParams& params);

/// LOS amplitude density: Rice(u_hat; spread 1, noncentrality u) truncated
/// below gamma and renormalized by the detection probability.
double f_los_amplitude(double u_hat, double u, const AmplitudeParams& params);

/// NLOS amplitude density: Rayleigh(spread 1) truncated below gamma and
/// renormalized.
double f_nlos_amplitude(double u_hat, const AmplitudeParams& params);

/// Detection probability P(u_hat > gamma) under Rice(1, u) = Q1(u, gamma).
double detection_prob(double u, double gamma);

// Log-domain variants of the amplitude ratio, used by the filter hot path.
// log [ f_los_amplitude(u_hat, u) / f_nlos_amplitude(u_hat) ].
double log_amplitude_ratio(double u_hat, double u, const AmplitudeParams& params);

// ---- association and joint factors -------------------------------------

/// Prior association weight h(a, M; p_e): p_e / M for a in 1..M and
/// (1 - p_e) for a = 0. Throws std::domain_error for a outside 0..M.
double association_prior(const AssociationHypothesis& a, int m_count, double p_e);

/// Likelihood ratio comparing LOS vs NLOS explanations of one measurement:
/// [f_L(d) f_L(u)] / [f_NL(d) f_NL(u)]. Throws std::domain_error when
/// meas.d_hat lies outside [0, d_max].
double likelihood_ratio(const Measurement& meas, const Vec2& p, const Anchor& anchor,
                        double u, const NlosParams& nlos, const AmplitudeParams& amp);

/// Pseudo-likelihood of a scan given position, amplitude and association:
/// prod_m f_NL(d_m) times the likelihood ratio of the selected measurement
/// (times 1 for a = 0). Evaluated in the log domain internally.
double pseudo_likelihood(const Scan& scan, const Vec2& p, double u,
                         const AssociationHypothesis& a, const Anchor& anchor,
                         const NlosParams& nlos, const AmplitudeParams& amp);

/// The per-anchor posterior factor: association prior with
/// p_e = detection_prob(u, gamma) * q, times the pseudo-likelihood.
double joint_factor(const Scan& scan, const Vec2& p, double u,
                    const AssociationHypothesis& a, double q, const Anchor& anchor,
                    const NlosParams& nlos, const AmplitudeParams& amp);

}  // namespace adpda

#endif  // ADPDA_LIKELIHOODS_HPP
