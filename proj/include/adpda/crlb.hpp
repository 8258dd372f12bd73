#ifndef ADPDA_CRLB_HPP
#define ADPDA_CRLB_HPP

#include <vector>

#include "adpda/types.hpp"

namespace adpda {

struct CrlbContext {
    double c = 299792458.0;  // speed of light, m/s
    double beta = 1.0e8;     // effective bandwidth, Hz

    void validate() const {
        if (!(c > 0.0 && beta > 0.0))
            throw std::invalid_argument("CrlbContext: c and beta must be > 0");
    }
};

/// Range standard deviation implied by a normalized amplitude:
/// sigma = c / (sqrt(8) pi beta u_hat).
double sigma_from_amplitude(double u_hat, const CrlbContext& ctx);

/// Position error bound from single-scan LOS ranges: sqrt(trace(F^-1))
/// with F the range-only Fisher information at position p.
/// Throws std::domain_error for degenerate (collinear) geometry.
double sp_crlb(const Vec2& p, const std::vector<Anchor>& anchors,
               const std::vector<double>& sigmas);

}  // namespace adpda

#endif  // ADPDA_CRLB_HPP
