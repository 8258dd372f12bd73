#include "adpda/crlb.hpp"

#include <cmath>
#include <stdexcept>

namespace adpda {

double sigma_from_amplitude(double u_hat, const CrlbContext& ctx) {
    ctx.validate();
    if (!(u_hat > 0.0))
        throw std::domain_error("sigma_from_amplitude: u_hat must be > 0");
    return ctx.c / (std::sqrt(8.0) * M_PI * ctx.beta * u_hat);
}

double sp_crlb(const Vec2& p, const std::vector<Anchor>& anchors,
               const std::vector<double>& sigmas) {
    if (anchors.size() < 2)
        throw std::invalid_argument("sp_crlb: at least two anchors required");
    if (sigmas.size() != anchors.size())
        throw std::invalid_argument("sp_crlb: one sigma per anchor required");

    // F = sum_j (1/sigma_j^2) e_j e_j^T, e_j the unit bearing anchor -> p
    double fxx = 0.0, fxy = 0.0, fyy = 0.0;
    for (std::size_t j = 0; j < anchors.size(); ++j) {
        if (!(sigmas[j] > 0.0))
            throw std::invalid_argument("sp_crlb: sigmas must be > 0");
        Vec2 d = p - anchors[j].position;
        const double r = d.norm();
        if (r == 0.0)
            throw std::domain_error("sp_crlb: position coincides with an anchor");
        const double ex = d.x / r;
        const double ey = d.y / r;
        const double w = 1.0 / (sigmas[j] * sigmas[j]);
        fxx += w * ex * ex;
        fxy += w * ex * ey;
        fyy += w * ey * ey;
    }
    const double det = fxx * fyy - fxy * fxy;
    const double scale = fxx + fyy;
    if (!(det > 1e-12 * scale * scale))
        throw std::domain_error("sp_crlb: singular Fisher matrix (collinear geometry)");
    // trace(F^-1) = (fxx + fyy) / det
    return std::sqrt((fxx + fyy) / det);
}

}  // namespace adpda
