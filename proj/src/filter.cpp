#include "adpda/filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace adpda {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// linear-domain floor of 1e-300 applied to each anchor message before the
// product across anchors
constexpr double kLogFloor = -690.77552789821368;
constexpr double kLogSqrt2Pi = 0.91893853320467274;

double clamp_log(double lx) {
    if (lx == kNegInf) return kNegInf;  // a true zero stays zero
    return std::max(lx, kLogFloor);
}

double logsumexp(const double* v, std::size_t n) {
    double mx = kNegInf;
    for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, v[i]);
    if (mx == kNegInf) return kNegInf;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i] - mx);
    return mx + std::log(s);
}

double lse2(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double mx = std::max(a, b);
    return mx + std::log(std::exp(a - mx) + std::exp(b - mx));
}

void normalize(std::vector<double>& w) {
    const double s = std::accumulate(w.begin(), w.end(), 0.0);
    if (s > 0.0)
        for (double& x : w) x /= s;
}

// Per-anchor intermediates shared by the xi / nu / beta messages.
struct AnchorCache {
    int m = 0;
    double qbar = 0.0;
    double a0 = 0.0;                // E_u[P_D(u)]
    std::vector<double> pd_u;       // [r]
    std::vector<double> log_ratio;  // [m * Ru + r], empty when amplitude is off
    std::vector<double> log_a;      // [m]: log E_u[P_D(u) ratio_m(u)]
    std::vector<double> log_pi_nl;  // [i]: log prod_m f_NL(d_m | p_i)
    std::vector<double> log_ld;     // [m * Rx + i]: log f_L/f_NL per measurement
    std::vector<double> log_xi;     // [i], unclamped
};

AnchorCache build_anchor_cache(const Belief& belief, const Scan& scan, const Anchor& anchor,
                               const FilterParams& params) {
    if (scan.anchor_id != anchor.id)
        throw std::invalid_argument("measurement update: scan/anchor id mismatch");
    const std::size_t j = static_cast<std::size_t>(anchor.id - 1);
    if (j >= belief.u_particles.size() || j >= belief.q_pmf.size())
        throw std::invalid_argument("measurement update: anchor id outside belief");

    const FilterFeatures& feat = params.features;
    const double gamma = params.amp.gamma;
    const std::size_t rx = belief.x_particles.size();
    const std::size_t ru = belief.u_particles[j].size();
    const std::vector<double>& u_vals = belief.u_particles[j];
    const std::vector<double>& u_w = belief.u_weights[j];

    AnchorCache c;
    c.m = static_cast<int>(scan.measurements.size());
    for (const Measurement& z : scan.measurements) {
        if (z.d_hat < 0.0 || z.d_hat > params.nlos.d_max)
            throw std::domain_error("measurement update: d_hat outside [0, d_max]");
        if (z.u_hat < gamma)
            throw std::domain_error("measurement update: u_hat below detection threshold");
        if (feat.crlb_sigma && !(z.sigma_d_hat > 0.0))
            throw std::invalid_argument("measurement update: sigma_d_hat must be > 0");
    }

    if (feat.track_q) {
        c.qbar = 0.0;
        for (std::size_t k = 0; k < params.grid.size(); ++k)
            c.qbar += params.grid.values[k] * belief.q_pmf[j][k];
    } else {
        c.qbar = params.q_fixed;
    }

    // amplitude-side expectations over the u particles
    c.pd_u.resize(ru);
    c.a0 = 0.0;
    for (std::size_t r = 0; r < ru; ++r) {
        c.pd_u[r] = detection_prob(u_vals[r], gamma);
        c.a0 += u_w[r] * c.pd_u[r];
    }
    c.log_a.assign(c.m, (c.a0 > 0.0) ? std::log(c.a0) : kNegInf);
    if (feat.use_amplitude && c.m > 0) {
        // per-u offset of the log amplitude ratio; the I0 term is per entry
        std::vector<double> off(ru);
        for (std::size_t r = 0; r < ru; ++r) {
            off[r] = -0.5 * u_vals[r] * u_vals[r];
            if (gamma > 0.0)
                off[r] += -0.5 * gamma * gamma - std::log(marcum_q1(u_vals[r], gamma));
        }
        c.log_ratio.resize(static_cast<std::size_t>(c.m) * ru);
        std::vector<double> terms(ru);
        for (int mi = 0; mi < c.m; ++mi) {
            const double u_hat = scan.measurements[mi].u_hat;
            double* row = &c.log_ratio[static_cast<std::size_t>(mi) * ru];
            for (std::size_t r = 0; r < ru; ++r) {
                row[r] = log_bessel_i0(u_hat * u_vals[r]) + off[r];
                const double wpd = u_w[r] * c.pd_u[r];
                terms[r] = (wpd > 0.0) ? std::log(wpd) + row[r] : kNegInf;
            }
            c.log_a[mi] = logsumexp(terms.data(), ru);
        }
    }

    // distance-side terms per agent particle
    const NlosParams& nl = params.nlos;
    const double p_mp = feat.nonuniform_nlos ? nl.p_mp : 0.0;
    const double fa_term = (1.0 - p_mp) / nl.d_max;
    const double cmp = p_mp * (nl.gamma_f + nl.gamma_r) / (nl.gamma_f * nl.gamma_f);
    const double inv_gr = 1.0 / nl.gamma_r;
    const double inv_gf = 1.0 / nl.gamma_f;

    std::vector<double> inv_sig(c.m), log_norm(c.m), d_hat(c.m);
    for (int mi = 0; mi < c.m; ++mi) {
        const double sig =
            feat.crlb_sigma ? scan.measurements[mi].sigma_d_hat : params.sigma_const;
        inv_sig[mi] = 1.0 / sig;
        log_norm[mi] = -std::log(sig) - kLogSqrt2Pi;
        d_hat[mi] = scan.measurements[mi].d_hat;
    }

    c.log_pi_nl.assign(rx, 0.0);
    c.log_ld.resize(static_cast<std::size_t>(c.m) * rx);
    for (std::size_t i = 0; i < rx; ++i) {
        const double dlos = los_distance(belief.x_particles[i].p, anchor);
        double lpn = 0.0;
        for (int mi = 0; mi < c.m; ++mi) {
            double fnl = fa_term;
            if (cmp > 0.0) {
                const double delta = d_hat[mi] - dlos - nl.bias_b;
                if (delta > 0.0)
                    fnl += cmp * (1.0 - std::exp(-delta * inv_gr)) * std::exp(-delta * inv_gf);
            }
            const double log_fnl = std::log(fnl);
            lpn += log_fnl;
            const double z = (d_hat[mi] - dlos) * inv_sig[mi];
            c.log_ld[static_cast<std::size_t>(mi) * rx + i] =
                -0.5 * z * z + log_norm[mi] - log_fnl;
        }
        c.log_pi_nl[i] = lpn;
    }

    // xi message per agent particle
    c.log_xi.resize(rx);
    const double t0 = (c.qbar * c.a0 < 1.0) ? std::log1p(-c.qbar * c.a0) : kNegInf;
    if (c.m == 0) {
        std::fill(c.log_xi.begin(), c.log_xi.end(), t0);
        return c;
    }
    const double lqm = std::log(c.qbar / c.m);
    for (std::size_t i = 0; i < rx; ++i) {
        double acc = t0;
        for (int mi = 0; mi < c.m; ++mi) {
            const double t = lqm + c.log_ld[static_cast<std::size_t>(mi) * rx + i] +
                             c.log_a[mi];
            acc = lse2(acc, t);
        }
        c.log_xi[i] = c.log_pi_nl[i] + acc;
    }
    return c;
}

std::size_t scan_for_anchor(const std::vector<Scan>& scans, int anchor_id) {
    std::size_t found = scans.size();
    for (std::size_t s = 0; s < scans.size(); ++s) {
        if (scans[s].anchor_id == anchor_id) {
            if (found != scans.size())
                throw std::invalid_argument("measurement update: duplicate scan for anchor");
            found = s;
        }
    }
    if (found == scans.size())
        throw std::invalid_argument("measurement update: missing scan for anchor");
    return found;
}

}  // namespace

FilterFeatures FilterFeatures::variant(std::string_view name) {
    FilterFeatures f;
    int level = 0;
    if (name == "AL1") level = 1;
    else if (name == "AL2") level = 2;
    else if (name == "AL3") level = 3;
    else if (name == "AL4") level = 4;
    else if (name == "AL5") level = 5;
    else throw std::invalid_argument("unknown algorithm variant: " + std::string(name));
    f.track_q = level >= 2;
    f.use_amplitude = level >= 3;
    f.nonuniform_nlos = level >= 4;
    f.crlb_sigma = level >= 5;
    return f;
}

std::string FilterFeatures::name() const {
    if (crlb_sigma && nonuniform_nlos && use_amplitude && track_q) return "AL5";
    if (nonuniform_nlos && use_amplitude && track_q && !crlb_sigma) return "AL4";
    if (use_amplitude && track_q && !nonuniform_nlos && !crlb_sigma) return "AL3";
    if (track_q && !use_amplitude && !nonuniform_nlos && !crlb_sigma) return "AL2";
    if (!track_q && !use_amplitude && !nonuniform_nlos && !crlb_sigma) return "AL1";
    return "custom";
}

double effective_sample_size(const std::vector<double>& weights) {
    double s2 = 0.0;
    for (double w : weights) s2 += w * w;
    return (s2 > 0.0) ? 1.0 / s2 : 0.0;
}

std::vector<std::size_t> systematic_resample(const std::vector<double>& weights,
                                             std::size_t r_out, Rng& rng) {
    const std::size_t n = weights.size();
    std::vector<std::size_t> idx(r_out);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double step = 1.0 / static_cast<double>(r_out);
    double pos = unif(rng) * step;
    double cum = weights.empty() ? 0.0 : weights[0];
    std::size_t i = 0;
    for (std::size_t k = 0; k < r_out; ++k) {
        while (cum < pos && i + 1 < n) cum += weights[++i];
        idx[k] = i;
        pos += step;
    }
    return idx;
}

Belief init_belief(const std::vector<Anchor>& anchors, double d_max,
                   const AmplitudeParams& amp, const LosGrid& grid,
                   std::size_t r_init, std::size_t r_u, Rng& rng) {
    if (anchors.empty() || r_init == 0)
        throw std::invalid_argument("init_belief: need at least one anchor and one particle");
    amp.validate();
    grid.validate();

    Belief b;
    b.x_particles.resize(r_init);
    b.x_weights.assign(r_init, 1.0 / static_cast<double>(r_init));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, anchors.size() - 1);
    for (std::size_t i = 0; i < r_init; ++i) {
        const Anchor& a = anchors[pick(rng)];
        const double r = d_max * std::sqrt(unif(rng));
        const double phi = 2.0 * M_PI * unif(rng);
        b.x_particles[i].p = a.position + Vec2(r * std::cos(phi), r * std::sin(phi));
        b.x_particles[i].v = Vec2(0.0, 0.0);
    }

    const std::size_t j_count = anchors.size();
    b.u_particles.assign(j_count, std::vector<double>(r_u));
    b.u_weights.assign(j_count, std::vector<double>(r_u, 1.0 / static_cast<double>(r_u)));
    for (std::size_t j = 0; j < j_count; ++j)
        for (std::size_t r = 0; r < r_u; ++r)
            b.u_particles[j][r] = amp.u_max * unif(rng);

    std::vector<double> pmf(grid.size(), 0.0);
    pmf.back() = 1.0;  // q_0 = 1
    b.q_pmf.assign(j_count, pmf);
    b.q_values = grid.values;
    return b;
}

Belief predict(const Belief& belief, const KinematicModel& kin, const AmplitudeWalk& walk,
               const LosGrid& grid, Rng& rng) {
    Belief out = belief;
    for (AgentState& x : out.x_particles) x = sample_state_transition(x, kin, rng);
    for (std::size_t j = 0; j < out.u_particles.size(); ++j)
        for (double& u : out.u_particles[j]) u = sample_amplitude_transition(u, walk, rng);
    for (std::size_t j = 0; j < out.q_pmf.size(); ++j)
        out.q_pmf[j] = propagate_q_pmf(out.q_pmf[j], grid);
    return out;
}

std::vector<double> anchor_update_message(const Belief& belief, const Scan& scan,
                                          const Anchor& anchor, const FilterParams& params) {
    AnchorCache c = build_anchor_cache(belief, scan, anchor, params);
    std::vector<double> xi(c.log_xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i) xi[i] = std::exp(c.log_xi[i]);
    return xi;
}

Belief measurement_update(const Belief& belief, const std::vector<Scan>& scans,
                          const std::vector<Anchor>& anchors, const FilterParams& params,
                          Rng& rng) {
    const std::size_t j_count = anchors.size();
    if (scans.size() != j_count)
        throw std::invalid_argument("measurement update: one scan per anchor required");
    const std::size_t rx = belief.x_particles.size();

    std::vector<AnchorCache> caches;
    caches.reserve(j_count);
    int time_index = 0;
    for (std::size_t j = 0; j < j_count; ++j) {
        const Scan& scan = scans[scan_for_anchor(scans, anchors[j].id)];
        time_index = scan.time_index;
        caches.push_back(build_anchor_cache(belief, scan, anchors[j], params));
    }

    Belief out = belief;

    // posterior agent weights: prior times the product of all xi messages
    std::vector<double> log_prior(rx);
    for (std::size_t i = 0; i < rx; ++i)
        log_prior[i] = (belief.x_weights[i] > 0.0) ? std::log(belief.x_weights[i]) : kNegInf;

    std::vector<double> log_post(rx);
    double mx = kNegInf;
    for (std::size_t i = 0; i < rx; ++i) {
        double s = log_prior[i];
        for (const AnchorCache& c : caches) {
            const double lx = c.log_xi[i];
            s = (lx == kNegInf) ? kNegInf : s + clamp_log(lx);
        }
        log_post[i] = s;
        mx = std::max(mx, s);
    }
    if (mx == kNegInf) throw TrackLostError(time_index);
    for (std::size_t i = 0; i < rx; ++i) out.x_weights[i] = std::exp(log_post[i] - mx);
    normalize(out.x_weights);

    // per-anchor extrinsic message and the u / q updates
    std::vector<double> chi(rx), t(rx);
    for (std::size_t j = 0; j < j_count; ++j) {
        const AnchorCache& c = caches[j];
        const std::size_t bj = static_cast<std::size_t>(anchors[j].id - 1);
        const std::size_t ru = belief.u_particles[bj].size();
        const int m = c.m;

        double cx = kNegInf;
        for (std::size_t i = 0; i < rx; ++i) {
            double s = log_prior[i];
            for (std::size_t jp = 0; jp < j_count; ++jp) {
                if (jp == j) continue;
                const double lx = caches[jp].log_xi[i];
                s = (lx == kNegInf) ? kNegInf : s + clamp_log(lx);
            }
            chi[i] = s;
            cx = std::max(cx, s);
        }
        if (cx == kNegInf) continue;  // no extrinsic information survives
        for (std::size_t i = 0; i < rx; ++i) chi[i] = std::exp(chi[i] - cx);
        normalize(chi);

        // C0 = E_chi[prod f_NL], D_m = E_chi[prod f_NL * ld_m]; shifted by the
        // largest log prod f_NL, the shift cancels in the normalizations below
        double shift = kNegInf;
        for (std::size_t i = 0; i < rx; ++i) shift = std::max(shift, c.log_pi_nl[i]);
        double c0 = 0.0;
        std::vector<double> d_m(m, 0.0);
        for (std::size_t i = 0; i < rx; ++i) {
            const double ti = chi[i] * std::exp(c.log_pi_nl[i] - shift);
            t[i] = ti;
            c0 += ti;
        }
        for (int mi = 0; mi < m; ++mi) {
            const double* ld = &c.log_ld[static_cast<std::size_t>(mi) * rx];
            double acc = 0.0;
            for (std::size_t i = 0; i < rx; ++i)
                if (t[i] > 0.0) acc += t[i] * std::exp(ld[i]);
            d_m[mi] = acc;
        }

        // nu message over the u particles
        std::vector<double> log_nu(ru);
        std::vector<double> log_d(m);
        for (int mi = 0; mi < m; ++mi)
            log_d[mi] = (d_m[mi] > 0.0) ? std::log(d_m[mi]) : kNegInf;
        for (std::size_t r = 0; r < ru; ++r) {
            const double pd = c.pd_u[r];
            const double miss = c0 * (1.0 - c.qbar * pd);
            double ln = (miss > 0.0) ? std::log(miss) : kNegInf;
            if (m > 0) {
                double inner = kNegInf;
                if (!c.log_ratio.empty()) {
                    for (int mi = 0; mi < m; ++mi)
                        inner = lse2(inner,
                                     log_d[mi] + c.log_ratio[static_cast<std::size_t>(mi) * ru + r]);
                } else {
                    double s = 0.0;
                    for (int mi = 0; mi < m; ++mi) s += d_m[mi];
                    inner = (s > 0.0) ? std::log(s) : kNegInf;
                }
                const double hit = c.qbar * pd / m;
                if (hit > 0.0) ln = lse2(ln, std::log(hit) + inner);
            }
            log_nu[r] = ln;
        }
        double numax = kNegInf;
        for (double v : log_nu) numax = std::max(numax, v);
        if (numax != kNegInf) {
            std::vector<double>& uw = out.u_weights[bj];
            double s = 0.0;
            for (std::size_t r = 0; r < ru; ++r) {
                uw[r] = belief.u_weights[bj][r] * std::exp(log_nu[r] - numax);
                s += uw[r];
            }
            if (s > 0.0)
                for (double& w : uw) w /= s;
            else
                uw = belief.u_weights[bj];
        }

        // beta message over the LOS-probability grid
        if (params.features.track_q) {
            const std::size_t q = params.grid.size();
            double s_log = kNegInf;
            for (int mi = 0; mi < m; ++mi) s_log = lse2(s_log, log_d[mi] + c.log_a[mi]);
            std::vector<double> log_beta(q);
            double bmax = kNegInf;
            for (std::size_t k = 0; k < q; ++k) {
                const double w = params.grid.values[k];
                const double miss = c0 * (1.0 - w * c.a0);
                double lb = (miss > 0.0) ? std::log(miss) : kNegInf;
                if (m > 0 && s_log != kNegInf) lb = lse2(lb, std::log(w / m) + s_log);
                log_beta[k] = lb;
                bmax = std::max(bmax, lb);
            }
            if (bmax != kNegInf) {
                std::vector<double>& pmf = out.q_pmf[bj];
                double s = 0.0;
                for (std::size_t k = 0; k < q; ++k) {
                    pmf[k] = belief.q_pmf[bj][k] * std::exp(log_beta[k] - bmax);
                    s += pmf[k];
                }
                if (s > 0.0)
                    for (double& x : pmf) x /= s;
                else
                    pmf = belief.q_pmf[bj];
            }
        }
    }

    // resample degenerate particle sets
    if (effective_sample_size(out.x_weights) < params.ess_ratio * static_cast<double>(rx)) {
        const std::vector<std::size_t> idx = systematic_resample(out.x_weights, rx, rng);
        std::vector<AgentState> xs(rx);
        for (std::size_t k = 0; k < rx; ++k) xs[k] = out.x_particles[idx[k]];
        out.x_particles = std::move(xs);
        out.x_weights.assign(rx, 1.0 / static_cast<double>(rx));
    }
    for (std::size_t j = 0; j < j_count; ++j) {
        const std::size_t ru = out.u_particles[j].size();
        if (effective_sample_size(out.u_weights[j]) <
            params.ess_ratio * static_cast<double>(ru)) {
            const std::vector<std::size_t> idx = systematic_resample(out.u_weights[j], ru, rng);
            std::vector<double> us(ru);
            for (std::size_t k = 0; k < ru; ++k) us[k] = out.u_particles[j][idx[k]];
            out.u_particles[j] = std::move(us);
            out.u_weights[j].assign(ru, 1.0 / static_cast<double>(ru));
        }
    }
    return out;
}

Estimate estimate(const Belief& belief) {
    Estimate e;
    for (std::size_t i = 0; i < belief.x_particles.size(); ++i) {
        const double w = belief.x_weights[i];
        e.x.p += belief.x_particles[i].p * w;
        e.x.v += belief.x_particles[i].v * w;
    }
    const std::size_t j_count = belief.u_particles.size();
    e.u.resize(j_count, 0.0);
    e.q.resize(belief.q_pmf.size(), 0.0);
    for (std::size_t j = 0; j < j_count; ++j)
        for (std::size_t r = 0; r < belief.u_particles[j].size(); ++r)
            e.u[j] += belief.u_particles[j][r] * belief.u_weights[j][r];
    for (std::size_t j = 0; j < belief.q_pmf.size(); ++j)
        for (std::size_t k = 0; k < belief.q_pmf[j].size(); ++k)
            e.q[j] += belief.q_values[k] * belief.q_pmf[j][k];
    return e;
}

Belief downselect(const Belief& belief, std::size_t r_track, Rng& rng) {
    if (r_track > belief.x_particles.size())
        throw std::invalid_argument("downselect: r_track exceeds particle count");
    Belief out = belief;
    const std::vector<std::size_t> idx = systematic_resample(belief.x_weights, r_track, rng);
    out.x_particles.resize(r_track);
    for (std::size_t k = 0; k < r_track; ++k)
        out.x_particles[k] = belief.x_particles[idx[k]];
    out.x_weights.assign(r_track, 1.0 / static_cast<double>(r_track));
    return out;
}

Filter::Filter(std::vector<Anchor> anchors, FilterParams params, std::uint64_t seed)
    : anchors_(std::move(anchors)), params_(std::move(params)), rng_(seed) {
    belief_ = init_belief(anchors_, params_.nlos.d_max, params_.amp, params_.grid,
                          params_.r_init, params_.r_u, rng_);
}

Filter::StepResult Filter::step(const std::vector<Scan>& scans) {
    Belief pred = predict(belief_, params_.kin, params_.walk, params_.grid, rng_);
    StepResult res;
    try {
        belief_ = measurement_update(pred, scans, anchors_, params_, rng_);
    } catch (const TrackLostError&) {
        belief_ = std::move(pred);
        res.lost = true;
    }
    if (!updated_once_) {
        if (belief_.x_particles.size() > params_.r_track)
            belief_ = downselect(belief_, params_.r_track, rng_);
        updated_once_ = true;
    }
    res.est = estimate(belief_);
    return res;
}

}  // namespace adpda
