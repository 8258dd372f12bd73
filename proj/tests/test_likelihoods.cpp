#include <doctest.h>

#include <cmath>
#include <random>

#include "adpda/likelihoods.hpp"
#include "oracles.hpp"

using namespace adpda;

namespace {
const Anchor kOrigin{1, {0.0, 0.0}};
}

TEST_CASE("f_los_distance Gaussian shape") {
    Vec2 p{10.0, 0.0};
    Measurement at_peak{10.0, 1.0, 0.1};
    CHECK(f_los_distance(at_peak, p, kOrigin) == doctest::Approx(3.989422804014327));
    Measurement one_sigma{10.1, 1.0, 0.1};
    CHECK(f_los_distance(one_sigma, p, kOrigin) ==
          doctest::Approx(3.989422804014327 * std::exp(-0.5)));
    Measurement far{45.0, 1.0, 0.1};
    CHECK(f_los_distance(far, p, kOrigin) < 1e-200);
    Measurement bad{10.0, 1.0, 0.0};
    CHECK_THROWS_AS(f_los_distance(bad, p, kOrigin), std::invalid_argument);
}

TEST_CASE("f_mp double exponential") {
    NlosParams nl;  // gamma_r=1.5, gamma_f=6, B=0.2
    Vec2 p{10.0, 0.0};
    CHECK(f_mp(10.2, p, kOrigin, nl) == 0.0);  // delta = 0
    CHECK(f_mp(9.0, p, kOrigin, nl) == 0.0);   // delta < 0
    CHECK(f_mp(12.0, p, kOrigin, nl) == doctest::Approx(0.10785167927776834));
    // unit normalization over delta (analytically exact)
    const double integral = oracles::simpson(
        [&](double d) { return f_mp(10.2 + d, p, kOrigin, nl); }, 0.0, 300.0, 60000);
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("f_fa uniform support") {
    CHECK(f_fa(10.0, 50.0) == doctest::Approx(0.02));
    CHECK(f_fa(60.0, 50.0) == 0.0);
    CHECK(f_fa(0.0, 50.0) == doctest::Approx(0.02));
    CHECK(f_fa(50.0, 50.0) == doctest::Approx(0.02));
    CHECK_THROWS_AS(f_fa(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("f_nlos_distance mixture") {
    NlosParams nl;
    Vec2 p{10.0, 0.0};
    SUBCASE("degenerate mixture equals f_fa") {
        NlosParams uniform = nl;
        uniform.p_mp = 0.0;
        for (double d : {0.0, 5.0, 25.0, 49.0})
            CHECK(f_nlos_distance(d, p, kOrigin, uniform) == doctest::Approx(f_fa(d, nl.d_max)));
    }
    SUBCASE("mixture arithmetic") {
        CHECK(f_nlos_distance(12.0, p, kOrigin, nl) ==
              doctest::Approx(0.9 * 0.10785167927776834 + 0.1 * 0.02));
    }
    SUBCASE("normalization by quadrature") {
        // d_los + B << d_max, so the truncation error of the MP tail is tiny
        Vec2 near{2.0, 0.0};
        const double integral = oracles::simpson(
            [&](double d) { return f_nlos_distance(d, near, kOrigin, nl); }, 0.0, nl.d_max,
            100000);
        CHECK(integral == doctest::Approx(1.0).epsilon(2e-4));
    }
}

TEST_CASE("amplitude densities") {
    SUBCASE("zero noncentrality reduces to Rayleigh") {
        AmplitudeParams amp{0.0, 100.0};
        CHECK(f_los_amplitude(1.0, 0.0, amp) == doctest::Approx(0.6065306597126334));
        CHECK(f_nlos_amplitude(1.0, amp) == doctest::Approx(0.6065306597126334));
    }
    SUBCASE("Rician value with Bessel factor") {
        AmplitudeParams amp{0.0, 100.0};
        CHECK(f_los_amplitude(5.0, 5.0, amp) == doctest::Approx(0.4009838677371836));
    }
    SUBCASE("truncation support") {
        AmplitudeParams amp{2.0, 100.0};
        CHECK(f_los_amplitude(1.5, 3.0, amp) == 0.0);
        CHECK(f_nlos_amplitude(1.5, amp) == 0.0);
    }
    SUBCASE("truncated densities integrate to one") {
        for (double gamma : {0.0, 1.0, 2.0}) {
            AmplitudeParams amp{gamma, 100.0};
            for (double u : {0.0, 1.0, 5.0}) {
                const double i_los = oracles::simpson(
                    [&](double x) { return f_los_amplitude(x, u, amp); }, gamma,
                    u + 14.0, 40000);
                CHECK(i_los == doctest::Approx(1.0).epsilon(1e-8));
            }
            const double i_nlos = oracles::simpson(
                [&](double x) { return f_nlos_amplitude(x, amp); }, gamma, gamma + 14.0,
                40000);
            CHECK(i_nlos == doctest::Approx(1.0).epsilon(1e-8));
        }
    }
}

TEST_CASE("detection probability (Marcum Q)") {
    CHECK(detection_prob(0.0, 0.0) == 1.0);
    CHECK(detection_prob(7.3, 0.0) == 1.0);
    for (double g : {0.5, 1.0, 2.0, 3.0})
        CHECK(detection_prob(0.0, g) == doctest::Approx(std::exp(-0.5 * g * g)));
    // frozen reference values (noncentral chi-square tail)
    CHECK(marcum_q1(3.0, 2.0) == doctest::Approx(0.8867207544023924).epsilon(1e-10));
    CHECK(marcum_q1(1.0, 1.0) == doctest::Approx(0.7328798037968203).epsilon(1e-10));
    CHECK(marcum_q1(0.5, 2.5) == doctest::Approx(0.06168106330333108).epsilon(1e-10));
    CHECK(marcum_q1(10.0, 9.0) == doctest::Approx(0.8537790056770282).epsilon(1e-10));
    CHECK(marcum_q1(40.0, 41.0) == doctest::Approx(0.16166144659064435).epsilon(1e-8));
    // independent quadrature oracle
    for (double a : {0.3, 2.0, 6.0})
        for (double b : {0.5, 2.0, 5.0})
            CHECK(marcum_q1(a, b) ==
                  doctest::Approx(oracles::marcum_q1_quadrature(a, b)).epsilon(1e-8));
}

TEST_CASE("association prior") {
    CHECK(association_prior({3}, 10, 0.8) == doctest::Approx(0.08));
    CHECK(association_prior({0}, 10, 0.8) == doctest::Approx(0.2));
    CHECK(association_prior({0}, 5, 0.0) == doctest::Approx(1.0));
    CHECK(association_prior({2}, 5, 0.0) == 0.0);
    CHECK(association_prior({0}, 0, 0.3) == doctest::Approx(0.7));
    CHECK_THROWS_AS(association_prior({4}, 3, 0.5), std::domain_error);
    for (int m : {0, 1, 5, 50}) {
        for (double pe : {0.0, 0.3, 1.0}) {
            if (m == 0 && pe > 0.0) continue;  // a=0 is the only hypothesis
            double sum = 0.0;
            for (int a = 0; a <= m; ++a) sum += association_prior({a}, m, pe);
            CHECK(sum == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("likelihood ratio") {
    NlosParams nl;
    AmplitudeParams amp{0.0, 100.0};
    Vec2 p{10.0, 0.0};
    SUBCASE("distance-only composition at the peak") {
        // d_hat = d_los: delta = -B < 0, so the NLOS density is the FA floor
        Measurement z{10.0, 3.0, 0.1};
        CHECK(likelihood_ratio(z, p, kOrigin, 0.0, nl, amp) ==
              doctest::Approx(1994.7114020071633));
    }
    SUBCASE("zero noncentrality gives unit amplitude factor") {
        Measurement z{12.0, 1.7, 0.3};
        const double with_amp = likelihood_ratio(z, p, kOrigin, 0.0, nl, amp);
        const double dist_only = f_los_distance(z, p, kOrigin) /
                                 f_nlos_distance(z.d_hat, p, kOrigin, nl);
        CHECK(with_amp == doctest::Approx(dist_only));
    }
    SUBCASE("out-of-range distance is a domain error") {
        Measurement z{60.0, 1.0, 0.1};
        CHECK_THROWS_AS(likelihood_ratio(z, p, kOrigin, 0.0, nl, amp), std::domain_error);
    }
}

TEST_CASE("pseudo likelihood") {
    NlosParams nl;
    AmplitudeParams amp{0.0, 100.0};
    Vec2 p{10.0, 0.0};
    SUBCASE("empty scan") {
        Scan scan{1, 1, {}};
        CHECK(pseudo_likelihood(scan, p, 1.0, {0}, kOrigin, nl, amp) == doctest::Approx(1.0));
        CHECK_THROWS_AS(pseudo_likelihood(scan, p, 1.0, {1}, kOrigin, nl, amp),
                        std::domain_error);
    }
    SUBCASE("single measurement cancellation") {
        Scan scan{1, 1, {{11.0, 2.0, 0.2}}};
        const Measurement& z = scan.measurements[0];
        const double w0 = pseudo_likelihood(scan, p, 1.5, {0}, kOrigin, nl, amp);
        const double w1 = pseudo_likelihood(scan, p, 1.5, {1}, kOrigin, nl, amp);
        CHECK(w0 == doctest::Approx(f_nlos_distance(z.d_hat, p, kOrigin, nl)));
        CHECK(w1 / w0 == doctest::Approx(likelihood_ratio(z, p, kOrigin, 1.5, nl, amp)));
    }
    SUBCASE("ratio depends only on the selected measurement") {
        Scan scan{1, 1, {{9.5, 2.0, 0.2}, {13.0, 1.0, 0.3}, {20.0, 0.7, 0.4}}};
        const double w0 = pseudo_likelihood(scan, p, 2.0, {0}, kOrigin, nl, amp);
        const double w2 = pseudo_likelihood(scan, p, 2.0, {2}, kOrigin, nl, amp);
        CHECK(w2 / w0 == doctest::Approx(likelihood_ratio(scan.measurements[1], p, kOrigin,
                                                          2.0, nl, amp)));
        // appending clutter leaves the ratio unchanged
        Scan bigger = scan;
        bigger.measurements.push_back({30.0, 0.5, 0.5});
        const double b0 = pseudo_likelihood(bigger, p, 2.0, {0}, kOrigin, nl, amp);
        const double b2 = pseudo_likelihood(bigger, p, 2.0, {2}, kOrigin, nl, amp);
        CHECK(b2 / b0 == doctest::Approx(w2 / w0));
    }
}

TEST_CASE("joint factor") {
    NlosParams nl;
    AmplitudeParams amp{0.0, 100.0};
    Vec2 p{8.0, 3.0};
    Scan scan{1, 1, {{9.0, 2.5, 0.15}, {14.0, 1.2, 0.25}}};
    SUBCASE("gamma = 0 makes p_e equal q") {
        // forcing P_D = 1 by hand must give the same factor
        for (int a = 0; a <= 2; ++a) {
            const double via_pd = joint_factor(scan, p, 4.0, {a}, 0.7, kOrigin, nl, amp);
            const double direct = association_prior({a}, 2, 1.0 * 0.7) *
                                  pseudo_likelihood(scan, p, 4.0, {a}, kOrigin, nl, amp);
            CHECK(via_pd == doctest::Approx(direct).epsilon(1e-14));
        }
    }
    SUBCASE("q -> 0 concentrates on a = 0") {
        CHECK(joint_factor(scan, p, 4.0, {1}, 0.0, kOrigin, nl, amp) == 0.0);
        CHECK(joint_factor(scan, p, 4.0, {2}, 0.0, kOrigin, nl, amp) == 0.0);
        CHECK(joint_factor(scan, p, 4.0, {0}, 0.0, kOrigin, nl, amp) > 0.0);
    }
    SUBCASE("sum over hypotheses equals the marginalized factor") {
        double total = 0.0;
        for (int a = 0; a <= 2; ++a)
            total += joint_factor(scan, p, 4.0, {a}, 0.7, kOrigin, nl, amp);
        const double pl0 = pseudo_likelihood(scan, p, 4.0, {0}, kOrigin, nl, amp);
        double expected = (1.0 - 0.7) * pl0;
        for (int a = 1; a <= 2; ++a)
            expected += 0.7 / 2.0 * pseudo_likelihood(scan, p, 4.0, {a}, kOrigin, nl, amp);
        CHECK(total == doctest::Approx(expected).epsilon(1e-14));
    }
}

TEST_CASE("densities are non-negative on random inputs") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ud(0.0, 50.0);
    std::uniform_real_distribution<double> uu(0.0, 20.0);
    NlosParams nl;
    AmplitudeParams amp{0.0, 100.0};
    for (int i = 0; i < 300; ++i) {
        Vec2 p{ud(rng) - 25.0, ud(rng) - 25.0};
        const double d = ud(rng);
        CHECK(f_mp(d, p, kOrigin, nl) >= 0.0);
        CHECK(f_nlos_distance(d, p, kOrigin, nl) >= 0.0);
        CHECK(f_los_amplitude(uu(rng), uu(rng), amp) >= 0.0);
        CHECK(f_nlos_amplitude(uu(rng), amp) >= 0.0);
    }
}
