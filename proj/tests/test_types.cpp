#include <doctest.h>

#include <random>

#include "adpda/types.hpp"

using namespace adpda;

TEST_CASE("los_distance basic values") {
    Anchor origin{1, {0.0, 0.0}};
    CHECK(los_distance({3.0, 4.0}, origin) == doctest::Approx(5.0));
    CHECK(los_distance({0.0, 0.0}, origin) == 0.0);
    CHECK(los_distance({1.0, 1.0}, origin) == doctest::Approx(1.4142135623730951));
    Anchor off{2, {2.5, -1.0}};
    CHECK(los_distance(off.position, off) == 0.0);
}

TEST_CASE("los_distance symmetry and triangle inequality") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int i = 0; i < 500; ++i) {
        Vec2 a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
        Anchor ab{1, b}, aa{1, a}, ac{1, c};
        CHECK(los_distance(a, ab) == doctest::Approx(los_distance(b, aa)));
        CHECK(los_distance(a, ab) >= 0.0);
        CHECK(los_distance(a, ac) <= los_distance(a, ab) + los_distance(b, ac) + 1e-9);
    }
}

TEST_CASE("parameter validation") {
    NlosParams bad;
    bad.p_mp = 1.2;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    AmplitudeParams amp;
    amp.gamma = 2.0;
    amp.u_max = 1.0;
    CHECK_THROWS_AS(amp.validate(), std::invalid_argument);
    LosGrid grid;
    grid.values = {0.5, 1.0};
    grid.transition = {{0.9, 0.2}, {0.2, 0.8}};  // first column sums to 1.1
    CHECK_THROWS_AS(grid.validate(), std::invalid_argument);
}
