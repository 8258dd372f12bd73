#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "adpda/harness.hpp"

using namespace adpda;

namespace {

ExperimentConfig tiny_config() {
    ExperimentConfig c = default_experiment();
    c.scenario.duration = 1.0;  // 20 steps
    c.scenario.olos_windows = {{{1}, 0.3, 0.5}};
    c.runs = 2;
    c.r_init = 200;
    c.r_track = 100;
    c.r_u = 30;
    c.workers = 1;
    c.seed = 42;
    return c;
}

RunResult run_with_errors(std::vector<double> sq) {
    RunResult r;
    r.sq_error = std::move(sq);
    return r;
}

}  // namespace

TEST_CASE("filter parameters follow the variant ladder") {
    ExperimentConfig c = default_experiment();
    FilterParams p1 = c.filter_params("AL1");
    CHECK(!p1.features.track_q);
    CHECK(!p1.features.crlb_sigma);
    CHECK(p1.q_fixed == 0.999);
    CHECK(p1.sigma_const == 0.1);
    CHECK(p1.kin.dt == c.scenario.dt);
    CHECK(p1.kin.sigma_a == c.sigma_a);
    CHECK(p1.nlos.p_mp == c.scenario.nlos.p_mp);
    FilterParams p5 = c.filter_params("AL5");
    CHECK(p5.features.track_q);
    CHECK(p5.features.use_amplitude);
    CHECK(p5.features.nonuniform_nlos);
    CHECK(p5.features.crlb_sigma);
    CHECK(p5.r_u == c.r_u);
    CHECK_THROWS_AS(c.filter_params("AL9"), std::invalid_argument);
}

TEST_CASE("config JSON round trip is byte identical") {
    ExperimentConfig c = default_experiment();
    const std::string once = canonical_config_json(c);
    ExperimentConfig back = parse_experiment_config(once);
    CHECK(canonical_config_json(back) == once);
}

TEST_CASE("partial configs keep defaults") {
    ExperimentConfig d = default_experiment();
    ExperimentConfig c = parse_experiment_config("{}");
    CHECK(canonical_config_json(c) == canonical_config_json(d));
    ExperimentConfig c2 = parse_experiment_config(R"({"runs": 7, "algorithm": "AL2"})");
    CHECK(c2.runs == 7);
    CHECK(c2.algorithm == "AL2");
    CHECK(c2.seed == d.seed);
    // manifest files carry the config under a "config" key
    ExperimentConfig c3 = parse_experiment_config(R"({"config": {"runs": 3}, "seed": 9})");
    CHECK(c3.runs == 3);
    CHECK(c3.seed == d.seed);  // top-level keys outside "config" are ignored
    CHECK_THROWS_AS(parse_experiment_config(R"({"algorithm": "XX"})"), std::invalid_argument);
}

TEST_CASE("RMSE aggregation") {
    SUBCASE("single run: rmse is the per-step error") {
        std::vector<RunResult> rs = {run_with_errors({0.0, 4.0, 2.0})};
        auto rmse = rmse_over_time(rs);
        REQUIRE(rmse.size() == 3);
        CHECK(rmse[0] == doctest::Approx(0.0));
        CHECK(rmse[1] == doctest::Approx(2.0));
        CHECK(rmse[2] == doctest::Approx(std::sqrt(2.0)));
    }
    SUBCASE("two runs average the squared errors") {
        std::vector<RunResult> rs = {run_with_errors({0.0, 4.0}), run_with_errors({4.0, 0.0})};
        auto rmse = rmse_over_time(rs);
        CHECK(rmse[0] == doctest::Approx(std::sqrt(2.0)));
        CHECK(rmse[1] == doctest::Approx(std::sqrt(2.0)));
    }
    SUBCASE("permutation invariance") {
        std::mt19937_64 rng(3);
        std::vector<RunResult> rs;
        for (int i = 0; i < 8; ++i) {
            std::vector<double> sq(10);
            std::uniform_real_distribution<double> u(0.0, 9.0);
            for (double& v : sq) v = u(rng);
            rs.push_back(run_with_errors(sq));
        }
        auto base = rmse_over_time(rs);
        std::shuffle(rs.begin(), rs.end(), rng);
        auto perm = rmse_over_time(rs);
        for (std::size_t i = 0; i < base.size(); ++i)
            CHECK(base[i] == doctest::Approx(perm[i]).epsilon(1e-12));
    }
    SUBCASE("length mismatch rejected") {
        std::vector<RunResult> rs = {run_with_errors({1.0, 1.0}), run_with_errors({1.0})};
        CHECK_THROWS_AS(rmse_over_time(rs), std::invalid_argument);
    }
}

TEST_CASE("RMSE CDF and window mean") {
    std::vector<RunResult> rs = {run_with_errors({1.0, 16.0, 4.0, 9.0})};
    const double dt = 1.0;
    auto cdf = rmse_cdf(rs, 0.0, 4.0, dt);
    REQUIRE(cdf.size() == 4);
    // sorted levels 1, 2, 3, 4 with uniform frequency steps
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(cdf[i].first == doctest::Approx(static_cast<double>(i + 1)));
        CHECK(cdf[i].second == doctest::Approx(0.25 * static_cast<double>(i + 1)));
    }
    CHECK(cdf.back().second == doctest::Approx(1.0));
    // window [1, 2]: steps at t = 1 and t = 2, rmse 1 and 4
    CHECK(mean_rmse(rs, 1.0, 2.0, dt) == doctest::Approx(2.5));
    CHECK(mean_rmse(rs, 0.0, 4.0, dt) == doctest::Approx(2.5));
    CHECK_THROWS_AS(mean_rmse(rs, 8.0, 9.0, dt), std::invalid_argument);
    CHECK_THROWS_AS(rmse_cdf(rs, 2.0, 1.0, dt), std::invalid_argument);
}

TEST_CASE("experiment runs are deterministic and share measurements") {
    ExperimentConfig c = tiny_config();
    auto a = run_experiment(c, "AL5");
    auto b = run_experiment(c, "AL5");
    REQUIRE(a.size() == 2);
    for (std::size_t r = 0; r < a.size(); ++r) {
        REQUIRE(a[r].sq_error.size() == 20);
        for (std::size_t i = 0; i < 20; ++i) {
            CHECK(a[r].sq_error[i] == b[r].sq_error[i]);
            CHECK(std::isfinite(a[r].sq_error[i]));
            CHECK(a[r].sp_crlb[i] > 0.0);
        }
    }
    // run_single reproduces the pooled result
    RunResult solo = run_single(c, "AL5", 1);
    for (std::size_t i = 0; i < 20; ++i) CHECK(solo.sq_error[i] == a[1].sq_error[i]);

    // a different variant sees the same trajectory and bound
    auto al1 = run_experiment(c, "AL1");
    for (std::size_t i = 0; i < 20; ++i) {
        CHECK(al1[0].true_pos[i].x == a[0].true_pos[i].x);
        CHECK(al1[0].true_pos[i].y == a[0].true_pos[i].y);
        CHECK(al1[0].sp_crlb[i] == a[0].sp_crlb[i]);
    }
}

TEST_CASE("result export") {
    namespace fs = std::filesystem;
    ExperimentConfig c = tiny_config();
    c.scenario.olos_windows.push_back({{1, 2, 3}, 0.7, 0.9});
    auto r5 = run_experiment(c, "AL5");
    auto r1 = run_experiment(c, "AL1");
    const fs::path dir = fs::temp_directory_path() / "adpda_export_test";
    fs::remove_all(dir);
    export_results(c, {{"AL1", r1}, {"AL5", r5}}, dir.string());

    auto count_lines = [](const fs::path& p) {
        std::ifstream is(p);
        REQUIRE(is.good());
        int n = 0;
        std::string line;
        while (std::getline(is, line)) ++n;
        return n;
    };

    CHECK(count_lines(dir / "rmse_vs_time.csv") == 21);  // header + 20 steps
    {
        std::ifstream is(dir / "rmse_vs_time.csv");
        std::string header;
        std::getline(is, header);
        CHECK(header == "t,AL1,AL5,sp_crlb");
    }
    // two variants x two windows x 20 levels, plus the header
    CHECK(count_lines(dir / "rmse_cdf.csv") == 1 + 2 * 2 * 20);
    CHECK(count_lines(dir / "traces/AL1/run_0000.csv") == 21);
    CHECK(count_lines(dir / "traces/AL5/run_0001.csv") == 21);

    // manifest reloads to the same canonical config
    ExperimentConfig back = load_experiment_config((dir / "manifest.json").string());
    CHECK(canonical_config_json(back) == canonical_config_json(c));
    fs::remove_all(dir);
}
