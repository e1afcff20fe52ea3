#include <doctest.h>

#include "agewire/montecarlo.hpp"

using namespace agewire;

TEST_CASE("percentiles interpolate linearly") {
    auto p = summarize({5, 1, 4, 2, 3});
    CHECK(p.median == 3);
    CHECK(p.p25 == 2);
    CHECK(p.p5 == doctest::Approx(1.2));
    CHECK(p.p95 == doctest::Approx(4.8));
    CHECK(p.mean == 3);
    CHECK(p.min == 1);
    CHECK(p.max == 5);
}

TEST_CASE("monte carlo is bit-identical across worker counts") {
    Netlist n = build_array_multiplier(4);
    auto profile = InputProfile::uniform(n.input_count());
    for (auto mode : {AlphaMode::Fixed, AlphaMode::Uniform0p1To0p9}) {
        MonteCarloConfig c;
        c.iterations = 12;
        c.seed = 99;
        c.alpha_mode = mode;
        c.avg_samples = 16;
        c.threads = 1;
        auto one = run_monte_carlo(n, profile, c, AgingParams{});
        c.threads = 4;
        auto four = run_monte_carlo(n, profile, c, AgingParams{});
        REQUIRE(one.points.size() == 5);
        for (std::size_t k = 0; k < one.points.size(); ++k) {
            CHECK(one.points[k].max_delay == four.points[k].max_delay);
            CHECK(one.points[k].avg_delay == four.points[k].avg_delay);
        }
        CHECK(one.points.back().max_summary.median > one.points.front().max_summary.median);
        c.seed = 100;
        CHECK(run_monte_carlo(n, profile, c, AgingParams{}).points[0].max_delay != one.points[0].max_delay);
    }
}

TEST_CASE("monte carlo config is validated") {
    MonteCarloConfig c;
    c.iterations = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c.iterations = 1;
    c.time_points = {2, 1};
    CHECK_THROWS_AS(c.validate(), Error);
    CHECK(parse_alpha_mode(to_string(AlphaMode::Fixed)) == AlphaMode::Fixed);
}
