#include <catch2/catch_amalgamated.hpp>

#include "sedpf/gaussian.hpp"
#include "sedpf/rng.hpp"
#include "sedpf/stats.hpp"

using namespace sedpf;

TEST_CASE("expected_max trivial cases") {
    CHECK(expected_max({Gaussian{0.05, 0.001}}) == 0.05);
    CHECK(expected_max({Gaussian{3.0, 0.0}, Gaussian{5.0, 0.0}}) == 5.0);
    CHECK_THROWS_AS(expected_max({}), std::invalid_argument);
}

TEST_CASE("expected_max of two iid standard normals is 1/sqrt(pi)") {
    double got = expected_max({Gaussian{0.0, 1.0}, Gaussian{0.0, 1.0}});
    CHECK(got == Catch::Approx(1.0 / std::sqrt(M_PI)).epsilon(1e-9));

    // Monte Carlo cross-check.
    Rng rng(11);
    std::vector<double> samples;
    for (int i = 0; i < 200000; ++i)
        samples.push_back(std::max(rng.normal(0, 1), rng.normal(0, 1)));
    double mc = stats::mean(samples);
    double se = stats::stderr_of_mean(samples);
    CHECK(std::abs(mc - got) < 4.0 * se);
}

TEST_CASE("expected_max exact for all-degenerate inputs") {
    std::vector<Gaussian> gs = {{1.0, 0.0}, {4.0, 0.0}, {2.5, 0.0}, {-3.0, 0.0}};
    CHECK(expected_max(gs) == 4.0);
}

TEST_CASE("expected_max dominates max of means and is monotone in means") {
    Rng rng(23);
    for (int trial = 0; trial < 500; ++trial) {
        std::size_t n = 1 + rng.below(5);
        std::vector<Gaussian> gs;
        double max_mean = -1e300;
        for (std::size_t i = 0; i < n; ++i) {
            Gaussian g{rng.normal(0.0, 10.0), rng.uniform01() * 4.0};
            max_mean = std::max(max_mean, g.mean);
            gs.push_back(g);
        }
        double base = expected_max(gs);
        REQUIRE(base >= max_mean - 1e-12);

        // Bump one mean upward: the result must not decrease.
        auto bumped = gs;
        std::size_t which = rng.below(n);
        bumped[which].mean += rng.uniform01() * 5.0;
        REQUIRE(expected_max(bumped) >= base - 1e-12);
    }
}

TEST_CASE("expected_max against Monte Carlo for a heterogeneous trio") {
    std::vector<Gaussian> gs = {{0.010, 25e-6}, {0.012, 1e-6}, {0.008, 100e-6}};
    double approx = expected_max(gs);

    Rng rng(77);
    std::vector<double> samples;
    for (int i = 0; i < 300000; ++i) {
        double m = -1e300;
        for (const auto& g : gs) m = std::max(m, rng.normal(g.mean, std::sqrt(g.var)));
        samples.push_back(m);
    }
    double mc = stats::mean(samples);
    // Clark folding is approximate for >2 inputs; allow a 2% band.
    CHECK(std::abs(approx - mc) / mc < 0.02);
}

TEST_CASE("normal cdf/pdf sanity") {
    CHECK(normal_cdf(0.0) == Catch::Approx(0.5));
    CHECK(normal_cdf(1.959963985) == Catch::Approx(0.975).epsilon(1e-6));
    CHECK(normal_pdf(0.0) == Catch::Approx(0.3989422804).epsilon(1e-9));
}
