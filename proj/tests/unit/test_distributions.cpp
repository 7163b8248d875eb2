#include <catch_amalgamated.hpp>

#include <cmath>

#include "edmcoh/distributions.hpp"
#include "edmcoh/rng.hpp"

using namespace edmc;

TEST_CASE("adaptive quadrature hits polynomial integrals to tolerance") {
    auto sq = [](double x) { return x * x; };
    CHECK(detail::integrate(sq, -1.0, 1.0) == Catch::Approx(2.0 / 3.0).margin(1e-13));
    auto quart = [](double x) { return x * x * x * x; };
    CHECK(detail::integrate(quart, -1.0, 1.0) == Catch::Approx(2.0 / 5.0).margin(1e-13));
    auto gauss = [](double x) { return std::exp(-x * x); };
    // erf(1) * sqrt(pi)
    CHECK(detail::integrate(gauss, -1.0, 1.0) ==
          Catch::Approx(1.4936482656248540).margin(1e-12));
}

TEST_CASE("uniform[-1,1] moments are closed form") {
    const Distribution d = make_distribution(DistributionSpec::uniform(-1.0, 1.0));
    CHECK(d.moments().m2 == Catch::Approx(1.0 / 3.0).margin(1e-15));
    CHECK(d.moments().m3 == 0.0);
    CHECK(d.moments().m4 == Catch::Approx(1.0 / 5.0).margin(1e-15));
    CHECK(d.moments().c == 1.0);
}

TEST_CASE("asymmetric support is mean-centered") {
    const Distribution d = make_distribution(DistributionSpec::uniform(0.0, 2.0));
    CHECK(d.support_lo() == Catch::Approx(-1.0).margin(1e-15));
    CHECK(d.support_hi() == Catch::Approx(1.0).margin(1e-15));
    CHECK(d.moments().m2 == Catch::Approx(1.0 / 3.0).margin(1e-13));
}

TEST_CASE("degenerate or invalid specs are rejected") {
    CHECK_THROWS_AS(make_distribution(DistributionSpec::uniform(1.0, 1.0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_distribution(DistributionSpec::uniform(2.0, -2.0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_distribution(DistributionSpec::truncated_normal(-1, 1, 0, -1)),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_distribution(DistributionSpec::beta_scaled(-1, 1, 0.0, 2.0)),
                    std::invalid_argument);
}

TEST_CASE("sampling is deterministic and stays in support") {
    const Distribution d = make_distribution(DistributionSpec::uniform(-1.0, 1.0));
    const NodeCloud a = sample_coordinates(d, 50, 3, 123);
    const NodeCloud b = sample_coordinates(d, 50, 3, 123);
    CHECK(a.coords == b.coords);

    const NodeCloud tiny = sample_coordinates(d, 1, 1, 99);
    CHECK(tiny.coords(0, 0) >= d.support_lo());
    CHECK(tiny.coords(0, 0) < d.support_hi());

    const NodeCloud other = sample_coordinates(d, 50, 3, 124);
    CHECK_FALSE(a.coords == other.coords);
}

TEST_CASE("sample mean concentrates near zero") {
    const Distribution d = make_distribution(DistributionSpec::uniform(-1.0, 1.0));
    const NodeCloud c = sample_coordinates(d, 1000, 2, 7);
    double mean = 0.0;
    for (std::size_t i = 0; i < 1000; ++i)
        for (std::size_t j = 0; j < 2; ++j) mean += c.coords(i, j);
    mean /= 2000.0;
    CHECK(std::abs(mean) <= 3.0 * std::sqrt(d.moments().m2 / 2000.0));
}

TEST_CASE("empirical moments match quadrature moments for every kind") {
    const DistributionSpec specs[] = {
        DistributionSpec::uniform(-1.0, 1.0),
        DistributionSpec::truncated_normal(-1.0, 1.0, 0.3, 0.5),
        DistributionSpec::beta_scaled(-1.0, 1.0, 2.0, 5.0),
    };
    for (const auto& spec : specs) {
        const Distribution d = make_distribution(spec);
        constexpr std::size_t n = 100000;
        double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = d.sample_u(uniform01(2024, i));
            REQUIRE(x >= d.support_lo());
            REQUIRE(x <= d.support_hi());
            s1 += x;
            s2 += x * x;
            s3 += x * x * x;
            s4 += x * x * x * x;
        }
        const double inv = 1.0 / static_cast<double>(n);
        INFO("kind " << d.id());
        // 5 conservative standard errors on a support of radius <= 1
        CHECK(std::abs(s1 * inv) < 0.016);
        CHECK(std::abs(s2 * inv - d.moments().m2) < 0.016);
        CHECK(std::abs(s3 * inv - d.moments().m3) < 0.016);
        CHECK(std::abs(s4 * inv - d.moments().m4) < 0.016);
    }
}

TEST_CASE("moment sets are sanity-checked") {
    CHECK_THROWS_AS((MomentSet{0.0, 0.0, 0.2, 1.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((MomentSet{0.5, 0.0, 0.1, 1.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((MomentSet{0.5, 0.0, 0.3, 0.5}.validate()), std::invalid_argument);
    CHECK_NOTHROW((MomentSet{1.0 / 3.0, 0.0, 0.2, 1.0}.validate()));
}

TEST_CASE("kind names round-trip") {
    CHECK(dist_kind_from_string("uniform") == DistKind::Uniform);
    CHECK(dist_kind_from_string("truncnorm") == DistKind::TruncatedNormal);
    CHECK(dist_kind_from_string("beta") == DistKind::BetaScaled);
    CHECK(to_string(DistKind::BetaScaled) == "beta-scaled");
    CHECK_THROWS_AS(dist_kind_from_string("cauchy"), std::invalid_argument);
}
