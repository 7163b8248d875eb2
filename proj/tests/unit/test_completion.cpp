#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "edmcoh/completion.hpp"
#include "edmcoh/distributions.hpp"
#include "edmcoh/edm.hpp"

using namespace edmc;

namespace {

EdmMatrix uniform_edm(std::size_t n, std::size_t d, std::uint64_t seed) {
    const Distribution dist = make_distribution(DistributionSpec::uniform(-1.0, 1.0));
    return build_edm(sample_coordinates(dist, n, d, seed));
}

std::vector<double> observe(const EdmMatrix& truth, const SampleMask& mask) {
    std::vector<double> out;
    out.reserve(mask.coords.size());
    for (const auto& [i, j] : mask.coords) out.push_back(truth.entries(i, j));
    return out;
}

}  // namespace

TEST_CASE("mask covers the whole grid when m = N^2") {
    const SampleMask mask = sample_mask(6, 36, MaskMode::AllEntries, 1);
    std::set<std::pair<std::size_t, std::size_t>> seen(mask.coords.begin(),
                                                       mask.coords.end());
    CHECK(seen.size() == 36);
}

TEST_CASE("mask entries are distinct, in range, and deterministic") {
    const SampleMask a = sample_mask(30, 200, MaskMode::AllEntries, 9);
    const SampleMask b = sample_mask(30, 200, MaskMode::AllEntries, 9);
    CHECK(a.coords == b.coords);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& [i, j] : a.coords) {
        CHECK(i < 30);
        CHECK(j < 30);
        seen.insert({i, j});
    }
    CHECK(seen.size() == 200);
    const SampleMask c = sample_mask(30, 200, MaskMode::AllEntries, 10);
    CHECK_FALSE(a.coords == c.coords);
}

TEST_CASE("symmetric mask is pair-closed and off-diagonal") {
    const SampleMask mask = sample_mask(25, 120, MaskMode::SymmetricOffdiag, 4);
    REQUIRE(mask.coords.size() == 120);
    std::set<std::pair<std::size_t, std::size_t>> seen(mask.coords.begin(),
                                                       mask.coords.end());
    CHECK(seen.size() == 120);
    for (const auto& [i, j] : seen) {
        CHECK(i != j);
        CHECK(seen.count({j, i}) == 1);
    }
}

TEST_CASE("mask size limits are enforced") {
    CHECK_THROWS_AS(sample_mask(5, 26, MaskMode::AllEntries, 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_mask(5, 7, MaskMode::SymmetricOffdiag, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(sample_mask(5, 22, MaskMode::SymmetricOffdiag, 1),
                    std::invalid_argument);
    CHECK_NOTHROW(sample_mask(5, 20, MaskMode::SymmetricOffdiag, 1));
}

TEST_CASE("mask mode names round-trip") {
    CHECK(mask_mode_from_string("all-entries") == MaskMode::AllEntries);
    CHECK(mask_mode_from_string("symmetric-offdiag") == MaskMode::SymmetricOffdiag);
    CHECK(to_string(MaskMode::AllEntries) == "all-entries");
    CHECK_THROWS_AS(mask_mode_from_string("banded"), std::invalid_argument);
}

TEST_CASE("relative recovery error") {
    Matrix truth(2, 2);
    truth(0, 0) = 3.0;
    truth(0, 1) = 4.0;
    CHECK(recovery_error(truth, truth) == 0.0);
    Matrix off = truth;
    off(0, 0) = 0.0;
    off(0, 1) = 0.0;
    CHECK(recovery_error(truth, off) == Catch::Approx(1.0).margin(1e-15));
    const Matrix zero(2, 2);
    CHECK(recovery_error(zero, truth) == Catch::Approx(5.0).margin(1e-15));
    CHECK_THROWS_AS(recovery_error(truth, Matrix(3, 3)), std::invalid_argument);
}

TEST_CASE("fully observed matrices are recovered exactly") {
    Matrix truth(2, 2);
    truth(0, 0) = 1.0;
    truth(0, 1) = 2.0;
    truth(1, 0) = 2.0;
    truth(1, 1) = 5.0;
    const SampleMask mask = sample_mask(2, 4, MaskMode::AllEntries, 3);
    std::vector<double> obs;
    for (const auto& [i, j] : mask.coords) obs.push_back(truth(i, j));
    const CompletionResult res = svt_complete(obs, mask, 2, {}, &truth);
    CHECK(res.converged);
    CHECK(res.iterations <= 2);
    CHECK(res.rel_error <= 1e-12);
}

TEST_CASE("symmetric mask plus the known diagonal can pin everything") {
    const EdmMatrix truth = uniform_edm(8, 1, 2);
    const SampleMask mask = sample_mask(8, 56, MaskMode::SymmetricOffdiag, 3);
    const CompletionResult res =
        svt_complete(observe(truth, mask), mask, 8, {}, &truth.entries);
    CHECK(res.converged);
    CHECK(res.rel_error <= 1e-12);
}

TEST_CASE("small squared-distance matrix is recovered from a partial mask") {
    const EdmMatrix truth = uniform_edm(20, 1, 6);
    const SampleMask mask = sample_mask(20, 266, MaskMode::SymmetricOffdiag, 7);
    const CompletionResult res =
        svt_complete(observe(truth, mask), mask, 20, {}, &truth.entries);
    CHECK(res.converged);
    CHECK(res.rel_error <= 1e-3);
    CHECK(res.residual_history.back() <= 1e-4);
}

TEST_CASE("planar N = 100 instance converges within the iteration budget") {
    const EdmMatrix truth = uniform_edm(100, 2, 1);
    const SampleMask mask = sample_mask(100, 3500, MaskMode::SymmetricOffdiag, 2);
    SvtParams params;
    params.max_iter = 500;
    const CompletionResult res =
        svt_complete(observe(truth, mask), mask, 100, params, &truth.entries);
    CHECK(res.converged);
    CHECK(res.iterations <= 500);
    CHECK(res.rel_error <= 1e-3);

    // the symmetric solver returns a symmetric estimate
    double asym = 0.0;
    for (std::size_t i = 0; i < 100; ++i)
        for (std::size_t j = i + 1; j < 100; ++j)
            asym = std::max(asym, std::abs(res.estimate(i, j) - res.estimate(j, i)));
    CHECK(asym <= 1e-12 * res.estimate.max_abs());
}

TEST_CASE("solver input validation") {
    const EdmMatrix truth = uniform_edm(10, 1, 5);
    SampleMask empty;
    CHECK_THROWS_AS(svt_complete({}, empty, 10), std::invalid_argument);
    const SampleMask mask = sample_mask(10, 20, MaskMode::SymmetricOffdiag, 1);
    CHECK_THROWS_AS(svt_complete({1.0, 2.0}, mask, 10), std::invalid_argument);
    SvtParams bad;
    bad.tol = -1.0;
    CHECK_THROWS_AS(svt_complete(observe(truth, mask), mask, 10, bad),
                    std::invalid_argument);
}
