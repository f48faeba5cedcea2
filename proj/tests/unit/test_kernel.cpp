#include "doctest.h"
#include "helpers.hpp"

#include "gdnm/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

using namespace gdnm;
using testing::FixedEnv;
using testing::make_params;

namespace {

constexpr std::int64_t kRadius = 64;

// Open positions sorted by distance; ties broken left-first or right-first.
std::vector<std::int64_t> ordered(const std::set<std::int64_t>& open, bool right_first) {
    std::vector<std::int64_t> v(open.begin(), open.end());
    std::stable_sort(v.begin(), v.end(), [&](std::int64_t a, std::int64_t b) {
        if (std::llabs(a) != std::llabs(b)) return std::llabs(a) < std::llabs(b);
        return right_first ? a > b : a < b;
    });
    return v;
}

// Brute-force law of the displacement over every open/closed pattern of
// [-w, w]. Exact for |z| <= w, since landing at distance d only depends on
// sites within distance d.
std::map<std::int64_t, double> brute_force_law(const ModelParams& params, std::int64_t w) {
    std::map<std::int64_t, double> law;
    const int sites = int(2 * w + 1);
    for (std::uint32_t mask = 0; mask < (1u << sites); ++mask) {
        std::set<std::int64_t> open;
        for (int i = 0; i < sites; ++i)
            if (mask & (1u << i)) open.insert(i - w);
        const double weight =
            std::pow(params.p, double(open.size())) * std::pow(1 - params.p, double(sites - int(open.size())));
        const auto left = ordered(open, false);
        const auto right = ordered(open, true);
        for (const auto& [k, qk] : params.q) {
            if (std::size_t(k) > open.size()) continue;
            const auto a = left[std::size_t(k - 1)];
            const auto b = right[std::size_t(k - 1)];
            if (a == b) {
                law[a] += weight * qk;
            } else {
                law[a] += 0.5 * weight * qk;
                law[b] += 0.5 * weight * qk;
            }
        }
    }
    return law;
}

} // namespace

TEST_CASE("kth_open_above on fixed open sets") {
    SUBCASE("no tie") {
        const FixedEnv env{{-2, 1, 3}};
        CHECK(kth_open_above(env, {0, 0}, 2, Side::LeftFirst, kRadius).x == -2);
        CHECK(kth_open_above(env, {0, 0}, 2, Side::RightFirst, kRadius).x == -2);
        CHECK(kth_open_above(env, {0, 0}, 1, Side::LeftFirst, kRadius).x == 1);
        CHECK(kth_open_above(env, {0, 0}, 3, Side::RightFirst, kRadius).x == 3);
        CHECK(kth_open_above(env, {0, 0}, 2, Side::LeftFirst, kRadius).t == 1);
    }
    SUBCASE("tie at distance 1") {
        const FixedEnv env{{-1, 1}};
        CHECK(kth_open_above(env, {0, 0}, 1, Side::LeftFirst, kRadius).x == -1);
        CHECK(kth_open_above(env, {0, 0}, 1, Side::RightFirst, kRadius).x == 1);
        CHECK_FALSE(orders_agree(env, {0, 0}, 1, kRadius));
    }
    SUBCASE("tie exhausted below the rank") {
        const FixedEnv env{{-1, 1, 4}};
        CHECK(kth_open_above(env, {0, 0}, 3, Side::LeftFirst, kRadius).x == 4);
        CHECK(kth_open_above(env, {0, 0}, 3, Side::RightFirst, kRadius).x == 4);
        CHECK(orders_agree(env, {0, 0}, 3, kRadius));
    }
    SUBCASE("rank must be positive") {
        const FixedEnv env{{0}};
        CHECK_THROWS_AS(kth_open_above(env, {0, 0}, 0, Side::LeftFirst, kRadius), std::invalid_argument);
    }
    SUBCASE("scan limit") {
        const FixedEnv env{{100}};
        CHECK_THROWS_AS(kth_open_above(env, {0, 0}, 1, Side::LeftFirst, 10), ScanLimitError);
    }
}

TEST_CASE("kth_open_above matches explicit ordering on random open sets") {
    std::mt19937_64 rng(2024);
    std::bernoulli_distribution coin(0.4);
    for (int trial = 0; trial < 3000; ++trial) {
        FixedEnv env;
        for (std::int64_t x = -6; x <= 6; ++x)
            if (coin(rng)) env.open.insert(x);
        const auto left = ordered(env.open, false);
        const auto right = ordered(env.open, true);
        for (std::size_t k = 1; k <= left.size(); ++k) {
            const auto a = kth_open_above(env, {0, 0}, int(k), Side::LeftFirst, 6).x;
            const auto b = kth_open_above(env, {0, 0}, int(k), Side::RightFirst, 6).x;
            REQUIRE(a == left[k - 1]);
            REQUIRE(b == right[k - 1]);
            REQUIRE(orders_agree(env, {0, 0}, int(k), 6) == (a == b));
        }
    }
}

TEST_CASE("kth_open_above is translation invariant in the oracle") {
    const EnvOracle env(make_params(0.4, {{1, 1.0}}, 5));
    for (std::int64_t x = -20; x <= 20; ++x) {
        const Site z{x, 3};
        for (int k = 1; k <= 3; ++k) {
            const Site a = kth_open_above(env, z, k, Side::LeftFirst);
            CHECK(a.t == 4);
            CHECK(env.omega(a));
        }
    }
}

TEST_CASE("step on fixed open sets") {
    CHECK(step(FixedEnv{{0}, false, 1}, {0, 0}, kRadius).x == 0);
    CHECK(step(FixedEnv{{-1, 1}, true, 1}, {0, 0}, kRadius).x == 1);
    CHECK(step(FixedEnv{{-1, 1}, false, 1}, {0, 0}, kRadius).x == -1);
    // Left-first order: -1, +1, +2; right-first: +1, -1, +2.
    CHECK(step(FixedEnv{{-1, 1, 2}, false, 2}, {0, 0}, kRadius).x == 1);
    CHECK(step(FixedEnv{{-1, 1, 2}, true, 2}, {0, 0}, kRadius).x == -1);
    // Orders agree at rank 3, so the coin is irrelevant.
    CHECK(step(FixedEnv{{-1, 1, 2}, false, 3}, {0, 0}, kRadius).x == 2);
    CHECK(step(FixedEnv{{-1, 1, 2}, true, 3}, {0, 0}, kRadius).x == 2);
}

TEST_CASE("drainage special case: pmf(0) = p") {
    for (double p : {0.1, 0.3, 0.5, 0.77}) {
        const IncrementLaw law = increment_pmf_enumerated(make_params(p, {{1, 1.0}}));
        CHECK(law.at(0) == doctest::Approx(p).epsilon(1e-14));
    }
}

TEST_CASE("q(1) = 1, p = 1/2 geometric closed form") {
    const IncrementLaw law = increment_pmf_enumerated(make_params(0.5, {{1, 1.0}}));
    for (std::int64_t z = 1; z <= 15; ++z) {
        const double expected = 0.75 * std::pow(4.0, -double(z));
        CHECK(law.at(z) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(law.at(-z) == doctest::Approx(expected).epsilon(1e-12));
    }
    CHECK(std::abs(law.sigma2 - 10.0 / 9.0) < 1e-9);
}

TEST_CASE("enumeration agrees with brute force over patterns") {
    for (const auto& params : {make_params(0.4, {{1, 0.3}, {2, 0.2}, {3, 0.5}}), make_params(0.5, {{1, 0.5}, {2, 0.5}}),
                               make_params(0.7, {{2, 0.6}, {4, 0.4}})}) {
        const std::int64_t w = 6;
        const auto brute = brute_force_law(params, w);
        const IncrementLaw law = increment_pmf_enumerated(params);
        for (std::int64_t z = -w; z <= w; ++z) {
            const double expected = brute.contains(z) ? brute.at(z) : 0.0;
            CHECK(law.at(z) == doctest::Approx(expected).epsilon(1e-12).scale(1e-15));
        }
    }
}

TEST_CASE("enumerated law invariants") {
    for (const auto& params : {make_params(0.5, {{1, 1.0}}), make_params(0.3, {{1, 0.5}, {3, 0.5}}),
                               make_params(0.8, {{2, 0.25}, {5, 0.75}})}) {
        const IncrementLaw law = increment_pmf_enumerated(params);
        for (std::int64_t z = 0; z <= law.radius; ++z) CHECK(law.at(z) == law.at(-z));
        CHECK(std::abs(law.total_mass() + law.truncation_bound - 1.0) <= 1e-12);
        CHECK(law.truncation_bound < 1e-10);
        CHECK(law.sigma2 > 0.0);
        CHECK(signed_moment(law, 1) == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
        CHECK(signed_moment(law, 3) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    }
}

TEST_CASE("window too small is rejected") {
    const auto params = make_params(0.5, {{1, 0.5}, {4, 0.5}});
    const auto w = minimal_enumeration_window(params);
    CHECK_NOTHROW(increment_pmf_enumerated(params, w));
    CHECK_THROWS_AS(increment_pmf_enumerated(params, w - 1), WindowTooSmallError);
    CHECK(binomial_lower_tail(0.5, 2 * w + 1, 4) < 1e-10);
}

TEST_CASE("published closed form against enumeration") {
    SUBCASE("q(1) = 1, p = 1/2 at z = 1") {
        const auto params = make_params(0.5, {{1, 1.0}});
        const IncrementLaw paper = increment_pmf_paper_form(params, 5);
        CHECK(paper.at(1) == doctest::Approx(0.25).epsilon(1e-15));
        CHECK(increment_pmf_enumerated(params).at(1) == doctest::Approx(3.0 / 16.0).epsilon(1e-14));
        // Off by a factor 4/3 at every z for this law.
        for (std::int64_t z = 1; z <= 5; ++z)
            CHECK(paper.at(z) / increment_pmf_enumerated(params).at(z) == doctest::Approx(4.0 / 3.0));
    }
    SUBCASE("q(3) = 1 at z = 1") {
        for (double p : {0.3, 0.5, 0.9}) {
            const auto params = make_params(p, {{3, 1.0}});
            CHECK(increment_pmf_paper_form(params, 2).at(1) == doctest::Approx(p * p * p).epsilon(1e-14));
            CHECK(increment_pmf_enumerated(params).at(1) == doctest::Approx(0.5 * p * p * p).epsilon(1e-13));
        }
    }
    SUBCASE("pmf(0) is p q(1) in both") {
        const auto params = make_params(0.4, {{1, 0.25}, {2, 0.75}});
        CHECK(increment_pmf_paper_form(params, 3).at(0) == doctest::Approx(0.1));
        CHECK(increment_pmf_enumerated(params).at(0) == doctest::Approx(0.1));
    }
}

TEST_CASE("moments") {
    const IncrementLaw law = increment_pmf_enumerated(make_params(0.5, {{1, 1.0}}));
    const auto ms = moments(law, {0, 1, 2, 4});
    REQUIRE(ms.size() == 4);
    CHECK(ms[0].value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(ms[2].value - 10.0 / 9.0) <= 1e-9 + ms[2].error_bound);
    // E|xi| = 2 sum z (3/4) 4^-z = 2/3.
    CHECK(ms[1].value == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    // E xi^4 = 2 (3/4) sum z^4 4^-z = (3/2) (380/81).
    CHECK(ms[3].value == doctest::Approx(1.5 * 380.0 / 81.0).epsilon(1e-10));
    for (const auto& m : ms) {
        CHECK(m.error_bound >= 0.0);
        CHECK(m.error_bound == doctest::Approx(double(law.radius) * law.truncation_bound *
                                               std::pow(double(law.radius), m.order)));
    }
}

TEST_CASE("Monte Carlo single steps fall in 3 sigma bands of the enumeration") {
    for (const auto& params : {make_params(0.5, {{1, 1.0}}), make_params(0.5, {{1, 0.5}, {2, 0.5}}),
                               make_params(0.3, {{1, 0.2}, {3, 0.8}})}) {
        const EnvOracle env(params);
        const IncrementLaw law = increment_pmf_enumerated(params);
        const std::int64_t n = 1'000'000;
        std::map<std::int64_t, std::int64_t> counts;
        // One step per row so the draws are independent.
        for (std::int64_t t = 0; t < n; ++t) ++counts[step(env, Site{0, t}).x];
        for (std::int64_t z = -law.radius; z <= law.radius; ++z) {
            const double p = law.at(z);
            if (p <= 1e-4) continue;
            const double freq = double(counts[z]) / double(n);
            CHECK_MESSAGE(std::abs(freq - p) <= testing::three_sigma(p, double(n)), "z = " << z);
        }
    }
}
