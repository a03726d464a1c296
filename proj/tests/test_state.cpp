#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "otp/error.hpp"
#include "otp/rng.hpp"
#include "otp/state.hpp"

using namespace otp;

namespace {

TestState na_state(std::vector<std::optional<double>> e) { return TestState(std::move(e)); }

} // namespace

TEST_CASE("consistent matches observed entries only") {
    const std::vector<double> x{0.0, 1.0};
    CHECK(consistent(x, na_state({std::nullopt, 1.0})));
    CHECK_FALSE(consistent(x, na_state({1.0, 1.0})));
    CHECK(consistent(x, TestState(2)));
}

TEST_CASE("consistent rejects bad inputs") {
    const std::vector<double> x{0.0, 1.0, 2.0};
    CHECK_THROWS_AS(consistent(x, TestState(2)), InvalidArgument);
    CHECK_THROWS_AS(consistent(std::vector<double>{0.0, 1.0}, TestState::terminal(2)), InvalidArgument);
}

TEST_CASE("apply_observation fills one entry and leaves the input alone") {
    const TestState empty(2);
    const auto s1 = apply_observation(empty, 0, 3.0);
    CHECK(s1 == na_state({3.0, std::nullopt}));
    CHECK(empty == TestState(2));
    const auto s2 = apply_observation(s1, 1, 5.0);
    CHECK(s2 == na_state({3.0, 5.0}));
    CHECK(s2.fully_observed());
    CHECK_THROWS_AS(apply_observation(s1, 0, 4.0), InvalidArgument);
    CHECK_THROWS_AS(apply_observation(s1, 2, 4.0), InvalidArgument);
    CHECK_THROWS_AS(apply_observation(TestState::terminal(2), 0, 1.0), InvalidArgument);
}

TEST_CASE("observed index set equals the non-missing entries") {
    const auto s = na_state({std::nullopt, 2.0, std::nullopt, -1.0});
    CHECK(s.observed_indices() == std::vector<std::size_t>{1, 3});
    CHECK(s.missing_indices() == std::vector<std::size_t>{0, 2});
    CHECK(s.num_observed() == 2);
    CHECK(s.to_string() == "(NA,2,NA,-1)");
}

TEST_CASE("zero-dimensional states are rejected") {
    CHECK_THROWS_AS(TestState(0), InvalidArgument);
}

TEST_CASE("consistency is monotone under refinement") {
    Rng rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t d = 1 + rng.next_u64() % 4;
        std::vector<double> x(d);
        for (double& v : x) v = static_cast<double>(rng.next_u64() % 3);
        TestState s(d);
        bool ever_false = false;
        for (std::size_t step = 0; step < d; ++step) {
            const auto missing = s.missing_indices();
            const std::size_t i = missing[rng.next_u64() % missing.size()];
            s = apply_observation(s, i, static_cast<double>(rng.next_u64() % 3));
            const bool now = consistent(x, s);
            if (ever_false) CHECK_FALSE(now);
            ever_false = ever_false || !now;
        }
    }
}

TEST_CASE("rng streams are pure functions of their keys") {
    Rng a = Rng(5).derive(3);
    Rng b = Rng(5).derive(3);
    for (int k = 0; k < 100; ++k) CHECK(a.next_u64() == b.next_u64());
    CHECK(Rng(5).derive(3).next_u64() != Rng(5).derive(4).next_u64());
    CHECK(Rng(5).next_u64() != Rng(6).next_u64());
}

TEST_CASE("rng uniforms and normals have the right first two moments") {
    Rng rng(2024);
    const int n = 200000;
    double su = 0.0, sn = 0.0, sn2 = 0.0;
    for (int k = 0; k < n; ++k) {
        const double u = rng.uniform();
        CHECK((u >= 0.0 && u < 1.0));
        su += u;
        const double z = rng.normal();
        sn += z;
        sn2 += z * z;
    }
    CHECK(std::abs(su / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
    CHECK(std::abs(sn / n) < 4.0 / std::sqrt(n));
    CHECK(std::abs(sn2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
}
