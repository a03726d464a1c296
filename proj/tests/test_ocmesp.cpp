#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "otp/error.hpp"
#include "otp/etc.hpp"
#include "otp/generators.hpp"
#include "otp/ocmesp.hpp"

using namespace otp;

namespace {

const double kHalfLog2PiE = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);

OcmespConfig make_config(const GaussianOutcomeModel& m, std::vector<double> costs, std::size_t horizon, double c) {
    OcmespConfig cfg;
    cfg.d = m.dim();
    cfg.sigma = m.condition_number();
    cfg.costs = std::move(costs);
    cfg.horizon = horizon;
    cfg.bernstein_c = c;
    return cfg;
}

Eigen::MatrixXd random_spd(Rng& rng, std::size_t d) {
    Eigen::MatrixXd a(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) a(i, j) = rng.normal();
    return a * a.transpose() + 0.2 * Eigen::MatrixXd::Identity(d, d);
}

double spectral_norm(const Eigen::MatrixXd& m) {
    return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

bool contains(const std::vector<Subset>& v, Subset s) { return std::find(v.begin(), v.end(), s) != v.end(); }

} // namespace

TEST_CASE("subset helpers") {
    CHECK(subset_indices(0b1011) == std::vector<std::size_t>{0, 1, 3});
    CHECK(subset_from_indices({0, 1, 3}) == 0b1011u);
    CHECK(subset_to_string(0b101) == "{0,2}");
    CHECK(subset_to_string(0) == "{}");
    CHECK(subset_lex_less(0, 0b1));
    CHECK(subset_lex_less(0b11, 0b10));
    CHECK_FALSE(subset_lex_less(0b10, 0b11));
}

TEST_CASE("entropy objective by hand") {
    Eigen::MatrixXd sigma = Eigen::Vector2d(4.0, 1.0).asDiagonal();
    const double expected = 2.0 * (kHalfLog2PiE + 0.5 * std::log(4.0)) - 1.0;
    CHECK(entropy_objective(0b01, sigma, 2.0, {1.0, 1.0}) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(entropy_objective(0, sigma, 2.0, {1.0, 1.0}) == 0.0);
    CHECK(entropy_objective(0b11, sigma, 1.0, {0.0, 0.0}) == doctest::Approx(2 * kHalfLog2PiE + 0.5 * std::log(4.0)));
    Eigen::MatrixXd bad(2, 2);
    bad << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(entropy_objective(0b11, bad, 1.0, {0.0, 0.0}), NumericalError);
}

TEST_CASE("confidence width") {
    OcmespConfig cfg;
    cfg.d = 2;
    cfg.sigma = 2.0;
    cfg.delta = 0.1;
    cfg.bernstein_c = 1.0;
    cfg.costs = {0.0, 0.0};
    const double u = confidence_width(1'000'000, cfg);
    // L = ln(pi^2 * 4 * 1e12 / 0.1); 8 * 2 * max(8 sqrt(L / 1e6), 16 L / 1e6)
    const double l = std::log(std::numbers::pi * std::numbers::pi * 4e12 / 0.1);
    CHECK(u == doctest::Approx(16.0 * 8.0 * std::sqrt(l / 1e6)));
    CHECK(u == doctest::Approx(0.742).epsilon(1e-3));

    for (std::uint64_t t = 1; t < 5000; t += 7) CHECK(confidence_width(t + 1, cfg) < confidence_width(t, cfg));
    auto wide = cfg;
    wide.sigma = 4.0;
    CHECK(confidence_width(1000, wide) == doctest::Approx(2.0 * confidence_width(1000, cfg)));
    CHECK_THROWS_AS(confidence_width(0, cfg), InvalidArgument);
}

TEST_CASE("selection picks the least-sampled pair, then the largest candidate") {
    CandidateSet state(3);
    const std::vector<double> x{1.0, 1.0, 1.0};
    for (int k = 0; k < 3; ++k) state.update(0b011, x);
    state.update(0b101, x);
    for (int k = 0; k < 2; ++k) state.update(0b110, x);
    CHECK(state.count(0, 2) == 1);
    CHECK(state.count(2, 0) == 1);
    CHECK(state.count(0, 0) == 4);
    const auto sel = select_next_subset(state);
    CHECK(sel.pair == std::make_pair<std::size_t, std::size_t>(0, 2));
    CHECK(sel.subset == 0b111u);

    // Without the full set, ties among same-size supersets go lexicographic.
    state.remove({0b111});
    CHECK(select_next_subset(state).subset == 0b101u);
}

TEST_CASE("elimination uses the 2 lambda U margin") {
    // d = 1, x0 = sqrt(v) with v chosen so H({0}) - H({}) = 2.
    const double v = std::exp(4.0 - 2.0 * kHalfLog2PiE);
    const std::vector<double> x{std::sqrt(v)};
    SUBCASE("the weaker subset goes") {
        CandidateSet state(1);
        state.update(0b1, x);
        const auto out = eliminate(state, 0.8, 1.0, {0.0});
        CHECK(out.eliminated == 1);
        CHECK(state.candidates() == std::vector<Subset>{0b1});
    }
    SUBCASE("a gap under 2 lambda U keeps both") {
        CandidateSet state(1);
        state.update(0b1, x);
        CHECK(eliminate(state, 0.8, 1.5, {1.0}).eliminated == 0);
        CHECK(state.candidates().size() == 2);
    }
    SUBCASE("equal values survive") {
        CandidateSet state(1);
        state.update(0b1, {1.0});
        CHECK(eliminate(state, 0.5, 1.0, {kHalfLog2PiE}).eliminated == 0);
        CHECK(state.candidates().size() == 2);
    }
    SUBCASE("widths above 1 are gated") {
        CandidateSet state(1);
        state.update(0b1, x);
        const auto out = eliminate(state, 1.01, 1.0, {0.0});
        CHECK(out.gated);
        CHECK(state.candidates().size() == 2);
    }
    SUBCASE("unsampled pairs skip the round") {
        CandidateSet state(2);
        state.update(0b01, {1.0, 0.0});
        const auto out = eliminate(state, 0.1, 1.0, {0.0, 0.0});
        CHECK(out.non_pd);
        CHECK(state.candidates().size() == 4);
    }
}

TEST_CASE("offline subset optimum") {
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(4, 4);
    CHECK(solve_mesp_offline(eye, 1.0, std::vector<double>(4, 1.0)) == 0b1111u);
    CHECK(solve_mesp_offline(eye, 1.0, std::vector<double>(4, 2.0)) == 0u);
    CHECK(solve_mesp_offline(eye, 1.0, std::vector<double>(4, 5.0), 4) == 0b1111u);
    Eigen::MatrixXd sigma = Eigen::Vector3d(1.0, 9.0, 4.0).asDiagonal();
    CHECK(solve_mesp_offline(sigma, 1.0, {0.0, 0.0, 0.0}, 1) == 0b010u);
}

TEST_CASE("independent coordinates with free tests converge to the full set") {
    Eigen::MatrixXd sigma = Eigen::Vector2d(4.0, 1.0).asDiagonal();
    const GaussianOutcomeModel m(Eigen::VectorXd::Zero(2), sigma);
    const auto cfg = make_config(m, {0.0, 0.0}, 2000, 1e9);
    const auto res = run_ocmesp(Environment(m, 1), cfg);
    CHECK(res.optimum == 0b11u);
    CHECK(res.final_candidates == std::vector<Subset>{0b11});
    REQUIRE(res.converged_at);
    const auto& last = res.trace.records.back();
    CHECK(last.phase == "commit");
    CHECK(last.simple_regret == 0.0);
    CHECK(last.elimination->candidates == 1);
}

TEST_CASE("default constant never clears the gate at desk scale") {
    const auto inst = gen_gaussian_lowrank(3, 2, {0.5});
    const auto cfg = make_config(inst.gaussian(), inst.costs(), 500, 1.0);
    const auto res = run_ocmesp(Environment(inst.model(), 0), cfg);
    CHECK(res.final_candidates.size() == 8);
    CHECK(confidence_width(500, cfg) > 1.0);
}

TEST_CASE("run bookkeeping: monotone C and Q, balance") {
    const auto inst = gen_gaussian_lowrank(4, 5, {1.2});
    const auto& m = inst.gaussian();
    auto cfg = make_config(m, inst.costs(), 3000, 1e8);
    const Environment env(inst.model(), 2);
    CandidateSet state(4);
    std::size_t prev_c = state.candidates().size();
    auto prev_q = state.remaining_pairs();
    const std::size_t d = 4;
    for (std::uint64_t t = 1; t <= cfg.horizon && state.candidates().size() > 1; ++t) {
        const auto sel = select_next_subset(state);
        CHECK(contains(state.candidates(), sel.subset));
        update_estimates(state, sel.subset, env.draw(t));
        eliminate(state, confidence_width(t, cfg), cfg.lambda, cfg.costs);
        CHECK(state.candidates().size() <= prev_c);
        const auto q = state.remaining_pairs();
        for (const auto& p : q) CHECK(std::find(prev_q.begin(), prev_q.end(), p) != prev_q.end());
        std::size_t least = SIZE_MAX;
        for (const auto& [i, j] : q) least = std::min(least, state.count(i, j));
        if (!q.empty()) CHECK(least >= t / (d * (d - 1)));
        prev_c = state.candidates().size();
        prev_q = q;
    }

    const auto res = run_ocmesp(env, cfg);
    std::size_t prev = SIZE_MAX;
    double cumulative = 0.0;
    for (const auto& r : res.trace.records) {
        REQUIRE(r.elimination);
        CHECK(r.elimination->candidates <= prev);
        prev = r.elimination->candidates;
        CHECK(r.simple_regret >= 0.0);
        cumulative += r.simple_regret;
        CHECK(r.cumulative_regret == doctest::Approx(cumulative));
        for (std::size_t i = 0; i < d; ++i)
            CHECK(r.observed[i].has_value() == std::binary_search(r.tests.begin(), r.tests.end(), i));
    }
}

TEST_CASE("calibrated elimination is safe on a d = 6 instance") {
    const auto inst = gen_gaussian_lowrank(6, 4, {1.4});
    auto cfg = make_config(inst.gaussian(), inst.costs(), 2048, 1.0);
    std::vector<std::uint64_t> pilots;
    for (std::uint64_t s = 1000; s < 1020; ++s) pilots.push_back(s);
    std::vector<double> grid;
    for (int e = 0; e <= 12; ++e) grid.push_back(std::pow(10.0, e));
    const auto cal = calibrate_bernstein_c(inst.model(), cfg, pilots, grid);
    MESSAGE("calibrated c = " << cal.bernstein_c << " (" << cal.safe_runs << "/" << cal.pilot_runs << " pilots safe)");
    cfg.bernstein_c = cal.bernstein_c;

    std::size_t lost = 0, eliminated_any = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto res = run_ocmesp(Environment(inst.model(), seed), cfg);
        lost += !contains(res.final_candidates, res.optimum);
        eliminated_any += res.final_candidates.size() < 64;
    }
    MESSAGE("optimum lost in " << lost << " / 20 runs");
    CHECK(lost <= 2);
    CHECK(eliminated_any > 0);
}

TEST_CASE("log-det perturbation bound") {
    Rng rng(31);
    std::size_t checked = 0;
    while (checked < 300) {
        const std::size_t d = 1 + rng.next_u64() % 6;
        const Eigen::MatrixXd a = random_spd(rng, d);
        Eigen::MatrixXd e(d, d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j <= i; ++j) e(i, j) = e(j, i) = rng.normal();
        const double inv_norm = 1.0 / Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a).eigenvalues()(0);
        const double target = rng.uniform() / (3.0 * static_cast<double>(d) * inv_norm);
        e *= target / spectral_norm(e);
        const double bound = 3.0 * static_cast<double>(d) * inv_norm * spectral_norm(e);
        if (!(bound < 1.0)) continue;
        const double lhs = std::abs(std::log((a + e).determinant()) - std::log(a.determinant()));
        CHECK(lhs <= bound);
        ++checked;
    }
}

TEST_CASE("plug-in objective converges") {
    const auto inst = gen_gaussian_lowrank(4, 7, {1.0});
    const auto& m = inst.gaussian();
    int good = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Environment env(m, seed);
        std::vector<OutcomeVector> samples;
        for (std::uint64_t t = 1; t <= 100000; ++t) samples.push_back(env.draw(t));
        const auto est = estimate_gaussian(samples, true);
        double worst = 0.0;
        for (Subset s = 0; s < 16; ++s)
            worst = std::max(worst, std::abs(entropy_objective(s, est.cov, 1.0, inst.costs()) -
                                             entropy_objective(s, m.cov(), 1.0, inst.costs())));
        good += worst < 0.05;
    }
    CHECK(good >= 19);
}

TEST_CASE("configuration validation") {
    OcmespConfig cfg;
    cfg.d = 2;
    cfg.costs = {1.0, 1.0};
    CHECK_NOTHROW(cfg.validate());
    auto bad = cfg;
    bad.delta = 1.5;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = cfg;
    bad.sigma = 0.5;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = cfg;
    bad.costs = {1.0};
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);

    const GaussianOutcomeModel shifted(Eigen::VectorXd::Ones(2), Eigen::MatrixXd::Identity(2, 2));
    CHECK_THROWS_AS(run_ocmesp(Environment(shifted, 0), cfg), InvalidArgument);
    CandidateSet state(1);
    CHECK_THROWS_AS(state.remove({0, 1}), InvalidArgument);
}
