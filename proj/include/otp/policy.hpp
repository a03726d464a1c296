#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "otp/instance.hpp"
#include "otp/state.hpp"

namespace otp {

/// Either perform test `index` or stop and take decision `index`.
struct Action {
    enum class Kind { Test, Decide };
    Kind kind = Kind::Decide;
    std::size_t index = 0;

    static Action test(std::size_t i) { return {Kind::Test, i}; }
    static Action decide(std::size_t y) { return {Kind::Decide, y}; }
    bool is_test() const { return kind == Kind::Test; }
    bool operator==(const Action&) const = default;
    std::string to_string() const;
};

/// Stationary policy over test states.
class Policy {
public:
    virtual ~Policy() = default;
    virtual Action act(const TestState& s) const = 0;
};

struct Rollout {
    std::vector<std::size_t> tests;  // in the order performed
    std::size_t decision = 0;
    double decision_reward = 0.0;    // f(x, y)
    double test_cost = 0.0;
    double reward() const { return decision_reward - test_cost; }
};

/// Plays `policy` on the hidden outcome x. Throws InvalidArgument if the
/// policy repeats a test or does not decide within d tests.
Rollout rollout(const Policy& policy, const AgentSpec& spec, std::span<const double> x);

/// Observes every test, then takes argmax_y f(x, y).
Rollout full_test_rollout(const AgentSpec& spec, std::span<const double> x);

} // namespace otp
