#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "otp/instance.hpp"
#include "otp/policy.hpp"

namespace otp {

/// Scenario-tree discretization for continuous outcomes: each tested
/// coordinate's 1-d posterior is replaced by `nodes_per_test` Gauss-Hermite
/// nodes.
struct Quadrature {
    std::size_t nodes_per_test = 16;
    std::size_t max_depth = 6;
    double max_tree_nodes = 5e7;
};

/// Nodes and weights with sum_k w_k g(z_k) ~ E[g(Z)], Z ~ N(0, 1).
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Golub-Welsch on the probabilists' Hermite recurrence.
GaussHermiteRule gauss_hermite(std::size_t n);

/// Number of scenario-tree nodes below a state with `free` unobserved tests.
double scenario_tree_size(std::size_t free, std::size_t nodes_per_test);

/// E[f(x, y) | s] for the quadratic reward, in closed form.
double gaussian_decision_reward(const GaussianOutcomeModel& model, const AgentSpec& spec, const TestState& s,
                                std::size_t y);

/// Approximately optimal policy for a known Gaussian model. Actions are
/// recomputed at query time from the scenario tree rooted at the queried
/// state, so the policy accepts arbitrary real observations.
class GaussianPolicy : public Policy {
public:
    Action act(const TestState& s) const override;
    double value(const TestState& s) const;
    /// Q(s, i) per test; NaN for already-observed tests.
    std::vector<double> q_values(const TestState& s) const;
    double root_value() const { return root_value_; }
    Action root_action() const { return root_action_; }

    struct Impl;

private:
    friend GaussianPolicy solve_dp_gaussian(const GaussianOutcomeModel&, const AgentSpec&, Quadrature);
    std::shared_ptr<const Impl> impl_;
    Action root_action_;
    double root_value_ = 0.0;
};

/// Throws InvalidArgument when d > max_depth and CapacityError when the tree
/// exceeds `max_tree_nodes`.
GaussianPolicy solve_dp_gaussian(const GaussianOutcomeModel& model, const AgentSpec& spec, Quadrature quadrature = {});
GaussianPolicy solve_dp_gaussian(const ProblemInstance& instance, Quadrature quadrature = {});

struct MonteCarloEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
};

/// Monte Carlo estimate of the expected episode reward.
MonteCarloEstimate evaluate_policy_mc(const ProblemInstance& instance, const Policy& policy, std::size_t samples,
                                      std::uint64_t seed);

} // namespace otp
