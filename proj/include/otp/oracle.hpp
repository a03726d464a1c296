#pragma once

#include <cstddef>
#include <map>
#include <memory>

#include "otp/instance.hpp"
#include "otp/policy.hpp"

namespace otp {

/// Policy tree: the root action, then one subtree per observed value of
/// the tested coordinate.
struct PolicyTree {
    Action action;
    std::map<double, std::shared_ptr<const PolicyTree>> children;
};

class TreePolicy : public Policy {
public:
    explicit TreePolicy(std::shared_ptr<const PolicyTree> root) : root_(std::move(root)) {}
    Action act(const TestState& s) const override;
    const PolicyTree& root() const { return *root_; }

private:
    std::shared_ptr<const PolicyTree> root_;
};

struct OracleResult {
    double value = 0.0;
    TreePolicy policy;
    std::size_t policies_enumerated = 0;
};

/// Exhaustive search over deterministic history-dependent policies of a
/// tiny discrete instance, each evaluated by summing P(x) times its
/// realized reward over the support. Limits: d <= 3, K <= 8, |Y| <= 3.
OracleResult brute_force_policy_oracle(const ProblemInstance& instance);

} // namespace otp
