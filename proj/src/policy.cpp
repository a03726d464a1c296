#include "otp/policy.hpp"

#include "otp/error.hpp"

namespace otp {

std::string Action::to_string() const {
    return (is_test() ? "test " : "decide ") + std::to_string(index);
}

Rollout rollout(const Policy& policy, const AgentSpec& spec, std::span<const double> x) {
    const std::size_t d = spec.dim();
    if (x.size() != d) throw InvalidArgument("rollout: outcome dimension mismatch");
    TestState s(d);
    Rollout out;
    for (std::size_t step = 0; step <= d; ++step) {
        const Action a = policy.act(s);
        if (!a.is_test()) {
            out.decision = a.index;
            out.decision_reward = spec.reward.evaluate(x, a.index, spec.decisions);
            return out;
        }
        if (a.index >= d || s.observed(a.index))
            throw InvalidArgument("rollout: policy chose invalid test " + std::to_string(a.index) +
                                  " at " + s.to_string());
        s = apply_observation(s, a.index, x[a.index]);
        out.tests.push_back(a.index);
        out.test_cost += spec.costs[a.index];
    }
    throw InvalidArgument("rollout: policy did not decide after all tests");
}

Rollout full_test_rollout(const AgentSpec& spec, std::span<const double> x) {
    Rollout out;
    for (std::size_t i = 0; i < spec.dim(); ++i) {
        out.tests.push_back(i);
        out.test_cost += spec.costs[i];
    }
    out.decision = spec.reward.best_decision(x, spec.decisions);
    out.decision_reward = spec.reward.evaluate(x, out.decision, spec.decisions);
    return out;
}

} // namespace otp
