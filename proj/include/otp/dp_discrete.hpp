#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "otp/instance.hpp"
#include "otp/policy.hpp"

namespace otp {

/// Bitset over the positive-probability support points of a model. Two
/// states with the same consistent set induce the same posterior and share
/// one value-table entry.
class SupportSet {
public:
    SupportSet() = default;
    explicit SupportSet(std::size_t n) : words_((n + 63) / 64, 0) {}

    void set(std::size_t k) { words_[k / 64] |= std::uint64_t{1} << (k % 64); }
    bool test(std::size_t k) const { return (words_[k / 64] >> (k % 64)) & 1U; }
    bool empty() const;
    std::size_t count() const;
    bool operator==(const SupportSet&) const = default;

    template <class F>
    void for_each(F&& f) const {
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t bits = words_[w];
            while (bits) {
                const int b = __builtin_ctzll(bits);
                f(w * 64 + static_cast<std::size_t>(b));
                bits &= bits - 1;
            }
        }
    }

    std::size_t hash() const;

private:
    std::vector<std::uint64_t> words_;
};

struct SupportSetHash {
    std::size_t operator()(const SupportSet& s) const { return s.hash(); }
};

struct ValueEntry {
    double value = 0.0;  // normalized: expected remaining reward given the state
    double mass = 0.0;   // prior probability of the consistent set
    double weighted = 0.0;  // mass * value, accumulated without division
    Action best;
};

struct DpOptions {
    std::size_t max_states = 10'000'000;
};

/// Optimal policy for a known discrete model, memoized on consistent sets.
/// Ties prefer decisions over tests, then lower test index, then lower
/// decision index.
class DiscretePolicy : public Policy {
public:
    Action act(const TestState& s) const override;

    const ValueEntry& entry(const TestState& s) const;
    double value(const TestState& s) const { return entry(s).value; }
    double root_value() const { return root_value_; }
    std::size_t num_states() const { return table_->size(); }

    const DiscreteOutcomeModel& model() const { return *model_; }
    const AgentSpec& spec() const { return *spec_; }

    /// [{state_key: [support indices], action: "test i"|"decide y", value}]
    nlohmann::json dump() const;

private:
    friend DiscretePolicy solve_dp_discrete(const DiscreteOutcomeModel&, const AgentSpec&, DpOptions);

    SupportSet consistent_set(const TestState& s) const;

    std::shared_ptr<const DiscreteOutcomeModel> model_;
    std::shared_ptr<const AgentSpec> spec_;
    std::vector<std::size_t> active_;  // support indices with positive probability
    std::shared_ptr<const std::unordered_map<SupportSet, ValueEntry, SupportSetHash>> table_;
    double root_value_ = 0.0;
};

/// Backward induction from the all-NA state, branching only on attainable
/// values. Throws CapacityError past `max_states` canonical states.
DiscretePolicy solve_dp_discrete(const DiscreteOutcomeModel& model, const AgentSpec& spec,
                                 DpOptions options = {});
DiscretePolicy solve_dp_discrete(const ProblemInstance& instance, DpOptions options = {});

/// E[f(x, y) | s].
double decision_reward(const DiscreteOutcomeModel& model, const AgentSpec& spec, const TestState& s,
                       std::size_t y);

/// -c_test + sum over attainable x_test of P^s(x_test) * value(s + (test, x_test)).
double q_value(const DiscreteOutcomeModel& model, const AgentSpec& spec, const TestState& s,
               std::size_t test, const std::function<double(const TestState&)>& value_lookup);

/// Exact expected episode reward by enumeration over the support.
double evaluate_policy(const ProblemInstance& instance, const Policy& policy);

} // namespace otp
