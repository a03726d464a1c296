#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "otp/discrete_model.hpp"
#include "otp/gaussian_model.hpp"
#include "otp/reward.hpp"

namespace otp {

using OutcomeModel = std::variant<DiscreteOutcomeModel, GaussianOutcomeModel>;

/// Everything about a problem except the outcome distribution: what an
/// online agent is told up front.
struct AgentSpec {
    std::vector<double> costs;
    DecisionSet decisions;
    RewardSpec reward;

    std::size_t dim() const { return costs.size(); }
    double test_cost(const std::vector<std::size_t>& tests) const;
};

/// Outcome model + per-test costs + decision set + reward.
class ProblemInstance {
public:
    ProblemInstance(OutcomeModel model, std::vector<double> costs, DecisionSet decisions, RewardSpec reward);

    std::size_t dim() const;
    bool is_discrete() const { return std::holds_alternative<DiscreteOutcomeModel>(model_); }
    bool is_gaussian() const { return std::holds_alternative<GaussianOutcomeModel>(model_); }
    const OutcomeModel& model() const { return model_; }
    const DiscreteOutcomeModel& discrete() const;
    const GaussianOutcomeModel& gaussian() const;

    const std::vector<double>& costs() const { return spec_.costs; }
    const DecisionSet& decisions() const { return spec_.decisions; }
    const RewardSpec& reward() const { return spec_.reward; }
    const AgentSpec& spec() const { return spec_; }

    /// f(x, y) - sum of costs of `tests`.
    double realized_reward(std::span<const double> x, const std::vector<std::size_t>& tests,
                           std::size_t decision) const;

private:
    OutcomeModel model_;
    AgentSpec spec_;
};

/// Instance file format (JSON); unknown keys are rejected and discrete
/// probabilities must sum to 1 within 1e-9 (then renormalized).
ProblemInstance instance_from_json(const nlohmann::json& j);
nlohmann::json instance_to_json(const ProblemInstance& inst);
ProblemInstance load_instance(const std::filesystem::path& path);
void save_instance(const ProblemInstance& inst, const std::filesystem::path& path);

/// FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string instance_hash(const ProblemInstance& inst);

OutcomeVector sample(const OutcomeModel& model, Rng& rng);

using Marginal = std::variant<std::vector<ValueProb>, NormalMarginal>;
Marginal marginal_over_test(const OutcomeModel& model, const TestState& s, std::size_t test);

} // namespace otp
