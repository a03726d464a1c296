#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "otp/instance.hpp"
#include "otp/policy.hpp"

namespace otp {

/// Serves i.i.d. outcome vectors. The draw for an episode is a pure
/// function of (seed, episode), so agents sharing a seed see the same
/// subjects (common random outcomes) regardless of run order.
class Environment {
public:
    Environment(OutcomeModel model, std::uint64_t seed) : model_(std::move(model)), seed_(seed) {}

    /// Episodes are numbered from 1.
    OutcomeVector draw(std::uint64_t episode) const;

    const OutcomeModel& model() const { return model_; }
    std::uint64_t seed() const { return seed_; }

private:
    OutcomeModel model_;
    std::uint64_t seed_;
};

/// Extra per-episode columns written for the elimination agent.
struct EliminationColumns {
    std::optional<std::pair<std::size_t, std::size_t>> pair;
    std::vector<std::size_t> subset;
    std::size_t candidates = 0;
    double width = 0.0;
    std::size_t eliminated = 0;
};

struct EpisodeRecord {
    std::uint64_t episode = 0;
    std::string phase;  // explore | commit
    std::vector<std::size_t> tests;
    std::optional<std::size_t> decision;
    double realized_reward = 0.0;
    double clairvoyant_reward = 0.0;
    double simple_regret = 0.0;
    double cumulative_regret = 0.0;
    /// What the agent saw: NA for untested coordinates.
    std::vector<std::optional<double>> observed;
    std::optional<EliminationColumns> elimination;
};

struct RegretTrace {
    std::uint64_t seed = 0;
    std::string agent;
    std::string instance_hash;
    std::vector<EpisodeRecord> records;
    std::map<std::string, std::string> diagnostics;

    /// Appends and fills in cumulative_regret.
    void push(EpisodeRecord record);
    double final_regret() const { return records.empty() ? 0.0 : records.back().cumulative_regret; }
    std::size_t length() const { return records.size(); }
};

/// Reward gap between the clairvoyant rollout and the agent's rollout on the
/// same subject x. Optionally reports the clairvoyant reward.
double simple_regret(const AgentSpec& spec, const Policy& clairvoyant, const Rollout& agent,
                     std::span<const double> x, double* clairvoyant_reward = nullptr);

/// Builds a record from an agent rollout, masking untested coordinates.
EpisodeRecord make_record(std::uint64_t episode, std::string phase, const Rollout& agent,
                          std::span<const double> x, double clairvoyant_reward);

/// Trace CSV: episode, phase, tests_performed, decision, realized_reward,
/// clairvoyant_reward, simple_regret, cumulative_regret, plus the
/// elimination columns when present.
void write_trace_csv(const RegretTrace& trace, std::ostream& out);
RegretTrace read_trace_csv(std::istream& in);

/// One row per episode, one column per test, literal NA for unobserved.
void write_dataset_csv(const RegretTrace& trace, std::ostream& out);

/// Shortest round-trip text for a double.
std::string format_double(double v);

} // namespace otp
