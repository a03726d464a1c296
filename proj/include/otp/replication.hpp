#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "otp/dp_discrete.hpp"
#include "otp/dp_gaussian.hpp"
#include "otp/trace.hpp"

namespace otp {

/// Agent names accepted by the harness and the CLI.
inline constexpr const char* kAgentNames[] = {"etc-discrete", "etc-gaussian", "etc-doubling", "ocmesp",
                                              "clairvoyant"};

struct ExperimentConfig {
    std::string agent = "etc-discrete";
    std::size_t horizon = 1;
    std::vector<std::uint64_t> seeds{0};
    /// |P| for discrete ETC, the condition-number bound for Gaussian ETC
    /// and the elimination agent. Required by every learning agent.
    std::optional<double> hint;
    std::optional<std::size_t> override_n;
    Quadrature quadrature;
    DpOptions dp;
    double delta = 0.1;
    double bernstein_c = 1.0;
    /// Worker threads; 0 means one per available processor.
    std::size_t jobs = 0;

    void validate() const;
    nlohmann::json to_json() const;
};

/// Policy the clairvoyant plays on an OTP instance (unused for entropy
/// rewards, whose clairvoyant is the offline subset optimum).
std::shared_ptr<const Policy> clairvoyant_policy(const ProblemInstance& instance, const ExperimentConfig& config);

/// One seed of one agent.
RegretTrace run_agent(const ProblemInstance& instance, const ExperimentConfig& config, std::uint64_t seed,
                      const Policy* clairvoyant);

struct AggregateRow {
    std::uint64_t episode = 0;
    double mean = 0.0;
    double sd = 0.0;
};

/// Per-episode mean and sample standard deviation (0 for one trace) of
/// the cumulative regret.
std::vector<AggregateRow> aggregate(const std::vector<RegretTrace>& traces);
void write_aggregate_csv(const std::vector<AggregateRow>& rows, std::ostream& out);

struct ReplicationResult {
    std::vector<std::uint64_t> seeds;
    std::vector<std::optional<RegretTrace>> traces;  // by seed position
    std::vector<std::string> errors;                 // empty string when the seed succeeded
    std::vector<AggregateRow> aggregate;             // over successful seeds

    std::vector<RegretTrace> successful() const;
    bool all_succeeded() const;
};

/// Runs every seed on a thread pool; results are gathered by seed
/// position so output never depends on scheduling.
ReplicationResult run_replications(const ProblemInstance& instance, const ExperimentConfig& config);

/// trace_seed<S>.csv, dataset_seed<S>.csv, meta_seed<S>.json per seed plus
/// aggregate.csv and errors.txt when a seed failed.
void write_replication_outputs(const ReplicationResult& result, const std::filesystem::path& dir);

} // namespace otp
