#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "otp/dp_discrete.hpp"
#include "otp/dp_gaussian.hpp"
#include "otp/trace.hpp"

namespace otp {

struct EtcConfig {
    std::size_t horizon = 1;
    /// |P| for the discrete agent, the condition-number bound sigma for the
    /// Gaussian one.
    double hint = 1.0;
    std::optional<std::size_t> override_n;
    /// Global index of the episode before this run's first; draws are keyed
    /// by the global index.
    std::uint64_t episode_offset = 0;
    /// Gaussian only: use the uncentered second moment as the covariance.
    bool zero_mean = false;
};

/// floor(|P|^(1/3) T^(2/3)) clamped to [1, T], computed as the largest n
/// with n^3 <= |P| T^2 so that exact cubes are not lost to rounding.
std::size_t exploration_length_discrete(double support_size, std::size_t horizon);
/// floor(sigma^2 T^(2/3)) clamped to [1, T].
std::size_t exploration_length_gaussian(double sigma, std::size_t horizon);

/// Plug-in pmf over the observed vectors.
DiscreteOutcomeModel empirical_discrete(const std::vector<OutcomeVector>& samples);

struct GaussianEstimate {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

/// Sample mean and either the uncentered second moment (zero_mean) or the
/// centered covariance, both normalized by n and symmetrized.
GaussianEstimate estimate_gaussian(const std::vector<OutcomeVector>& samples, bool zero_mean);

struct EtcResult {
    RegretTrace trace;
    std::shared_ptr<const Policy> committed;  // null after an estimation failure
    std::size_t exploration_length = 0;       // episodes actually explored
    bool estimation_failure = false;
};

/// Explore N episodes with every test, commit to the DP policy of the
/// empirical pmf. Committed play on a subject outside the empirical
/// support falls back to testing the remaining coordinates in index order.
EtcResult run_etc_discrete(const Environment& env, const AgentSpec& spec, const Policy& clairvoyant,
                           const EtcConfig& config, DpOptions dp = {});

/// As above with a plug-in Gaussian; a non-PD estimate extends exploration
/// one episode at a time up to 2N before recording an estimation failure.
EtcResult run_etc_gaussian(const Environment& env, const AgentSpec& spec, const Policy& clairvoyant,
                           const EtcConfig& config, Quadrature quadrature = {});

/// 1, 2, 4, ... with the last batch truncated so the sum is total.
std::vector<std::size_t> doubling_batches(std::size_t total);

/// Runs a fresh agent per batch; the callback receives the batch horizon
/// and the global episode offset.
using BatchRunner = std::function<RegretTrace(std::size_t horizon, std::uint64_t episode_offset)>;
RegretTrace run_doubling(const BatchRunner& runner, std::size_t total);

} // namespace otp
