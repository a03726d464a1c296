#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "otp/rng.hpp"
#include "otp/state.hpp"

namespace otp {

/// Finite-support joint distribution over outcome vectors.
class DiscreteOutcomeModel {
public:
    /// Validates: equal-length distinct support vectors, nonnegative probs
    /// summing to 1 within `sum_tolerance`.
    DiscreteOutcomeModel(std::vector<OutcomeVector> support, std::vector<double> probs,
                         double sum_tolerance = 1e-12);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return support_.size(); }
    const std::vector<OutcomeVector>& support() const { return support_; }
    const std::vector<double>& probs() const { return probs_; }
    const OutcomeVector& point(std::size_t k) const { return support_[k]; }
    double prob(std::size_t k) const { return probs_[k]; }

    std::vector<std::size_t> consistent_indices(const TestState& s) const;
    std::optional<std::size_t> find(std::span<const double> x) const;

    std::size_t sample_index(Rng& rng) const;
    OutcomeVector sample(Rng& rng) const { return support_[sample_index(rng)]; }

private:
    std::size_t dim_;
    std::vector<OutcomeVector> support_;
    std::vector<double> probs_;
    std::vector<double> cdf_;
};

struct ValueProb {
    double value;
    double prob;
    bool operator==(const ValueProb&) const = default;
};

/// Restriction to the support points consistent with s, renormalized.
/// Throws ImpossibleState when the consistent mass is zero.
DiscreteOutcomeModel posterior_discrete(const DiscreteOutcomeModel& model, const TestState& s);

/// Induced pmf of coordinate `test` under the posterior, ordered by value.
std::vector<ValueProb> marginal_discrete(const DiscreteOutcomeModel& model, const TestState& s,
                                         std::size_t test);

} // namespace otp
