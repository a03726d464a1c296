#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "otp/state.hpp"

namespace otp {

/// Decision set Y. Each decision is a vector: indicator-match compares it
/// against x, quadratic rewards use length-1 (scalar) decisions, and table
/// rewards only use the index.
using DecisionSet = std::vector<OutcomeVector>;

enum class RewardKind { Table, IndicatorMatch, Quadratic, Entropy };

const char* to_string(RewardKind kind);

/// The terminal reward f(x, y).
///
///  - Table: explicit K x |Y| values keyed by the support points of the
///    instance the table was declared with.
///  - IndicatorMatch: f(x, y) = 1 iff y == x coordinate-wise.
///  - Quadratic: f(x, y) = -(w'x - y)^2 for scalar y (Gaussian instances).
///  - Entropy: lambda-weighted Gaussian entropy of the tested subset (OCMESP);
///    it is not a function of (x, y) and `evaluate` rejects it.
class RewardSpec {
public:
    static RewardSpec table(std::vector<OutcomeVector> keys, std::vector<std::vector<double>> values);
    static RewardSpec indicator_match();
    static RewardSpec quadratic(std::vector<double> weights);
    static RewardSpec entropy(double lambda);

    RewardKind kind() const { return kind_; }
    double lambda() const { return lambda_; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<std::vector<double>>& table_values() const { return table_; }
    const std::vector<OutcomeVector>& table_keys() const { return keys_; }

    /// f(x, y). Throws InvalidArgument for x outside a table's key set.
    double evaluate(std::span<const double> x, std::size_t y, const DecisionSet& decisions) const;

    /// argmax_y f(x, y) over the full decision set, lowest index on ties.
    std::size_t best_decision(std::span<const double> x, const DecisionSet& decisions) const;

    /// Largest |f| over the table (tables only); finite by construction.
    double max_abs() const;

private:
    RewardKind kind_ = RewardKind::IndicatorMatch;
    std::vector<OutcomeVector> keys_;
    std::map<OutcomeVector, std::size_t> key_index_;
    std::vector<std::vector<double>> table_;
    std::vector<double> weights_;
    double lambda_ = 0.0;
};

} // namespace otp
