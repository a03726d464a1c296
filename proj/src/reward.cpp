#include "otp/reward.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "otp/error.hpp"

namespace otp {

const char* to_string(RewardKind kind) {
    switch (kind) {
        case RewardKind::Table: return "table";
        case RewardKind::IndicatorMatch: return "indicator-match";
        case RewardKind::Quadratic: return "quadratic";
        case RewardKind::Entropy: return "entropy";
    }
    return "?";
}

RewardSpec RewardSpec::table(std::vector<OutcomeVector> keys, std::vector<std::vector<double>> values) {
    if (keys.size() != values.size())
        throw InvalidArgument("reward table: " + std::to_string(values.size()) + " rows for " +
                              std::to_string(keys.size()) + " support points");
    RewardSpec r;
    r.kind_ = RewardKind::Table;
    const std::size_t width = values.empty() ? 0 : values.front().size();
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (values[k].size() != width) throw InvalidArgument("reward table: ragged rows");
        for (double v : values[k])
            if (!std::isfinite(v)) throw InvalidArgument("reward table: entries must be finite");
        if (!r.key_index_.emplace(keys[k], k).second)
            throw InvalidArgument("reward table: duplicate key");
    }
    r.keys_ = std::move(keys);
    r.table_ = std::move(values);
    return r;
}

RewardSpec RewardSpec::indicator_match() {
    RewardSpec r;
    r.kind_ = RewardKind::IndicatorMatch;
    return r;
}

RewardSpec RewardSpec::quadratic(std::vector<double> weights) {
    for (double w : weights)
        if (!std::isfinite(w)) throw InvalidArgument("quadratic reward: weights must be finite");
    RewardSpec r;
    r.kind_ = RewardKind::Quadratic;
    r.weights_ = std::move(weights);
    return r;
}

RewardSpec RewardSpec::entropy(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw InvalidArgument("entropy reward: lambda must be positive and finite");
    RewardSpec r;
    r.kind_ = RewardKind::Entropy;
    r.lambda_ = lambda;
    return r;
}

double RewardSpec::evaluate(std::span<const double> x, std::size_t y, const DecisionSet& decisions) const {
    switch (kind_) {
        case RewardKind::Table: {
            const auto it = key_index_.find(OutcomeVector(x.begin(), x.end()));
            if (it == key_index_.end()) throw InvalidArgument("reward table: outcome outside the table");
            if (y >= table_[it->second].size()) throw InvalidArgument("reward table: decision out of range");
            return table_[it->second][y];
        }
        case RewardKind::IndicatorMatch: {
            if (y >= decisions.size()) throw InvalidArgument("reward: decision out of range");
            const auto& dec = decisions[y];
            return (dec.size() == x.size() && std::equal(x.begin(), x.end(), dec.begin())) ? 1.0 : 0.0;
        }
        case RewardKind::Quadratic: {
            if (y >= decisions.size()) throw InvalidArgument("reward: decision out of range");
            if (x.size() != weights_.size()) throw InvalidArgument("quadratic reward: dimension mismatch");
            double wx = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) wx += weights_[i] * x[i];
            const double diff = wx - decisions[y].front();
            return -diff * diff;
        }
        case RewardKind::Entropy:
            throw InvalidArgument("entropy reward is not a per-outcome function");
    }
    return 0.0;
}

std::size_t RewardSpec::best_decision(std::span<const double> x, const DecisionSet& decisions) const {
    const std::size_t n = kind_ == RewardKind::Table ? (table_.empty() ? 0 : table_.front().size())
                                                     : decisions.size();
    if (n == 0) throw InvalidArgument("reward: empty decision set");
    std::size_t best = 0;
    double best_value = evaluate(x, 0, decisions);
    for (std::size_t y = 1; y < n; ++y) {
        const double v = evaluate(x, y, decisions);
        if (v > best_value) {
            best_value = v;
            best = y;
        }
    }
    return best;
}

double RewardSpec::max_abs() const {
    double m = 0.0;
    for (const auto& row : table_)
        for (double v : row) m = std::max(m, std::abs(v));
    return m;
}

} // namespace otp
