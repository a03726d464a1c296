#include "otp/discrete_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "otp/error.hpp"

namespace otp {

DiscreteOutcomeModel::DiscreteOutcomeModel(std::vector<OutcomeVector> support,
                                           std::vector<double> probs, double sum_tolerance)
    : dim_(support.empty() ? 0 : support.front().size()),
      support_(std::move(support)),
      probs_(std::move(probs)) {
    if (support_.empty()) throw InvalidArgument("discrete model: empty support");
    if (dim_ == 0) throw InvalidArgument("discrete model: zero-dimensional support vectors");
    if (probs_.size() != support_.size())
        throw InvalidArgument("discrete model: " + std::to_string(support_.size()) +
                              " support points but " + std::to_string(probs_.size()) + " probabilities");
    for (const auto& x : support_) {
        if (x.size() != dim_) throw InvalidArgument("discrete model: ragged support vectors");
        for (double v : x)
            if (!std::isfinite(v)) throw InvalidArgument("discrete model: non-finite support value");
    }
    for (double p : probs_)
        if (!(p >= 0.0) || !std::isfinite(p))
            throw InvalidArgument("discrete model: probabilities must be finite and nonnegative");
    const double total = std::accumulate(probs_.begin(), probs_.end(), 0.0);
    if (std::abs(total - 1.0) > sum_tolerance)
        throw InvalidArgument("discrete model: probabilities sum to " + std::to_string(total));

    std::vector<std::size_t> order(support_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return support_[a] < support_[b]; });
    for (std::size_t k = 1; k < order.size(); ++k)
        if (support_[order[k - 1]] == support_[order[k]])
            throw InvalidArgument("discrete model: duplicate support vector");

    cdf_.resize(probs_.size());
    std::partial_sum(probs_.begin(), probs_.end(), cdf_.begin());
}

std::vector<std::size_t> DiscreteOutcomeModel::consistent_indices(const TestState& s) const {
    if (s.dim() != dim_) throw InvalidArgument("discrete model: state dimension mismatch");
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < support_.size(); ++k)
        if (consistent(support_[k], s)) out.push_back(k);
    return out;
}

std::optional<std::size_t> DiscreteOutcomeModel::find(std::span<const double> x) const {
    if (x.size() != dim_) return std::nullopt;
    for (std::size_t k = 0; k < support_.size(); ++k)
        if (std::equal(x.begin(), x.end(), support_[k].begin())) return k;
    return std::nullopt;
}

std::size_t DiscreteOutcomeModel::sample_index(Rng& rng) const {
    const double u = rng.uniform() * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    std::size_t k = static_cast<std::size_t>(it - cdf_.begin());
    if (k >= cdf_.size()) k = cdf_.size() - 1;
    // Skip zero-probability atoms that share a cdf plateau.
    while (probs_[k] == 0.0 && k > 0) --k;
    return k;
}

DiscreteOutcomeModel posterior_discrete(const DiscreteOutcomeModel& model, const TestState& s) {
    const auto idx = model.consistent_indices(s);
    double mass = 0.0;
    for (std::size_t k : idx) mass += model.prob(k);
    if (!(mass > 0.0)) throw ImpossibleState("posterior_discrete: impossible state " + s.to_string());
    std::vector<OutcomeVector> support;
    std::vector<double> probs;
    support.reserve(idx.size());
    probs.reserve(idx.size());
    for (std::size_t k : idx) {
        support.push_back(model.point(k));
        probs.push_back(model.prob(k) / mass);
    }
    return DiscreteOutcomeModel(std::move(support), std::move(probs), 1e-9);
}

std::vector<ValueProb> marginal_discrete(const DiscreteOutcomeModel& model, const TestState& s,
                                         std::size_t test) {
    if (test >= model.dim()) throw InvalidArgument("marginal: test index out of range");
    if (s.observed(test)) throw InvalidArgument("marginal: test already observed");
    const auto post = posterior_discrete(model, s);
    std::map<double, double> pmf;
    for (std::size_t k = 0; k < post.size(); ++k) pmf[post.point(k)[test]] += post.prob(k);
    std::vector<ValueProb> out;
    for (const auto& [v, p] : pmf) out.push_back({v, p});
    return out;
}

} // namespace otp
