#include "otp/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "otp/error.hpp"

namespace otp {

namespace {

std::vector<double> broadcast_costs(std::vector<double> costs, std::size_t d) {
    if (costs.size() == 1 && d > 1) costs.assign(d, costs.front());
    if (costs.size() != d)
        throw InvalidArgument("generator: expected 1 or " + std::to_string(d) + " costs, got " +
                              std::to_string(costs.size()));
    return costs;
}

std::vector<OutcomeVector> binary_cube(std::size_t d) {
    std::vector<OutcomeVector> out(std::size_t{1} << d, OutcomeVector(d));
    for (std::size_t k = 0; k < out.size(); ++k)
        for (std::size_t i = 0; i < d; ++i) out[k][i] = static_cast<double>((k >> (d - 1 - i)) & 1U);
    return out;
}

RewardSpec miss_penalty(const std::vector<OutcomeVector>& support, std::size_t coordinate) {
    std::vector<std::vector<double>> table;
    for (const auto& x : support) table.push_back({x[coordinate] == 0.0 ? 0.0 : -1.0, x[coordinate] == 1.0 ? 0.0 : -1.0});
    return RewardSpec::table(support, table);
}

} // namespace

double pareto_shape_default() { return std::log(5.0) / std::log(4.0); }

ProblemInstance gen_discrete_pareto(std::size_t d, double shape, std::uint64_t seed, std::vector<double> costs) {
    if (d == 0 || d > 20) throw InvalidArgument("gen pareto: d must lie in [1, 20]");
    if (!(shape > 0.0)) throw InvalidArgument("gen pareto: shape must be positive");
    costs = broadcast_costs(std::move(costs), d);
    auto support = binary_cube(d);
    Rng rng = Rng(seed).derive(0x70617265746fULL);
    std::vector<double> weights(support.size());
    for (double& w : weights) w = std::pow(rng.uniform_open_low(), -1.0 / shape);
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (double& w : weights) w /= total;
    DecisionSet decisions = support;
    return ProblemInstance(DiscreteOutcomeModel(std::move(support), std::move(weights), 1e-9), std::move(costs),
                           std::move(decisions), RewardSpec::indicator_match());
}

ProblemInstance gen_gaussian_lowrank(std::size_t d, std::uint64_t seed, std::vector<double> costs, double lambda) {
    if (d == 0) throw InvalidArgument("gen gaussian-lowrank: d must be positive");
    if (!(lambda > 0.0)) throw InvalidArgument("gen gaussian-lowrank: lambda must be positive");
    costs = broadcast_costs(std::move(costs), d);
    Rng rng = Rng(seed).derive(0x6c6f7772616e6bULL);
    Eigen::MatrixXd l(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) l(i, j) = rng.uniform();
    Eigen::MatrixXd sigma = l * l.transpose() + Eigen::MatrixXd::Identity(d, d);
    return ProblemInstance(GaussianOutcomeModel(Eigen::VectorXd::Zero(d), sigma), std::move(costs), {},
                           RewardSpec::entropy(lambda));
}

ProblemInstance gen_lower_bound_single(double eps, int which) {
    if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("gen single-lb: eps must lie in (0, 1)");
    if (which != 1 && which != 2) throw InvalidArgument("gen single-lb: which must be 1 or 2");
    const double p0 = which == 1 ? (1.0 + eps) / 2.0 : (1.0 - eps) / 2.0;
    std::vector<OutcomeVector> support{{0.0}, {1.0}};
    auto reward = miss_penalty(support, 0);
    return ProblemInstance(DiscreteOutcomeModel(support, {p0, 1.0 - p0}), {0.75}, {{0.0}, {1.0}},
                           std::move(reward));
}

ProblemInstance gen_lower_bound_stacked(double eps, std::size_t support_size, const std::string& pattern) {
    if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("gen stacked-lb: eps must lie in (0, 1)");
    if (support_size < 2 || support_size % 2 != 0)
        throw InvalidArgument("gen stacked-lb: support size must be even and >= 2");
    const std::size_t m = support_size / 2;
    if (pattern.size() != m)
        throw InvalidArgument("gen stacked-lb: pattern needs " + std::to_string(m) + " bits");
    std::vector<OutcomeVector> support;
    std::vector<double> probs;
    for (std::size_t i = 1; i <= m; ++i) {
        const char bit = pattern[i - 1];
        if (bit != '0' && bit != '1') throw InvalidArgument("gen stacked-lb: pattern must be a bit string");
        const double p0 = bit == '1' ? (1.0 + eps) / 2.0 : (1.0 - eps) / 2.0;
        const double pi = 1.0 / static_cast<double>(m);
        support.push_back({0.0, static_cast<double>(i)});
        probs.push_back(pi * p0);
        support.push_back({1.0, static_cast<double>(i)});
        probs.push_back(pi * (1.0 - p0));
    }
    auto reward = miss_penalty(support, 0);
    return ProblemInstance(DiscreteOutcomeModel(support, probs, 1e-12), {0.75, 0.0}, {{0.0}, {1.0}},
                           std::move(reward));
}

ProblemInstance gen_random_tiny(std::size_t d, std::size_t max_support, std::size_t decisions, std::uint64_t seed) {
    if (d == 0 || d > 3) throw InvalidArgument("gen_random_tiny: d must lie in [1, 3]");
    if (decisions == 0) throw InvalidArgument("gen_random_tiny: need at least one decision");
    Rng rng = Rng(seed).derive(0x74696e79ULL);
    auto cube = binary_cube(d);
    // Random subset of the cube of size in [1, min(max_support, 2^d)].
    for (std::size_t k = cube.size(); k > 1; --k) std::swap(cube[k - 1], cube[rng.next_u64() % k]);
    const std::size_t k_max = std::min(max_support, cube.size());
    const std::size_t k = 1 + rng.next_u64() % k_max;
    std::vector<OutcomeVector> support(cube.begin(), cube.begin() + static_cast<std::ptrdiff_t>(k));

    // Dyadic probabilities: positive integer weights summing to 2^12.
    constexpr std::uint64_t kUnits = 1 << 12;
    std::vector<std::uint64_t> cuts{0, kUnits};
    while (cuts.size() < k + 1) {
        const std::uint64_t c = 1 + rng.next_u64() % (kUnits - 1);
        if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> probs(k);
    for (std::size_t a = 0; a < k; ++a) probs[a] = static_cast<double>(cuts[a + 1] - cuts[a]) / kUnits;

    auto dyadic = [&](double lo, double hi) {
        const double steps = (hi - lo) * 256.0;
        return lo + static_cast<double>(rng.next_u64() % (static_cast<std::uint64_t>(steps) + 1)) / 256.0;
    };
    std::vector<double> costs(d);
    for (double& c : costs) c = dyadic(0.0, 1.0);
    std::vector<std::vector<double>> table(k, std::vector<double>(decisions));
    for (auto& row : table)
        for (double& v : row) v = dyadic(-1.0, 1.0);
    DecisionSet ys;
    for (std::size_t y = 0; y < decisions; ++y) ys.push_back({static_cast<double>(y)});
    auto reward = RewardSpec::table(support, std::move(table));
    return ProblemInstance(DiscreteOutcomeModel(std::move(support), std::move(probs)), std::move(costs),
                           std::move(ys), std::move(reward));
}

} // namespace otp
