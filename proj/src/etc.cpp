#include "otp/etc.hpp"

#include <cmath>
#include <map>

#include "otp/error.hpp"

namespace otp {

namespace {

std::size_t clamp_n(long double n, std::size_t horizon) {
    if (!(n >= 1.0L)) return 1;
    if (n >= static_cast<long double>(horizon)) return horizon;
    return static_cast<std::size_t>(n);
}

// Largest integer n with n^3 <= bound, starting from a floating estimate.
long double icbrt_floor(long double bound) {
    long double n = std::floor(std::cbrt(bound));
    while (n > 0 && n * n * n > bound) n -= 1;
    while ((n + 1) * (n + 1) * (n + 1) <= bound) n += 1;
    return n;
}

class FallbackPolicy : public Policy {
public:
    FallbackPolicy(DiscretePolicy inner, const AgentSpec& spec) : inner_(std::move(inner)), spec_(spec) {}

    Action act(const TestState& s) const override {
        try {
            return inner_.act(s);
        } catch (const ImpossibleState&) {
        }
        const auto missing = s.missing_indices();
        if (!missing.empty()) return Action::test(missing.front());
        std::vector<double> x(s.dim());
        for (std::size_t i = 0; i < s.dim(); ++i) x[i] = s.value(i);
        return Action::decide(spec_.reward.best_decision(x, spec_.decisions));
    }

private:
    DiscretePolicy inner_;
    AgentSpec spec_;
};

void explore_episode(RegretTrace& trace, const Environment& env, const AgentSpec& spec, const Policy& clairvoyant,
                     std::uint64_t episode, std::vector<OutcomeVector>& samples) {
    const auto x = env.draw(episode);
    const auto agent = full_test_rollout(spec, x);
    double best = 0.0;
    simple_regret(spec, clairvoyant, agent, x, &best);
    trace.push(make_record(episode, "explore", agent, x, best));
    samples.push_back(x);
}

void commit_episode(RegretTrace& trace, const Environment& env, const AgentSpec& spec, const Policy& clairvoyant,
                    const Policy& committed, std::uint64_t episode) {
    const auto x = env.draw(episode);
    const auto agent = rollout(committed, spec, x);
    double best = 0.0;
    simple_regret(spec, clairvoyant, agent, x, &best);
    trace.push(make_record(episode, "commit", agent, x, best));
}

} // namespace

std::size_t exploration_length_discrete(double support_size, std::size_t horizon) {
    if (horizon == 0) throw InvalidArgument("horizon must be positive");
    if (!(support_size > 0.0) || !std::isfinite(support_size))
        throw InvalidArgument("support size hint must be positive");
    const long double t = static_cast<long double>(horizon);
    return clamp_n(icbrt_floor(static_cast<long double>(support_size) * t * t), horizon);
}

std::size_t exploration_length_gaussian(double sigma, std::size_t horizon) {
    if (horizon == 0) throw InvalidArgument("horizon must be positive");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("condition number hint must be positive");
    const long double t = static_cast<long double>(horizon);
    const long double s2 = static_cast<long double>(sigma) * sigma;
    return clamp_n(icbrt_floor(s2 * s2 * s2 * t * t), horizon);
}

DiscreteOutcomeModel empirical_discrete(const std::vector<OutcomeVector>& samples) {
    if (samples.empty()) throw InvalidArgument("empirical_discrete: no samples");
    std::map<OutcomeVector, std::size_t> counts;
    for (const auto& x : samples) ++counts[x];
    std::vector<OutcomeVector> support;
    std::vector<double> probs;
    const double n = static_cast<double>(samples.size());
    for (const auto& [x, c] : counts) {
        support.push_back(x);
        probs.push_back(static_cast<double>(c) / n);
    }
    return DiscreteOutcomeModel(std::move(support), std::move(probs), 1e-9);
}

GaussianEstimate estimate_gaussian(const std::vector<OutcomeVector>& samples, bool zero_mean) {
    if (samples.empty()) throw InvalidArgument("estimate_gaussian: no samples");
    const auto d = static_cast<Eigen::Index>(samples.front().size());
    const double n = static_cast<double>(samples.size());
    GaussianEstimate est{Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Zero(d, d)};
    for (const auto& x : samples) {
        const Eigen::Map<const Eigen::VectorXd> v(x.data(), d);
        est.mean += v;
        est.cov.noalias() += v * v.transpose();
    }
    est.mean /= n;
    est.cov /= n;
    if (!zero_mean) est.cov -= est.mean * est.mean.transpose();
    est.cov = 0.5 * (est.cov + est.cov.transpose()).eval();
    return est;
}

EtcResult run_etc_discrete(const Environment& env, const AgentSpec& spec, const Policy& clairvoyant,
                           const EtcConfig& config, DpOptions dp) {
    const std::size_t n = config.override_n ? std::min(std::max<std::size_t>(*config.override_n, 1), config.horizon)
                                            : exploration_length_discrete(config.hint, config.horizon);
    EtcResult result;
    result.trace.seed = env.seed();
    result.trace.agent = "etc-discrete";
    result.exploration_length = n;
    std::vector<OutcomeVector> samples;
    const std::uint64_t base = config.episode_offset;
    for (std::size_t t = 1; t <= n; ++t) explore_episode(result.trace, env, spec, clairvoyant, base + t, samples);

    const auto empirical = empirical_discrete(samples);
    auto committed = std::make_shared<FallbackPolicy>(solve_dp_discrete(empirical, spec, dp), spec);
    result.committed = committed;
    for (std::size_t t = n + 1; t <= config.horizon; ++t)
        commit_episode(result.trace, env, spec, clairvoyant, *committed, base + t);
    result.trace.diagnostics["exploration_length"] = std::to_string(n);
    result.trace.diagnostics["empirical_support"] = std::to_string(empirical.size());
    return result;
}

EtcResult run_etc_gaussian(const Environment& env, const AgentSpec& spec, const Policy& clairvoyant,
                           const EtcConfig& config, Quadrature quadrature) {
    const std::size_t n = config.override_n ? std::min(std::max<std::size_t>(*config.override_n, 1), config.horizon)
                                            : exploration_length_gaussian(config.hint, config.horizon);
    EtcResult result;
    result.trace.seed = env.seed();
    result.trace.agent = "etc-gaussian";
    result.trace.diagnostics["covariance_estimator"] = config.zero_mean ? "uncentered" : "centered";
    std::vector<OutcomeVector> samples;
    const std::uint64_t base = config.episode_offset;
    std::size_t t = 0;
    while (t < n) explore_episode(result.trace, env, spec, clairvoyant, base + ++t, samples);

    std::shared_ptr<const GaussianPolicy> committed;
    const std::size_t limit = std::min(2 * n, config.horizon);
    while (!committed) {
        try {
            const auto est = estimate_gaussian(samples, config.zero_mean);
            committed = std::make_shared<GaussianPolicy>(
                solve_dp_gaussian(GaussianOutcomeModel(est.mean, est.cov), spec, quadrature));
        } catch (const NumericalError&) {
            if (t >= limit) break;
            explore_episode(result.trace, env, spec, clairvoyant, base + ++t, samples);
        }
    }
    result.exploration_length = t;
    result.trace.diagnostics["exploration_length"] = std::to_string(t);
    if (!committed) {
        result.estimation_failure = true;
        result.trace.diagnostics["estimation_failure"] = "true";
        while (t < config.horizon) explore_episode(result.trace, env, spec, clairvoyant, base + ++t, samples);
        return result;
    }
    result.committed = committed;
    while (t < config.horizon) commit_episode(result.trace, env, spec, clairvoyant, *committed, base + ++t);
    return result;
}

std::vector<std::size_t> doubling_batches(std::size_t total) {
    std::vector<std::size_t> out;
    std::size_t used = 0;
    for (std::size_t len = 1; used < total; len *= 2) {
        out.push_back(std::min(len, total - used));
        used += out.back();
    }
    return out;
}

RegretTrace run_doubling(const BatchRunner& runner, std::size_t total) {
    if (total == 0) throw InvalidArgument("run_doubling: total horizon must be positive");
    RegretTrace out;
    std::uint64_t offset = 0;
    std::size_t batch_index = 0;
    for (std::size_t len : doubling_batches(total)) {
        RegretTrace part = runner(len, offset);
        if (part.records.size() != len) throw InvalidArgument("run_doubling: batch trace has the wrong length");
        if (batch_index == 0) {
            out.seed = part.seed;
            out.agent = part.agent + "+doubling";
            out.instance_hash = part.instance_hash;
        }
        for (auto& r : part.records) out.push(std::move(r));
        ++batch_index;
        offset += len;
    }
    out.diagnostics["batches"] = std::to_string(batch_index);
    return out;
}

} // namespace otp
