#include "otp/replication.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <thread>

#include "otp/error.hpp"
#include "otp/etc.hpp"
#include "otp/ocmesp.hpp"

namespace otp {

void ExperimentConfig::validate() const {
    if (std::find_if(std::begin(kAgentNames), std::end(kAgentNames),
                     [&](const char* n) { return agent == n; }) == std::end(kAgentNames))
        throw InvalidArgument("unknown agent '" + agent + "'");
    if (horizon == 0) throw InvalidArgument("horizon must be positive");
    if (seeds.empty()) throw InvalidArgument("at least one seed is required");
    if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
        throw InvalidArgument("seeds must be distinct");
    if (agent != "clairvoyant" && !hint)
        throw InvalidArgument("agent '" + agent + "' needs a support-size or condition-number hint");
    if (hint && !(*hint > 0.0)) throw InvalidArgument("hint must be positive");
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["agent"] = agent;
    j["horizon"] = horizon;
    j["seeds"] = seeds;
    j["hint"] = hint ? nlohmann::json(*hint) : nlohmann::json(nullptr);
    j["override_n"] = override_n ? nlohmann::json(*override_n) : nlohmann::json(nullptr);
    j["nodes_per_test"] = quadrature.nodes_per_test;
    j["max_depth"] = quadrature.max_depth;
    j["max_states"] = dp.max_states;
    j["delta"] = delta;
    j["bernstein_c"] = bernstein_c;
    j["jobs"] = jobs;
    return j;
}

namespace {

class SubsetPolicyStub : public Policy {
public:
    Action act(const TestState&) const override { throw InvalidArgument("entropy instances have no OTP policy"); }
};

OcmespConfig elimination_config(const ProblemInstance& instance, const ExperimentConfig& config) {
    OcmespConfig c;
    c.sigma = config.hint.value_or(instance.gaussian().condition_number());
    c.d = instance.dim();
    c.delta = config.delta;
    c.lambda = instance.reward().lambda();
    c.costs = instance.costs();
    c.bernstein_c = config.bernstein_c;
    c.horizon = config.horizon;
    return c;
}

RegretTrace run_clairvoyant(const ProblemInstance& instance, const ExperimentConfig& config, std::uint64_t seed,
                            const Policy* clairvoyant) {
    const Environment env(instance.model(), seed);
    RegretTrace trace;
    trace.seed = seed;
    trace.agent = "clairvoyant";
    if (instance.reward().kind() == RewardKind::Entropy) {
        auto c = elimination_config(instance, config);
        const auto& sigma = instance.gaussian().cov();
        const Subset best = solve_mesp_offline(sigma, c.lambda, c.costs);
        const double value = entropy_objective(best, sigma, c.lambda, c.costs);
        for (std::uint64_t t = 1; t <= config.horizon; ++t) {
            const auto x = env.draw(t);
            EpisodeRecord r;
            r.episode = t;
            r.phase = "commit";
            r.tests = subset_indices(best);
            r.realized_reward = r.clairvoyant_reward = value;
            r.observed.assign(instance.dim(), std::nullopt);
            for (std::size_t i : r.tests) r.observed[i] = x[i];
            trace.push(std::move(r));
        }
        return trace;
    }
    for (std::uint64_t t = 1; t <= config.horizon; ++t) {
        const auto x = env.draw(t);
        const auto played = rollout(*clairvoyant, instance.spec(), x);
        trace.push(make_record(t, "commit", played, x, played.reward()));
    }
    return trace;
}

} // namespace

std::shared_ptr<const Policy> clairvoyant_policy(const ProblemInstance& instance, const ExperimentConfig& config) {
    if (instance.reward().kind() == RewardKind::Entropy) return std::make_shared<SubsetPolicyStub>();
    if (instance.is_discrete()) return std::make_shared<DiscretePolicy>(solve_dp_discrete(instance, config.dp));
    return std::make_shared<GaussianPolicy>(solve_dp_gaussian(instance, config.quadrature));
}

RegretTrace run_agent(const ProblemInstance& instance, const ExperimentConfig& config, std::uint64_t seed,
                      const Policy* clairvoyant) {
    const Environment env(instance.model(), seed);
    const bool entropy = instance.reward().kind() == RewardKind::Entropy;
    RegretTrace trace;
    const auto etc_config = [&](std::size_t horizon, std::uint64_t offset) {
        EtcConfig c;
        c.horizon = horizon;
        c.hint = *config.hint;
        c.override_n = config.override_n;
        c.episode_offset = offset;
        c.zero_mean = instance.is_gaussian() && instance.gaussian().mean().isZero(0.0);
        return c;
    };
    const auto etc_run = [&](std::size_t horizon, std::uint64_t offset) {
        if (instance.is_discrete())
            return run_etc_discrete(env, instance.spec(), *clairvoyant, etc_config(horizon, offset), config.dp).trace;
        return run_etc_gaussian(env, instance.spec(), *clairvoyant, etc_config(horizon, offset), config.quadrature)
            .trace;
    };

    if (config.agent == "clairvoyant") {
        trace = run_clairvoyant(instance, config, seed, clairvoyant);
    } else if (config.agent == "ocmesp") {
        if (!entropy) throw InvalidArgument("agent 'ocmesp' needs an entropy-reward instance");
        trace = run_ocmesp(env, elimination_config(instance, config)).trace;
    } else {
        if (entropy) throw InvalidArgument("agent '" + config.agent + "' needs a decision reward");
        if (config.agent == "etc-discrete" && !instance.is_discrete())
            throw InvalidArgument("agent 'etc-discrete' needs a discrete instance");
        if (config.agent == "etc-gaussian" && !instance.is_gaussian())
            throw InvalidArgument("agent 'etc-gaussian' needs a gaussian instance");
        if (config.agent == "etc-doubling") trace = run_doubling(etc_run, config.horizon);
        else trace = etc_run(config.horizon, 0);
    }
    trace.seed = seed;
    trace.instance_hash = instance_hash(instance);
    return trace;
}

std::vector<AggregateRow> aggregate(const std::vector<RegretTrace>& traces) {
    std::vector<AggregateRow> rows;
    if (traces.empty()) return rows;
    const std::size_t len = traces.front().length();
    for (const auto& t : traces)
        if (t.length() != len) throw InvalidArgument("aggregate: traces differ in length");
    const double n = static_cast<double>(traces.size());
    rows.resize(len);
    for (std::size_t e = 0; e < len; ++e) {
        // Shift by the first trace so identical traces give exactly zero sd.
        const double origin = traces.front().records[e].cumulative_regret;
        double sum = 0.0;
        for (const auto& t : traces) sum += t.records[e].cumulative_regret - origin;
        const double shift = sum / n;
        double ss = 0.0;
        for (const auto& t : traces) {
            const double dev = t.records[e].cumulative_regret - origin - shift;
            ss += dev * dev;
        }
        rows[e] = {traces.front().records[e].episode, origin + shift,
                   traces.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0};
    }
    return rows;
}

void write_aggregate_csv(const std::vector<AggregateRow>& rows, std::ostream& out) {
    out << "episode,mean,sd\n";
    for (const auto& r : rows) out << r.episode << ',' << format_double(r.mean) << ',' << format_double(r.sd) << '\n';
}

std::vector<RegretTrace> ReplicationResult::successful() const {
    std::vector<RegretTrace> out;
    for (const auto& t : traces)
        if (t) out.push_back(*t);
    return out;
}

bool ReplicationResult::all_succeeded() const {
    return std::all_of(errors.begin(), errors.end(), [](const std::string& e) { return e.empty(); });
}

ReplicationResult run_replications(const ProblemInstance& instance, const ExperimentConfig& config) {
    config.validate();
    const auto clairvoyant = clairvoyant_policy(instance, config);
    ReplicationResult result;
    result.seeds = config.seeds;
    const std::size_t n = config.seeds.size();
    result.traces.resize(n);
    result.errors.assign(n, std::string());

    std::size_t workers = config.jobs ? config.jobs : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k = next++; k < n; k = next++) {
            try {
                result.traces[k] = run_agent(instance, config, config.seeds[k], clairvoyant.get());
            } catch (const std::exception& e) {
                result.errors[k] = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    result.aggregate = aggregate(result.successful());
    return result;
}

void write_replication_outputs(const ReplicationResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (std::size_t k = 0; k < result.seeds.size(); ++k) {
        if (!result.traces[k]) continue;
        const auto& trace = *result.traces[k];
        const std::string tag = std::to_string(result.seeds[k]);
        std::ofstream trace_out(dir / ("trace_seed" + tag + ".csv"));
        write_trace_csv(trace, trace_out);
        std::ofstream dataset(dir / ("dataset_seed" + tag + ".csv"));
        write_dataset_csv(trace, dataset);
        nlohmann::json meta{{"seed", trace.seed},
                            {"agent", trace.agent},
                            {"instance_hash", trace.instance_hash},
                            {"diagnostics", trace.diagnostics}};
        std::ofstream(dir / ("meta_seed" + tag + ".json")) << meta.dump(2) << '\n';
    }
    std::ofstream agg(dir / "aggregate.csv");
    write_aggregate_csv(result.aggregate, agg);
    if (!result.all_succeeded()) {
        std::ofstream err(dir / "errors.txt");
        for (std::size_t k = 0; k < result.seeds.size(); ++k)
            if (!result.errors[k].empty()) err << "seed " << result.seeds[k] << ": " << result.errors[k] << '\n';
    }
}

} // namespace otp
