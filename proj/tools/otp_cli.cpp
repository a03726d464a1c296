// otp: generate instances, solve them clairvoyantly, simulate agents and
// summarize regret traces.
//
// Exit codes: 0 success, 1 usage error, 2 runtime or numerical failure.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "otp/dp_discrete.hpp"
#include "otp/dp_gaussian.hpp"
#include "otp/error.hpp"
#include "otp/generators.hpp"
#include "otp/ocmesp.hpp"
#include "otp/replication.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kUsage = 1;
constexpr int kRuntime = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GenArgs {
    std::string generator;
    std::size_t d = 4;
    std::uint64_t seed = 0;
    double shape = otp::pareto_shape_default();
    std::vector<double> costs{0.05};
    double lambda = 1.0;
    double eps = 0.2;
    int which = 1;
    std::size_t support_size = 2;
    std::string pattern = "1";
    std::size_t max_support = 8;
    std::size_t decisions = 3;
    std::string out;
};

int run_gen(const GenArgs& a) {
    const auto inst = [&] {
        if (a.generator == "pareto") return otp::gen_discrete_pareto(a.d, a.shape, a.seed, a.costs);
        if (a.generator == "gaussian-lowrank") return otp::gen_gaussian_lowrank(a.d, a.seed, a.costs, a.lambda);
        if (a.generator == "single-lb") return otp::gen_lower_bound_single(a.eps, a.which);
        if (a.generator == "stacked-lb") return otp::gen_lower_bound_stacked(a.eps, a.support_size, a.pattern);
        if (a.generator == "tiny") return otp::gen_random_tiny(a.d, a.max_support, a.decisions, a.seed);
        throw UsageError("unknown generator '" + a.generator + "'");
    }();
    if (a.out == "-") {
        std::cout << otp::instance_to_json(inst).dump(2) << '\n';
    } else {
        otp::save_instance(inst, a.out);
        std::cerr << "wrote " << a.out << " (hash " << otp::instance_hash(otp::load_instance(a.out)) << ")\n";
    }
    return 0;
}

struct SolveArgs {
    std::string instance;
    bool dump_policy = false;
    std::size_t max_states = 10'000'000;
    std::size_t nodes = 16;
    std::size_t max_depth = 6;
};

int run_solve(const SolveArgs& a) {
    const auto inst = otp::load_instance(a.instance);
    json out;
    out["instance_hash"] = otp::instance_hash(inst);
    if (inst.reward().kind() == otp::RewardKind::Entropy) {
        const auto& g = inst.gaussian();
        const auto best = otp::solve_mesp_offline(g.cov(), inst.reward().lambda(), inst.costs());
        out["optimal_subset"] = otp::subset_indices(best);
        out["root_value"] = otp::entropy_objective(best, g.cov(), inst.reward().lambda(), inst.costs());
        out["condition_number"] = g.condition_number();
    } else if (inst.is_discrete()) {
        const auto policy = otp::solve_dp_discrete(inst, otp::DpOptions{a.max_states});
        out["root_value"] = policy.root_value();
        out["root_action"] = policy.act(otp::TestState(inst.dim())).to_string();
        out["num_states"] = policy.num_states();
        if (a.dump_policy) out["policy"] = policy.dump();
    } else {
        otp::Quadrature q;
        q.nodes_per_test = a.nodes;
        q.max_depth = a.max_depth;
        const auto policy = otp::solve_dp_gaussian(inst, q);
        out["root_value"] = policy.root_value();
        out["root_action"] = policy.root_action().to_string();
    }
    std::cout << out.dump(2) << '\n';
    return 0;
}

struct SimulateArgs {
    std::string instance;
    std::string out;
    otp::ExperimentConfig config;
    std::vector<std::uint64_t> seeds;
    std::size_t num_seeds = 0;
    std::uint64_t seed_base = 0;
    double hint = 0.0;
    std::size_t override_n = 0;
};

int run_simulate(SimulateArgs a, const CLI::App& sub) {
    if (sub.count("--hint")) a.config.hint = a.hint;
    if (sub.count("--override-n")) a.config.override_n = a.override_n;
    if (!a.seeds.empty() && a.num_seeds > 0) throw UsageError("give either --seeds or --num-seeds, not both");
    if (a.num_seeds > 0) {
        a.seeds.clear();
        for (std::size_t k = 0; k < a.num_seeds; ++k) a.seeds.push_back(a.seed_base + k);
    }
    if (!a.seeds.empty()) a.config.seeds = a.seeds;
    try {
        a.config.validate();
    } catch (const otp::InvalidArgument& e) {
        throw UsageError(e.what());
    }
    const auto inst = otp::load_instance(a.instance);
    const auto result = otp::run_replications(inst, a.config);
    otp::write_replication_outputs(result, a.out);

    json effective = a.config.to_json();
    effective["instance"] = fs::absolute(a.instance).string();
    effective["instance_hash"] = otp::instance_hash(inst);
    effective["seeds"] = a.config.seeds;
    // jobs does not affect outputs; leave it out so reruns compare equal.
    effective.erase("jobs");
    std::ofstream(fs::path(a.out) / "config.json") << effective.dump(2) << '\n';

    for (std::size_t k = 0; k < result.seeds.size(); ++k) {
        if (!result.errors[k].empty()) {
            std::cerr << "seed " << result.seeds[k] << " failed: " << result.errors[k] << '\n';
            continue;
        }
        const auto& t = *result.traces[k];
        std::cout << "seed " << t.seed << ": final cumulative regret " << otp::format_double(t.final_regret());
        if (auto it = t.diagnostics.find("exploration_length"); it != t.diagnostics.end())
            std::cout << ", exploration " << it->second;
        std::cout << '\n';
    }
    return result.all_succeeded() ? 0 : kRuntime;
}

int run_report(const std::string& dir) {
    if (!fs::is_directory(dir)) throw UsageError("not a directory: " + dir);
    std::map<std::size_t, std::vector<double>> finals;  // horizon -> final regrets
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (entry.is_regular_file() && name.rfind("trace", 0) == 0 && entry.path().extension() == ".csv")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        std::ifstream in(f);
        const auto trace = otp::read_trace_csv(in);
        if (trace.records.empty()) continue;
        finals[trace.records.size()].push_back(trace.final_regret());
    }
    if (finals.empty()) {
        std::cerr << "no trace files under " << dir << '\n';
        return kRuntime;
    }
    std::map<std::size_t, double> means;
    std::cout << "horizon,traces,mean_final_regret,sd_final_regret\n";
    for (const auto& [horizon, values] : finals) {
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        const double sd = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
        means[horizon] = mean;
        std::cout << horizon << ',' << values.size() << ',' << otp::format_double(mean) << ','
                  << otp::format_double(sd) << '\n';
    }
    bool header = false;
    for (const auto& [horizon, mean] : means) {
        const auto it = means.find(2 * horizon);
        if (it == means.end()) continue;
        if (!header) {
            std::cout << "\nhorizon,doubled,ratio\n";
            header = true;
        }
        std::cout << horizon << ',' << 2 * horizon << ',' << otp::format_double(it->second / mean) << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online sequential testing: instance generation, clairvoyant DP, agent simulation"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate an instance file");
    gen_cmd->add_option("generator", gen.generator, "pareto | gaussian-lowrank | single-lb | stacked-lb | tiny")
        ->required();
    gen_cmd->add_option("--d", gen.d, "Number of tests");
    gen_cmd->add_option("--seed", gen.seed, "Generator seed");
    gen_cmd->add_option("--shape", gen.shape, "Pareto shape (default ln5/ln4)");
    gen_cmd->add_option("--costs", gen.costs, "Test costs: one value or one per test")->delimiter(',');
    gen_cmd->add_option("--lambda", gen.lambda, "Information weight for entropy rewards");
    gen_cmd->add_option("--eps", gen.eps, "Gap of the lower-bound instances");
    gen_cmd->add_option("--which", gen.which, "Lower-bound instance 1 or 2");
    gen_cmd->add_option("--support-size", gen.support_size, "Support size of the stacked instance");
    gen_cmd->add_option("--pattern", gen.pattern, "Bit string choosing instance 1 or 2 per value of the free test");
    gen_cmd->add_option("--max-support", gen.max_support, "Largest support of a tiny instance");
    gen_cmd->add_option("--decisions", gen.decisions, "Decision count of a tiny instance");
    gen_cmd->add_option("--out", gen.out, "Output path, or - for standard output")->required();

    SolveArgs solve;
    auto* solve_cmd = app.add_subcommand("solve", "Solve an instance with the clairvoyant DP");
    solve_cmd->add_option("instance", solve.instance, "Instance JSON")->required()->check(CLI::ExistingFile);
    solve_cmd->add_flag("--dump-policy", solve.dump_policy, "Include the full value table (discrete)");
    solve_cmd->add_option("--max-states", solve.max_states, "State cap of the discrete DP");
    solve_cmd->add_option("--nodes", solve.nodes, "Gauss-Hermite nodes per test (gaussian)");
    solve_cmd->add_option("--max-depth", solve.max_depth, "Largest d the gaussian DP accepts");

    app.set_config("--config", "", "TOML/INI file; a [simulate] section fills simulate options, flags take precedence");

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Run an agent over seeds and write traces");
    sim_cmd->configurable();
    sim_cmd->add_option("--instance", sim.instance, "Instance JSON")->required()->check(CLI::ExistingFile);
    sim_cmd->add_option("--agent", sim.config.agent, "etc-discrete | etc-gaussian | etc-doubling | ocmesp | clairvoyant")
        ->required();
    sim_cmd->add_option("--horizon", sim.config.horizon, "Episodes per run")->required();
    sim_cmd->add_option("--seeds", sim.seeds, "Comma-separated seeds")->delimiter(',');
    sim_cmd->add_option("--num-seeds", sim.num_seeds, "Use seeds seed-base .. seed-base + n - 1");
    sim_cmd->add_option("--seed-base", sim.seed_base, "First seed for --num-seeds");
    sim_cmd->add_option("--hint,--support-hint,--sigma", sim.hint,
                        "Support size (discrete ETC) or condition-number bound (gaussian ETC, ocmesp)");
    sim_cmd->add_option("--override-n", sim.override_n, "Fixed exploration length");
    sim_cmd->add_option("--delta", sim.config.delta, "Failure probability of the elimination agent");
    sim_cmd->add_option("--bernstein-c", sim.config.bernstein_c, "Constant in the elimination width");
    sim_cmd->add_option("--nodes", sim.config.quadrature.nodes_per_test, "Gauss-Hermite nodes per test");
    sim_cmd->add_option("--max-depth", sim.config.quadrature.max_depth, "Largest d the gaussian DP accepts");
    sim_cmd->add_option("--max-states", sim.config.dp.max_states, "State cap of the discrete DP");
    sim_cmd->add_option("--jobs", sim.config.jobs, "Worker threads (0 = all processors)");
    sim_cmd->add_option("--out", sim.out, "Output directory")->required();

    std::string report_dir;
    auto* report_cmd = app.add_subcommand("report", "Summarize trace CSVs under a directory");
    report_cmd->add_option("dir", report_dir, "Directory holding trace CSVs")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsage;
    }

    try {
        if (*gen_cmd) return run_gen(gen);
        if (*solve_cmd) return run_solve(solve);
        if (*sim_cmd) return run_simulate(sim, *sim_cmd);
        if (*report_cmd) return run_report(report_dir);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const otp::InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
    return kUsage;
}
