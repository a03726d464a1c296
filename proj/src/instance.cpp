#include "otp/instance.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>

#include "otp/error.hpp"

namespace otp {

using nlohmann::json;

double AgentSpec::test_cost(const std::vector<std::size_t>& tests) const {
    double total = 0.0;
    for (std::size_t i : tests) total += costs.at(i);
    return total;
}

ProblemInstance::ProblemInstance(OutcomeModel model, std::vector<double> costs, DecisionSet decisions,
                                 RewardSpec reward)
    : model_(std::move(model)), spec_{std::move(costs), std::move(decisions), std::move(reward)} {
    const std::size_t d = dim();
    if (spec_.costs.size() != d)
        throw InvalidArgument("instance: expected " + std::to_string(d) + " costs, got " +
                              std::to_string(spec_.costs.size()));
    for (double c : spec_.costs)
        if (!std::isfinite(c) || c < 0.0) throw InvalidArgument("instance: costs must be finite and nonnegative");

    const auto kind = spec_.reward.kind();
    if (is_discrete()) {
        const auto& m = discrete();
        if (kind == RewardKind::Quadratic || kind == RewardKind::Entropy)
            throw InvalidArgument(std::string("instance: reward '") + to_string(kind) +
                                  "' requires a gaussian model");
        if (spec_.decisions.empty()) throw InvalidArgument("instance: decision set is empty");
        if (kind == RewardKind::IndicatorMatch) {
            for (const auto& y : spec_.decisions)
                if (y.size() != d) throw InvalidArgument("instance: indicator-match decisions must have length d");
        } else {
            const auto& tab = spec_.reward.table_values();
            if (tab.size() != m.size())
                throw InvalidArgument("instance: reward table needs one row per support point");
            for (const auto& row : tab)
                if (row.size() != spec_.decisions.size())
                    throw InvalidArgument("instance: reward table needs one column per decision");
            for (std::size_t k = 0; k < m.size(); ++k)
                if (spec_.reward.table_keys()[k] != m.point(k))
                    throw InvalidArgument("instance: reward table keys differ from the support");
        }
    } else {
        if (kind == RewardKind::Table || kind == RewardKind::IndicatorMatch)
            throw InvalidArgument(std::string("instance: reward '") + to_string(kind) +
                                  "' is not supported for gaussian models");
        if (kind == RewardKind::Quadratic) {
            if (spec_.decisions.empty()) throw InvalidArgument("instance: decision set is empty");
            for (const auto& y : spec_.decisions)
                if (y.size() != 1) throw InvalidArgument("instance: quadratic rewards take scalar decisions");
            if (spec_.reward.weights().size() != d)
                throw InvalidArgument("instance: quadratic reward needs d weights");
        } else if (!spec_.decisions.empty()) {
            throw InvalidArgument("instance: entropy instances take no decisions");
        }
    }
}

std::size_t ProblemInstance::dim() const {
    return std::visit([](const auto& m) { return m.dim(); }, model_);
}

const DiscreteOutcomeModel& ProblemInstance::discrete() const {
    if (!is_discrete()) throw InvalidArgument("instance is not discrete");
    return std::get<DiscreteOutcomeModel>(model_);
}

const GaussianOutcomeModel& ProblemInstance::gaussian() const {
    if (!is_gaussian()) throw InvalidArgument("instance is not gaussian");
    return std::get<GaussianOutcomeModel>(model_);
}

double ProblemInstance::realized_reward(std::span<const double> x, const std::vector<std::size_t>& tests,
                                        std::size_t decision) const {
    return spec_.reward.evaluate(x, decision, spec_.decisions) - spec_.test_cost(tests);
}

namespace {

std::vector<double> as_vector(const json& j, const char* what) {
    if (!j.is_array()) throw InvalidArgument(std::string("instance: '") + what + "' must be an array");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) throw InvalidArgument(std::string("instance: '") + what + "' must hold numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

std::vector<std::vector<double>> as_matrix(const json& j, const char* what) {
    if (!j.is_array()) throw InvalidArgument(std::string("instance: '") + what + "' must be an array");
    std::vector<std::vector<double>> out;
    for (const auto& row : j) out.push_back(as_vector(row, what));
    return out;
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const char* where) {
    for (const auto& [key, _] : j.items())
        if (!allowed.contains(key))
            throw InvalidArgument(std::string("instance: unknown key '") + key + "' in " + where);
}

} // namespace

ProblemInstance instance_from_json(const json& j) {
    if (!j.is_object()) throw InvalidArgument("instance: top level must be an object");
    reject_unknown(j, {"type", "d", "support", "probs", "mean", "cov", "costs", "decisions", "reward"}, "instance");
    for (const char* key : {"type", "d", "costs", "reward"})
        if (!j.contains(key)) throw InvalidArgument(std::string("instance: missing key '") + key + "'");

    const std::string type = j.at("type").get<std::string>();
    if (!j.at("d").is_number_integer() || j.at("d").get<long long>() < 1)
        throw InvalidArgument("instance: 'd' must be a positive integer");
    const auto d = static_cast<std::size_t>(j.at("d").get<long long>());

    const json& r = j.at("reward");
    if (!r.is_object() || !r.contains("kind")) throw InvalidArgument("instance: reward needs a 'kind'");
    reject_unknown(r, {"kind", "table", "lambda", "weights"}, "reward");
    const std::string kind = r.at("kind").get<std::string>();

    DecisionSet decisions;
    if (j.contains("decisions")) {
        if (!j.at("decisions").is_array()) throw InvalidArgument("instance: 'decisions' must be an array");
        for (const auto& y : j.at("decisions")) {
            if (y.is_number()) decisions.push_back({y.get<double>()});
            else decisions.push_back(as_vector(y, "decisions"));
        }
    }
    const auto costs = as_vector(j.at("costs"), "costs");

    if (type == "discrete") {
        for (const char* key : {"mean", "cov"})
            if (j.contains(key)) throw InvalidArgument(std::string("instance: '") + key + "' is not valid for discrete instances");
        if (!j.contains("support") || !j.contains("probs"))
            throw InvalidArgument("instance: discrete instances need 'support' and 'probs'");
        auto support = as_matrix(j.at("support"), "support");
        auto probs = as_vector(j.at("probs"), "probs");
        for (const auto& x : support)
            if (x.size() != d) throw InvalidArgument("instance: support vectors must have length d");
        const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
        if (!(std::abs(total - 1.0) <= 1e-9))
            throw InvalidArgument("instance: probabilities sum to " + std::to_string(total));
        for (double& p : probs) p /= total;
        DiscreteOutcomeModel model(support, std::move(probs), 1e-12);

        RewardSpec reward = RewardSpec::indicator_match();
        if (kind == "table") {
            if (!r.contains("table")) throw InvalidArgument("instance: table reward needs 'table'");
            reward = RewardSpec::table(std::move(support), as_matrix(r.at("table"), "table"));
        } else if (kind != "indicator-match") {
            throw InvalidArgument("instance: reward kind '" + kind + "' is not valid for discrete instances");
        }
        return ProblemInstance(std::move(model), costs, std::move(decisions), std::move(reward));
    }
    if (type == "gaussian") {
        for (const char* key : {"support", "probs"})
            if (j.contains(key)) throw InvalidArgument(std::string("instance: '") + key + "' is not valid for gaussian instances");
        if (!j.contains("mean") || !j.contains("cov"))
            throw InvalidArgument("instance: gaussian instances need 'mean' and 'cov'");
        const auto mean = as_vector(j.at("mean"), "mean");
        const auto cov = as_matrix(j.at("cov"), "cov");
        if (mean.size() != d || cov.size() != d) throw InvalidArgument("instance: mean/cov must have dimension d");
        Eigen::VectorXd mu(d);
        Eigen::MatrixXd sigma(d, d);
        for (std::size_t i = 0; i < d; ++i) {
            mu(i) = mean[i];
            if (cov[i].size() != d) throw InvalidArgument("instance: cov must be d x d");
            for (std::size_t k = 0; k < d; ++k) sigma(i, k) = cov[i][k];
        }
        RewardSpec reward = RewardSpec::indicator_match();
        if (kind == "entropy") {
            if (!r.contains("lambda")) throw InvalidArgument("instance: entropy reward needs 'lambda'");
            reward = RewardSpec::entropy(r.at("lambda").get<double>());
        } else if (kind == "quadratic") {
            if (!r.contains("weights")) throw InvalidArgument("instance: quadratic reward needs 'weights'");
            reward = RewardSpec::quadratic(as_vector(r.at("weights"), "weights"));
        } else {
            throw InvalidArgument("instance: reward kind '" + kind + "' is not valid for gaussian instances");
        }
        return ProblemInstance(GaussianOutcomeModel(std::move(mu), std::move(sigma)), costs,
                               std::move(decisions), std::move(reward));
    }
    throw InvalidArgument("instance: unknown type '" + type + "'");
}

json instance_to_json(const ProblemInstance& inst) {
    json j;
    j["d"] = inst.dim();
    j["costs"] = inst.costs();
    json decisions = json::array();
    for (const auto& y : inst.decisions()) {
        if (inst.reward().kind() == RewardKind::Quadratic) decisions.push_back(y.front());
        else decisions.push_back(y);
    }
    j["decisions"] = decisions;
    json reward;
    reward["kind"] = to_string(inst.reward().kind());
    switch (inst.reward().kind()) {
        case RewardKind::Table: reward["table"] = inst.reward().table_values(); break;
        case RewardKind::Quadratic: reward["weights"] = inst.reward().weights(); break;
        case RewardKind::Entropy: reward["lambda"] = inst.reward().lambda(); break;
        case RewardKind::IndicatorMatch: break;
    }
    j["reward"] = reward;
    if (inst.is_discrete()) {
        j["type"] = "discrete";
        j["support"] = inst.discrete().support();
        j["probs"] = inst.discrete().probs();
    } else {
        const auto& g = inst.gaussian();
        j["type"] = "gaussian";
        j["mean"] = std::vector<double>(g.mean().data(), g.mean().data() + g.dim());
        json cov = json::array();
        for (std::size_t i = 0; i < g.dim(); ++i) {
            json row = json::array();
            for (std::size_t k = 0; k < g.dim(); ++k) row.push_back(g.cov()(i, k));
            cov.push_back(row);
        }
        j["cov"] = cov;
    }
    return j;
}

ProblemInstance load_instance(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open instance file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw InvalidArgument("instance file " + path.string() + ": " + e.what());
    }
    try {
        return instance_from_json(j);
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("instance: ") + e.what());
    }
}

void save_instance(const ProblemInstance& inst, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write instance file " + path.string());
    out << instance_to_json(inst).dump(2) << '\n';
}

std::string instance_hash(const ProblemInstance& inst) {
    const std::string text = instance_to_json(inst).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

OutcomeVector sample(const OutcomeModel& model, Rng& rng) {
    return std::visit([&](const auto& m) { return m.sample(rng); }, model);
}

Marginal marginal_over_test(const OutcomeModel& model, const TestState& s, std::size_t test) {
    if (const auto* dm = std::get_if<DiscreteOutcomeModel>(&model)) return marginal_discrete(*dm, s, test);
    return marginal_gaussian(std::get<GaussianOutcomeModel>(model), s, test);
}

} // namespace otp
