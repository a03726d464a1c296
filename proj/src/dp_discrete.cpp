#include "otp/dp_discrete.hpp"

#include <bit>
#include <map>

#include "otp/error.hpp"

namespace otp {

bool SupportSet::empty() const {
    for (auto w : words_)
        if (w) return false;
    return true;
}

std::size_t SupportSet::count() const {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
}

std::size_t SupportSet::hash() const {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (auto w : words_) h = mix64(h ^ w);
    return static_cast<std::size_t>(h);
}

namespace {

using Table = std::unordered_map<SupportSet, ValueEntry, SupportSetHash>;

// Values are carried unnormalized (mass * value) so the recursion needs no
// division; comparisons are unchanged because mass > 0.
class DiscreteSolver {
public:
    DiscreteSolver(const DiscreteOutcomeModel& model, const AgentSpec& spec,
                   const std::vector<std::size_t>& active, DpOptions options)
        : model_(model), spec_(spec), active_(active), options_(options) {
        num_decisions_ = spec.reward.kind() == RewardKind::Table
                             ? (spec.reward.table_values().empty() ? 0 : spec.reward.table_values().front().size())
                             : spec.decisions.size();
        if (num_decisions_ == 0) throw InvalidArgument("solve_dp_discrete: empty decision set");
        if (spec.reward.kind() == RewardKind::IndicatorMatch) {
            std::map<OutcomeVector, std::vector<std::size_t>> by_vector;
            for (std::size_t y = 0; y < spec.decisions.size(); ++y) by_vector[spec.decisions[y]].push_back(y);
            matches_.resize(active_.size());
            for (std::size_t a = 0; a < active_.size(); ++a) {
                const auto it = by_vector.find(model.point(active_[a]));
                if (it != by_vector.end()) matches_[a] = it->second;
            }
            scratch_.assign(num_decisions_, 0.0);
        } else if (spec.reward.kind() == RewardKind::Table) {
            rewards_.resize(active_.size());
            for (std::size_t a = 0; a < active_.size(); ++a) {
                rewards_[a].resize(num_decisions_);
                for (std::size_t y = 0; y < num_decisions_; ++y)
                    rewards_[a][y] = spec.reward.evaluate(model.point(active_[a]), y, spec.decisions);
            }
        } else {
            throw InvalidArgument(std::string("solve_dp_discrete: unsupported reward '") +
                                  to_string(spec.reward.kind()) + "'");
        }
    }

    const ValueEntry& solve(const SupportSet& set) {
        if (auto it = table_.find(set); it != table_.end()) return it->second;

        double mass = 0.0;
        set.for_each([&](std::size_t a) { mass += model_.prob(active_[a]); });

        ValueEntry entry;
        entry.mass = mass;
        const auto [dec_value, dec_index] = best_decision(set);
        entry.weighted = dec_value;
        entry.best = Action::decide(dec_index);

        bool have_test = false;
        double best_q = 0.0;
        std::size_t best_test = 0;
        std::vector<std::pair<double, SupportSet>> groups;
        for (std::size_t i = 0; i < model_.dim(); ++i) {
            groups.clear();
            set.for_each([&](std::size_t a) {
                const double v = model_.point(active_[a])[i];
                for (auto& [gv, gs] : groups)
                    if (gv == v) {
                        gs.set(a);
                        return;
                    }
                groups.emplace_back(v, SupportSet(active_.size()));
                groups.back().second.set(a);
            });
            // Coordinates constant on the set (observed ones included) reveal nothing.
            if (groups.size() < 2) continue;
            double q = -spec_.costs[i] * mass;
            for (const auto& [gv, gs] : groups) q += solve(gs).weighted;
            if (!have_test || q > best_q) {
                have_test = true;
                best_q = q;
                best_test = i;
            }
        }
        if (have_test && best_q > entry.weighted) {
            entry.weighted = best_q;
            entry.best = Action::test(best_test);
        }
        entry.value = mass > 0.0 ? entry.weighted / mass : 0.0;

        if (table_.size() >= options_.max_states)
            throw CapacityError("solve_dp_discrete: more than " + std::to_string(options_.max_states) +
                                " canonical states; raise the state cap or shrink the instance");
        return table_.emplace(set, entry).first->second;
    }

    Table take() { return std::move(table_); }

private:
    std::pair<double, std::size_t> best_decision(const SupportSet& set) {
        if (!matches_.empty()) {
            touched_.clear();
            set.for_each([&](std::size_t a) {
                for (std::size_t y : matches_[a]) {
                    if (scratch_[y] == 0.0) touched_.push_back(y);
                    scratch_[y] += model_.prob(active_[a]);
                }
            });
            double best = 0.0;
            std::size_t best_y = 0;
            bool found = false;
            for (std::size_t y : touched_) {
                if (!found || scratch_[y] > best || (scratch_[y] == best && y < best_y)) {
                    best = scratch_[y];
                    best_y = y;
                    found = true;
                }
                scratch_[y] = 0.0;
            }
            if (!found || best <= 0.0) return {0.0, 0};
            return {best, best_y};
        }
        double best = 0.0;
        std::size_t best_y = 0;
        for (std::size_t y = 0; y < num_decisions_; ++y) {
            double total = 0.0;
            set.for_each([&](std::size_t a) { total += model_.prob(active_[a]) * rewards_[a][y]; });
            if (y == 0 || total > best) {
                best = total;
                best_y = y;
            }
        }
        return {best, best_y};
    }

    const DiscreteOutcomeModel& model_;
    const AgentSpec& spec_;
    const std::vector<std::size_t>& active_;
    DpOptions options_;
    std::size_t num_decisions_ = 0;
    std::vector<std::vector<std::size_t>> matches_;
    std::vector<std::vector<double>> rewards_;
    std::vector<double> scratch_;
    std::vector<std::size_t> touched_;
    Table table_;
};

} // namespace

SupportSet DiscretePolicy::consistent_set(const TestState& s) const {
    if (s.dim() != model_->dim()) throw InvalidArgument("policy: state dimension mismatch");
    SupportSet set(active_.size());
    for (std::size_t a = 0; a < active_.size(); ++a)
        if (consistent(model_->point(active_[a]), s)) set.set(a);
    return set;
}

const ValueEntry& DiscretePolicy::entry(const TestState& s) const {
    const SupportSet set = consistent_set(s);
    if (set.empty()) throw ImpossibleState("policy: impossible state " + s.to_string());
    const auto it = table_->find(set);
    if (it == table_->end()) throw InvalidArgument("policy: undefined at unreachable state " + s.to_string());
    return it->second;
}

Action DiscretePolicy::act(const TestState& s) const { return entry(s).best; }

nlohmann::json DiscretePolicy::dump() const {
    // Sorted by key so the dump is independent of hash-table iteration order.
    std::map<std::vector<std::size_t>, const ValueEntry*> sorted;
    for (const auto& [set, e] : *table_) {
        std::vector<std::size_t> key;
        set.for_each([&](std::size_t a) { key.push_back(active_[a]); });
        sorted.emplace(std::move(key), &e);
    }
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [key, e] : sorted)
        out.push_back({{"state_key", key}, {"action", e->best.to_string()}, {"value", e->value}});
    return out;
}

DiscretePolicy solve_dp_discrete(const DiscreteOutcomeModel& model, const AgentSpec& spec, DpOptions options) {
    if (spec.dim() != model.dim()) throw InvalidArgument("solve_dp_discrete: cost vector dimension mismatch");
    DiscretePolicy policy;
    policy.model_ = std::make_shared<const DiscreteOutcomeModel>(model);
    policy.spec_ = std::make_shared<const AgentSpec>(spec);
    for (std::size_t k = 0; k < model.size(); ++k)
        if (model.prob(k) > 0.0) policy.active_.push_back(k);

    DiscreteSolver solver(*policy.model_, *policy.spec_, policy.active_, options);
    SupportSet root(policy.active_.size());
    for (std::size_t a = 0; a < policy.active_.size(); ++a) root.set(a);
    policy.root_value_ = solver.solve(root).value;
    policy.table_ = std::make_shared<const Table>(solver.take());
    return policy;
}

DiscretePolicy solve_dp_discrete(const ProblemInstance& instance, DpOptions options) {
    return solve_dp_discrete(instance.discrete(), instance.spec(), options);
}

double decision_reward(const DiscreteOutcomeModel& model, const AgentSpec& spec, const TestState& s,
                       std::size_t y) {
    if (s.is_terminal()) throw InvalidArgument("decision_reward: terminal state");
    double mass = 0.0;
    double total = 0.0;
    for (std::size_t k : model.consistent_indices(s)) {
        mass += model.prob(k);
        total += model.prob(k) * spec.reward.evaluate(model.point(k), y, spec.decisions);
    }
    if (!(mass > 0.0)) throw ImpossibleState("decision_reward: impossible state " + s.to_string());
    return total / mass;
}

double q_value(const DiscreteOutcomeModel& model, const AgentSpec& spec, const TestState& s,
               std::size_t test, const std::function<double(const TestState&)>& value_lookup) {
    double q = -spec.costs.at(test);
    for (const auto& [v, p] : marginal_discrete(model, s, test))
        q += p * value_lookup(apply_observation(s, test, v));
    return q;
}

double evaluate_policy(const ProblemInstance& instance, const Policy& policy) {
    const auto& model = instance.discrete();
    double total = 0.0;
    for (std::size_t k = 0; k < model.size(); ++k) {
        if (model.prob(k) == 0.0) continue;
        total += model.prob(k) * rollout(policy, instance.spec(), model.point(k)).reward();
    }
    return total;
}

} // namespace otp
