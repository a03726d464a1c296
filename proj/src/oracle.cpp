#include "otp/oracle.hpp"

#include <array>
#include <deque>
#include <functional>

#include "otp/error.hpp"

namespace otp {

Action TreePolicy::act(const TestState& s) const {
    const PolicyTree* node = root_.get();
    while (node->action.is_test() && s.observed(node->action.index)) {
        const auto it = node->children.find(s.value(node->action.index));
        if (it == node->children.end())
            throw InvalidArgument("tree policy: undefined at state " + s.to_string());
        node = it->second.get();
    }
    return node->action;
}

namespace {

constexpr std::size_t kMaxDim = 3;
constexpr std::size_t kMaxSupport = 8;
constexpr std::size_t kMaxDecisions = 3;

// A deterministic subpolicy from some information set, summarized by its
// realized reward on each support point consistent with that set.
struct SubPolicy {
    std::array<double, kMaxSupport> reward{};
    Action action;
    std::vector<std::pair<double, const SubPolicy*>> children;
};

class Enumerator {
public:
    explicit Enumerator(const ProblemInstance& inst) : inst_(inst), model_(inst.discrete()) {}

    // Every deterministic subpolicy from the information set (tested,
    // consistent), memoized per set.
    const std::deque<SubPolicy>& policies(unsigned tested, unsigned consistent) {
        const auto key = std::make_pair(tested, consistent);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        std::deque<SubPolicy> out;
        expand(tested, consistent, [&](SubPolicy&& p) { out.push_back(std::move(p)); });
        return memo_.emplace(key, std::move(out)).first->second;
    }

    void expand(unsigned tested, unsigned consistent, const std::function<void(SubPolicy&&)>& emit) {
        const std::size_t k = model_.size();
        for (std::size_t y = 0; y < inst_.decisions().size(); ++y) {
            SubPolicy p;
            p.action = Action::decide(y);
            for (std::size_t a = 0; a < k; ++a)
                if (consistent >> a & 1U) p.reward[a] = inst_.reward().evaluate(model_.point(a), y, inst_.decisions());
            emit(std::move(p));
        }
        for (std::size_t i = 0; i < model_.dim(); ++i) {
            if (tested >> i & 1U) continue;
            std::vector<std::pair<double, unsigned>> groups;
            for (std::size_t a = 0; a < k; ++a) {
                if (!(consistent >> a & 1U)) continue;
                const double v = model_.point(a)[i];
                auto g = std::find_if(groups.begin(), groups.end(), [&](const auto& e) { return e.first == v; });
                if (g == groups.end()) groups.emplace_back(v, 1U << a);
                else g->second |= 1U << a;
            }
            std::vector<const std::deque<SubPolicy>*> lists;
            for (const auto& [v, mask] : groups) lists.push_back(&policies(tested | (1U << i), mask));
            // Odometer over one child subpolicy per observed value.
            std::vector<std::size_t> pick(groups.size(), 0);
            while (true) {
                SubPolicy p;
                p.action = Action::test(i);
                for (std::size_t g = 0; g < groups.size(); ++g) {
                    const SubPolicy& child = (*lists[g])[pick[g]];
                    p.children.emplace_back(groups[g].first, &child);
                    for (std::size_t a = 0; a < k; ++a)
                        if (groups[g].second >> a & 1U) p.reward[a] = child.reward[a] - inst_.costs()[i];
                }
                emit(std::move(p));
                std::size_t g = 0;
                while (g < pick.size() && ++pick[g] == lists[g]->size()) pick[g++] = 0;
                if (g == pick.size()) break;
            }
        }
    }

private:
    const ProblemInstance& inst_;
    const DiscreteOutcomeModel& model_;
    std::map<std::pair<unsigned, unsigned>, std::deque<SubPolicy>> memo_;
};

std::shared_ptr<const PolicyTree> to_tree(const SubPolicy& p) {
    auto node = std::make_shared<PolicyTree>();
    node->action = p.action;
    for (const auto& [v, child] : p.children) node->children.emplace(v, to_tree(*child));
    return node;
}

} // namespace

OracleResult brute_force_policy_oracle(const ProblemInstance& instance) {
    if (!instance.is_discrete()) throw InvalidArgument("oracle: discrete instances only");
    const auto& model = instance.discrete();
    if (model.dim() > kMaxDim || model.size() > kMaxSupport || instance.decisions().size() > kMaxDecisions)
        throw CapacityError("oracle: instance exceeds d <= 3, K <= 8, |Y| <= 3");

    Enumerator en(instance);
    const unsigned all = (1U << model.size()) - 1;
    bool found = false;
    double best = 0.0;
    std::size_t count = 0;
    std::shared_ptr<const PolicyTree> best_tree;
    en.expand(0, all, [&](SubPolicy&& p) {
        ++count;
        double value = 0.0;
        for (std::size_t a = 0; a < model.size(); ++a) value += model.prob(a) * p.reward[a];
        if (!found || value > best) {
            best = value;
            best_tree = to_tree(p);
            found = true;
        }
    });
    return {best, TreePolicy(best_tree), count};
}

} // namespace otp
