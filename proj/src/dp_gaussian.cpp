#include "otp/dp_gaussian.hpp"

#include <cmath>
#include <limits>

#include "otp/error.hpp"

namespace otp {

GaussHermiteRule gauss_hermite(std::size_t n) {
    if (n == 0) throw InvalidArgument("gauss_hermite: need at least one node");
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t k = 1; k < n; ++k) {
        jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
        jacobi(k - 1, k) = jacobi(k, k - 1);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    GaussHermiteRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        rule.nodes[k] = es.eigenvalues()(k);
        rule.weights[k] = es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
        total += rule.weights[k];
    }
    for (double& w : rule.weights) w /= total;
    // Symmetrize: exact zero for the middle node of odd rules.
    for (std::size_t k = 0; k < n / 2; ++k) {
        const double z = 0.5 * (rule.nodes[n - 1 - k] - rule.nodes[k]);
        const double w = 0.5 * (rule.weights[k] + rule.weights[n - 1 - k]);
        rule.nodes[k] = -z;
        rule.nodes[n - 1 - k] = z;
        rule.weights[k] = rule.weights[n - 1 - k] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

double scenario_tree_size(std::size_t free, std::size_t nodes_per_test) {
    double size = 1.0;
    for (std::size_t k = 1; k <= free; ++k) size = 1.0 + static_cast<double>(k * nodes_per_test) * size;
    return size;
}

namespace {

double quadratic_decision(double mean_w, double var_w, const DecisionSet& decisions, std::size_t& best_y) {
    double best = 0.0;
    for (std::size_t y = 0; y < decisions.size(); ++y) {
        const double diff = mean_w - decisions[y].front();
        const double v = -diff * diff - var_w;
        if (y == 0 || v > best) {
            best = v;
            best_y = y;
        }
    }
    return best;
}

} // namespace

double gaussian_decision_reward(const GaussianOutcomeModel& model, const AgentSpec& spec, const TestState& s,
                                std::size_t y) {
    if (spec.reward.kind() != RewardKind::Quadratic)
        throw InvalidArgument("gaussian decisions need a quadratic reward");
    if (y >= spec.decisions.size()) throw InvalidArgument("decision out of range");
    const auto post = posterior_gaussian(model, s);
    const auto& w = spec.reward.weights();
    double mean_w = 0.0;
    for (std::size_t i : s.observed_indices()) mean_w += w[i] * s.value(i);
    Eigen::VectorXd wf(post.free.size());
    for (std::size_t r = 0; r < post.free.size(); ++r) wf(r) = w[post.free[r]];
    if (!post.free.empty()) mean_w += wf.dot(post.model.mean());
    const double var_w = post.free.empty() ? 0.0 : wf.dot(post.model.cov() * wf);
    const double diff = mean_w - spec.decisions[y].front();
    return -diff * diff - var_w;
}

// Per observed-mask conditioning data; the posterior covariance depends only
// on which coordinates are observed, so it is computed once per mask.
struct MaskData {
    std::vector<std::size_t> obs;
    std::vector<std::size_t> free;
    Eigen::MatrixXd gain;        // S_fb S_bb^-1
    Eigen::VectorXd free_offset; // mu_f - gain * mu_b
    Eigen::VectorXd free_var;    // diag of the conditional covariance
    Eigen::VectorXd alpha;       // E[w'x | x_b] = beta + alpha' x_b
    double beta = 0.0;
    double var_w = 0.0;
};

struct GaussianPolicy::Impl {
    GaussianOutcomeModel model;
    AgentSpec spec;
    Quadrature quadrature;
    GaussHermiteRule rule;
    std::vector<MaskData> masks;

    struct Node {
        double value;
        Action action;
    };

    Node solve(std::uint32_t mask, std::vector<double>& x) const {
        const MaskData& md = masks[mask];
        double mean_w = md.beta;
        for (std::size_t r = 0; r < md.obs.size(); ++r) mean_w += md.alpha(r) * x[md.obs[r]];
        std::size_t best_y = 0;
        Node node{quadratic_decision(mean_w, md.var_w, spec.decisions, best_y), Action::decide(best_y)};
        if (md.free.empty()) return node;

        Eigen::VectorXd xb(md.obs.size());
        for (std::size_t r = 0; r < md.obs.size(); ++r) xb(r) = x[md.obs[r]];
        const Eigen::VectorXd cond_mean = md.obs.empty() ? md.free_offset : Eigen::VectorXd(md.free_offset + md.gain * xb);

        bool have_test = false;
        double best_q = 0.0;
        std::size_t best_test = 0;
        for (std::size_t r = 0; r < md.free.size(); ++r) {
            const std::size_t i = md.free[r];
            const double q = q_value(mask, x, i, cond_mean(r), md.free_var(r));
            if (!have_test || q > best_q) {
                have_test = true;
                best_q = q;
                best_test = i;
            }
        }
        if (have_test && best_q > node.value) node = {best_q, Action::test(best_test)};
        return node;
    }

    double q_value(std::uint32_t mask, std::vector<double>& x, std::size_t i, double mean, double var) const {
        const double sd = std::sqrt(std::max(var, 0.0));
        double q = -spec.costs[i];
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
            x[i] = mean + sd * rule.nodes[k];
            q += rule.weights[k] * solve(mask | (std::uint32_t{1} << i), x).value;
        }
        x[i] = 0.0;
        return q;
    }

    std::uint32_t mask_of(const TestState& s, std::vector<double>& x) const {
        if (s.dim() != model.dim()) throw InvalidArgument("gaussian policy: state dimension mismatch");
        if (s.is_terminal()) throw InvalidArgument("gaussian policy: terminal state");
        std::uint32_t mask = 0;
        x.assign(model.dim(), 0.0);
        for (std::size_t i : s.observed_indices()) {
            mask |= std::uint32_t{1} << i;
            x[i] = s.value(i);
        }
        return mask;
    }
};

Action GaussianPolicy::act(const TestState& s) const {
    if (s.num_observed() == 0) return root_action_;
    std::vector<double> x;
    const auto mask = impl_->mask_of(s, x);
    return impl_->solve(mask, x).action;
}

double GaussianPolicy::value(const TestState& s) const {
    std::vector<double> x;
    const auto mask = impl_->mask_of(s, x);
    return impl_->solve(mask, x).value;
}

std::vector<double> GaussianPolicy::q_values(const TestState& s) const {
    std::vector<double> x;
    const auto mask = impl_->mask_of(s, x);
    const MaskData& md = impl_->masks[mask];
    std::vector<double> out(impl_->model.dim(), std::numeric_limits<double>::quiet_NaN());
    Eigen::VectorXd xb(md.obs.size());
    for (std::size_t r = 0; r < md.obs.size(); ++r) xb(r) = x[md.obs[r]];
    const Eigen::VectorXd cond_mean = md.obs.empty() ? md.free_offset : Eigen::VectorXd(md.free_offset + md.gain * xb);
    for (std::size_t r = 0; r < md.free.size(); ++r)
        out[md.free[r]] = impl_->q_value(mask, x, md.free[r], cond_mean(r), md.free_var(r));
    return out;
}

GaussianPolicy solve_dp_gaussian(const GaussianOutcomeModel& model, const AgentSpec& spec, Quadrature quadrature) {
    const std::size_t d = model.dim();
    if (spec.dim() != d) throw InvalidArgument("solve_dp_gaussian: cost vector dimension mismatch");
    if (spec.reward.kind() != RewardKind::Quadratic)
        throw InvalidArgument(std::string("solve_dp_gaussian: unsupported reward '") + to_string(spec.reward.kind()) + "'");
    if (spec.decisions.empty()) throw InvalidArgument("solve_dp_gaussian: empty decision set");
    if (d > quadrature.max_depth)
        throw InvalidArgument("solve_dp_gaussian: d = " + std::to_string(d) + " exceeds max_depth = " +
                              std::to_string(quadrature.max_depth));
    if (d > 24) throw InvalidArgument("solve_dp_gaussian: d > 24 is not supported");
    const double tree = scenario_tree_size(d, quadrature.nodes_per_test);
    if (tree > quadrature.max_tree_nodes)
        throw CapacityError("solve_dp_gaussian: scenario tree has " + std::to_string(tree) +
                            " nodes, above the cap of " + std::to_string(quadrature.max_tree_nodes));

    auto impl = std::make_shared<GaussianPolicy::Impl>(
        GaussianPolicy::Impl{model, spec, quadrature, gauss_hermite(quadrature.nodes_per_test), {}});
    const auto& w = spec.reward.weights();
    impl->masks.resize(std::size_t{1} << d);
    for (std::uint32_t mask = 0; mask < impl->masks.size(); ++mask) {
        MaskData& md = impl->masks[mask];
        for (std::size_t i = 0; i < d; ++i) ((mask >> i) & 1U ? md.obs : md.free).push_back(i);
        Eigen::VectorXd mu_f(md.free.size()), mu_b(md.obs.size()), w_f(md.free.size()), w_b(md.obs.size());
        for (std::size_t r = 0; r < md.free.size(); ++r) {
            mu_f(r) = model.mean()(md.free[r]);
            w_f(r) = w[md.free[r]];
        }
        for (std::size_t r = 0; r < md.obs.size(); ++r) {
            mu_b(r) = model.mean()(md.obs[r]);
            w_b(r) = w[md.obs[r]];
        }
        Eigen::MatrixXd cond_cov = select(model.cov(), md.free, md.free);
        if (md.obs.empty()) {
            md.gain = Eigen::MatrixXd::Zero(md.free.size(), 0);
            md.free_offset = mu_f;
        } else {
            const Eigen::MatrixXd s_bb = select(model.cov(), md.obs, md.obs);
            if (!(spd_condition_number(s_bb) <= kMaxObservedCondition))
                throw NumericalError("solve_dp_gaussian: ill-conditioned observed block");
            const Eigen::MatrixXd s_fb = select(model.cov(), md.free, md.obs);
            md.gain = Eigen::LLT<Eigen::MatrixXd>(s_bb).solve(s_fb.transpose()).transpose();
            md.free_offset = mu_f - md.gain * mu_b;
            cond_cov -= md.gain * s_fb.transpose();
        }
        md.free_var = cond_cov.diagonal();
        md.alpha = w_b + md.gain.transpose() * w_f;
        md.beta = w_f.dot(md.free_offset);
        md.var_w = md.free.empty() ? 0.0 : w_f.dot(cond_cov * w_f);
    }

    GaussianPolicy policy;
    policy.impl_ = impl;
    std::vector<double> x(d, 0.0);
    const auto root = impl->solve(0, x);
    policy.root_action_ = root.action;
    policy.root_value_ = root.value;
    return policy;
}

GaussianPolicy solve_dp_gaussian(const ProblemInstance& instance, Quadrature quadrature) {
    return solve_dp_gaussian(instance.gaussian(), instance.spec(), quadrature);
}

MonteCarloEstimate evaluate_policy_mc(const ProblemInstance& instance, const Policy& policy, std::size_t samples,
                                      std::uint64_t seed) {
    if (samples < 2) throw InvalidArgument("evaluate_policy_mc: need at least two samples");
    const Rng base(seed);
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t n = 0; n < samples; ++n) {
        Rng rng = base.derive(n);
        const auto x = sample(instance.model(), rng);
        const double r = rollout(policy, instance.spec(), x).reward();
        const double delta = r - mean;
        mean += delta / static_cast<double>(n + 1);
        m2 += delta * (r - mean);
    }
    const double var = m2 / static_cast<double>(samples - 1);
    return {mean, std::sqrt(var / static_cast<double>(samples)), samples};
}

} // namespace otp
