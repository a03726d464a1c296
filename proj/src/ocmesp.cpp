#include "otp/ocmesp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "otp/error.hpp"

namespace otp {

namespace {

constexpr std::size_t kMaxSubsetDim = 20;

} // namespace

std::vector<std::size_t> subset_indices(Subset s) {
    std::vector<std::size_t> out;
    while (s) {
        out.push_back(static_cast<std::size_t>(std::countr_zero(s)));
        s &= s - 1;
    }
    return out;
}

Subset subset_from_indices(const std::vector<std::size_t>& indices) {
    Subset s = 0;
    for (std::size_t i : indices) {
        if (i >= 32) throw InvalidArgument("subset index out of range");
        s |= Subset{1} << i;
    }
    return s;
}

std::string subset_to_string(Subset s) {
    std::string out = "{";
    const auto idx = subset_indices(s);
    for (std::size_t k = 0; k < idx.size(); ++k) out += (k ? "," : "") + std::to_string(idx[k]);
    return out + "}";
}

bool subset_lex_less(Subset a, Subset b) {
    const auto ia = subset_indices(a);
    const auto ib = subset_indices(b);
    return std::lexicographical_compare(ia.begin(), ia.end(), ib.begin(), ib.end());
}

double entropy_objective(Subset s, const Eigen::MatrixXd& sigma, double lambda, const std::vector<double>& costs) {
    if (s == 0) return 0.0;
    const auto idx = subset_indices(s);
    if (idx.back() >= static_cast<std::size_t>(sigma.rows()) || idx.back() >= costs.size())
        throw InvalidArgument("entropy_objective: subset exceeds dimension");
    double cost = 0.0;
    for (std::size_t i : idx) cost += costs[i];
    const double half_log_2pie = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);
    double log_det = 0.0;
    if (idx.size() == 1) {
        const double v = sigma(idx[0], idx[0]);
        if (!(v > 0.0)) throw NumericalError("entropy_objective: non-positive variance for " + subset_to_string(s));
        log_det = std::log(v);
    } else {
        const Eigen::MatrixXd sub = select(sigma, idx, idx);
        const Eigen::LLT<Eigen::MatrixXd> llt(sub);
        if (llt.info() != Eigen::Success)
            throw NumericalError("entropy_objective: covariance block not PD for " + subset_to_string(s));
        const auto diag = llt.matrixLLT().diagonal();
        for (Eigen::Index k = 0; k < diag.size(); ++k) {
            if (!(diag(k) > 0.0))
                throw NumericalError("entropy_objective: covariance block not PD for " + subset_to_string(s));
            log_det += 2.0 * std::log(diag(k));
        }
    }
    return lambda * (static_cast<double>(idx.size()) * half_log_2pie + 0.5 * log_det) - cost;
}

void OcmespConfig::validate() const {
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("ocmesp: delta must lie in (0, 1)");
    if (!(lambda > 0.0)) throw InvalidArgument("ocmesp: lambda must be positive");
    if (!(bernstein_c > 0.0)) throw InvalidArgument("ocmesp: bernstein constant must be positive");
    if (!(sigma >= 1.0)) throw InvalidArgument("ocmesp: condition number bound must be >= 1");
    if (d == 0 || d > kMaxSubsetDim) throw InvalidArgument("ocmesp: d must lie in [1, 20]");
    if (costs.size() != d) throw InvalidArgument("ocmesp: cost vector dimension mismatch");
    if (horizon == 0) throw InvalidArgument("ocmesp: horizon must be positive");
}

double confidence_width(std::uint64_t t, const OcmespConfig& config) {
    if (t == 0) throw InvalidArgument("confidence_width: t must be >= 1");
    const double d = static_cast<double>(config.d);
    const double tt = static_cast<double>(t);
    const double log_term = std::log(std::numbers::pi * std::numbers::pi * d * d * tt * tt / config.delta);
    const double ct = config.bernstein_c * tt;
    return 8.0 * config.sigma * std::max(d * d * d * std::sqrt(log_term / ct), d * d * d * d * log_term / ct);
}

CandidateSet::CandidateSet(std::size_t d)
    : d_(d), in_q_(d * d, 0), count_(d * d, 0), mean_(d * d, 0.0) {
    if (d == 0 || d > kMaxSubsetDim) throw InvalidArgument("CandidateSet: d must lie in [1, 20]");
    candidates_.resize(std::size_t{1} << d);
    for (std::size_t s = 0; s < candidates_.size(); ++s) candidates_[s] = static_cast<Subset>(s);
    recompute_q();
}

void CandidateSet::recompute_q() {
    std::fill(in_q_.begin(), in_q_.end(), 0);
    for (Subset s : candidates_) {
        const auto idx = subset_indices(s);
        for (std::size_t a = 0; a < idx.size(); ++a)
            for (std::size_t b = a; b < idx.size(); ++b) in_q_[index(idx[a], idx[b])] = 1;
    }
}

std::vector<std::pair<std::size_t, std::size_t>> CandidateSet::remaining_pairs() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < d_; ++i)
        for (std::size_t j = i; j < d_; ++j)
            if (in_q_[index(i, j)]) out.emplace_back(i, j);
    return out;
}

Eigen::MatrixXd CandidateSet::estimate_matrix() const {
    Eigen::MatrixXd m(d_, d_);
    for (std::size_t i = 0; i < d_; ++i)
        for (std::size_t j = 0; j < d_; ++j) m(i, j) = mean_[index(i, j)];
    return m;
}

void CandidateSet::update(Subset tested, const std::vector<double>& x) {
    const auto idx = subset_indices(tested);
    if (!idx.empty() && (idx.back() >= d_ || x.size() != d_))
        throw InvalidArgument("CandidateSet::update: sample does not cover the tested subset");
    for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = a; b < idx.size(); ++b) {
            const std::size_t k = index(idx[a], idx[b]);
            if (!in_q_[k]) continue;
            ++count_[k];
            mean_[k] += (x[idx[a]] * x[idx[b]] - mean_[k]) / static_cast<double>(count_[k]);
        }
}

void CandidateSet::remove(const std::vector<Subset>& doomed) {
    if (doomed.empty()) return;
    std::vector<Subset> kept;
    for (Subset s : candidates_)
        if (std::find(doomed.begin(), doomed.end(), s) == doomed.end()) kept.push_back(s);
    if (kept.empty()) throw InvalidArgument("CandidateSet::remove: would empty the candidate set");
    candidates_ = std::move(kept);
    recompute_q();
}

Selection select_next_subset(const CandidateSet& state) {
    const auto pairs = state.remaining_pairs();
    if (pairs.empty()) throw InvalidArgument("select_next_subset: no remaining pairs");
    auto pair = pairs.front();
    for (const auto& p : pairs)
        if (state.count(p.first, p.second) < state.count(pair.first, pair.second)) pair = p;
    const Subset need = (Subset{1} << pair.first) | (Subset{1} << pair.second);
    bool found = false;
    Subset best = 0;
    for (Subset s : state.candidates()) {
        if ((s & need) != need) continue;
        const int size = std::popcount(s);
        const int best_size = std::popcount(best);
        if (!found || size > best_size || (size == best_size && subset_lex_less(s, best))) {
            best = s;
            found = true;
        }
    }
    return {pair, best};
}

void update_estimates(CandidateSet& state, Subset tested, const std::vector<double>& x) { state.update(tested, x); }

EliminationOutcome eliminate(CandidateSet& state, double width, double lambda, const std::vector<double>& costs) {
    EliminationOutcome out;
    if (width > 1.0) {
        out.gated = true;
        return out;
    }
    for (const auto& [i, j] : state.remaining_pairs())
        if (state.count(i, j) == 0) {
            out.non_pd = true;
            return out;
        }
    const Eigen::MatrixXd sigma_hat = state.estimate_matrix();
    std::vector<double> h;
    h.reserve(state.candidates().size());
    try {
        for (Subset s : state.candidates()) h.push_back(entropy_objective(s, sigma_hat, lambda, costs));
    } catch (const NumericalError&) {
        out.non_pd = true;
        return out;
    }
    const double best = *std::max_element(h.begin(), h.end());
    std::vector<Subset> doomed;
    for (std::size_t k = 0; k < h.size(); ++k)
        if (h[k] + 2.0 * lambda * width <= best) doomed.push_back(state.candidates()[k]);
    out.eliminated = doomed.size();
    state.remove(doomed);
    return out;
}

Subset solve_mesp_offline(const Eigen::MatrixXd& sigma, double lambda, const std::vector<double>& costs,
                          std::optional<std::size_t> cardinality) {
    const std::size_t d = static_cast<std::size_t>(sigma.rows());
    if (d > kMaxSubsetDim) throw InvalidArgument("solve_mesp_offline: d > 20 is not supported");
    if (costs.size() != d) throw InvalidArgument("solve_mesp_offline: cost vector dimension mismatch");
    if (cardinality && *cardinality > d) throw InvalidArgument("solve_mesp_offline: cardinality exceeds d");
    bool found = false;
    Subset best = 0;
    double best_value = 0.0;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << d); ++m) {
        const auto s = static_cast<Subset>(m);
        if (cardinality && static_cast<std::size_t>(std::popcount(s)) != *cardinality) continue;
        const double v = entropy_objective(s, sigma, lambda, costs);
        if (!found || v > best_value || (v == best_value && subset_lex_less(s, best))) {
            best = s;
            best_value = v;
            found = true;
        }
    }
    return best;
}

OcmespResult run_ocmesp(const Environment& env, const OcmespConfig& config) {
    config.validate();
    if (!std::holds_alternative<GaussianOutcomeModel>(env.model()))
        throw InvalidArgument("run_ocmesp: environment must be Gaussian");
    const auto& truth = std::get<GaussianOutcomeModel>(env.model());
    if (truth.dim() != config.d) throw InvalidArgument("run_ocmesp: dimension mismatch");
    if (!truth.mean().isZero(0.0)) throw InvalidArgument("run_ocmesp: environment mean must be zero");

    std::vector<double> true_value(std::size_t{1} << config.d);
    for (std::size_t s = 0; s < true_value.size(); ++s)
        true_value[s] = entropy_objective(static_cast<Subset>(s), truth.cov(), config.lambda, config.costs);

    OcmespResult result;
    result.optimum = solve_mesp_offline(truth.cov(), config.lambda, config.costs);
    result.trace.seed = env.seed();
    result.trace.agent = "ocmesp";
    CandidateSet state(config.d);
    for (std::uint64_t t = 1; t <= config.horizon; ++t) {
        const auto x = env.draw(t);
        EliminationColumns cols;
        cols.width = confidence_width(t, config);
        Subset played = 0;
        std::string phase = "commit";
        if (state.candidates().size() > 1) {
            phase = "explore";
            const auto sel = select_next_subset(state);
            played = sel.subset;
            cols.pair = sel.pair;
            update_estimates(state, played, x);
            const auto outcome = eliminate(state, cols.width, config.lambda, config.costs);
            if (outcome.non_pd) ++result.non_pd_rounds;
            cols.eliminated = outcome.eliminated;
            if (state.candidates().size() == 1) result.converged_at = t;
        } else {
            played = state.candidates().front();
        }
        cols.subset = subset_indices(played);
        cols.candidates = state.candidates().size();

        EpisodeRecord r;
        r.episode = t;
        r.phase = phase;
        r.tests = cols.subset;
        r.realized_reward = true_value[played];
        r.clairvoyant_reward = true_value[result.optimum];
        r.simple_regret = r.clairvoyant_reward - r.realized_reward;
        r.observed.assign(config.d, std::nullopt);
        for (std::size_t i : cols.subset) r.observed[i] = x[i];
        r.elimination = std::move(cols);
        result.trace.push(std::move(r));
    }
    result.final_candidates = state.candidates();
    result.trace.diagnostics["optimum"] = subset_to_string(result.optimum);
    result.trace.diagnostics["non_pd_rounds"] = std::to_string(result.non_pd_rounds);
    result.trace.diagnostics["converged_at"] = result.converged_at ? std::to_string(*result.converged_at) : "never";
    return result;
}

Calibration calibrate_bernstein_c(const OutcomeModel& model, OcmespConfig config,
                                  const std::vector<std::uint64_t>& pilot_seeds, std::vector<double> grid) {
    if (grid.empty() || pilot_seeds.empty()) throw InvalidArgument("calibrate_bernstein_c: empty grid or seeds");
    std::sort(grid.rbegin(), grid.rend());
    Calibration cal;
    cal.pilot_runs = pilot_seeds.size();
    const double need = (1.0 - config.delta) * static_cast<double>(pilot_seeds.size());
    for (double c : grid) {
        config.bernstein_c = c;
        std::size_t safe = 0;
        for (std::uint64_t seed : pilot_seeds) {
            const auto res = run_ocmesp(Environment(model, seed), config);
            const auto& fin = res.final_candidates;
            safe += std::find(fin.begin(), fin.end(), res.optimum) != fin.end();
        }
        cal.tried.emplace_back(c, safe);
        cal.bernstein_c = c;
        cal.safe_runs = safe;
        if (static_cast<double>(safe) >= need) break;
    }
    return cal;
}

} // namespace otp
