#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "otp/trace.hpp"

namespace otp {

/// Subset of [d] as a bitmask (bit i set iff test i is in the subset).
using Subset = std::uint32_t;

std::vector<std::size_t> subset_indices(Subset s);
Subset subset_from_indices(const std::vector<std::size_t>& indices);
std::string subset_to_string(Subset s);
/// Lexicographic order of the sorted index lists: {} < {0} < {0,1} < {1}.
bool subset_lex_less(Subset a, Subset b);

/// lambda * (|S|/2 log(2 pi e) + 1/2 log det Sigma[S,S]) - sum_{i in S} c_i.
/// Throws NumericalError naming S when Sigma[S,S] is not positive definite.
double entropy_objective(Subset s, const Eigen::MatrixXd& sigma, double lambda, const std::vector<double>& costs);

struct OcmespConfig {
    double sigma = 1.0;  // condition-number bound
    std::size_t d = 1;
    double delta = 0.1;
    double lambda = 1.0;
    std::vector<double> costs;
    double bernstein_c = 1.0;
    std::size_t horizon = 1;

    void validate() const;
};

/// 8 sigma max{d^3 sqrt(L / (c t)), d^4 L / (c t)} with L = ln(pi^2 d^2 t^2 / delta).
double confidence_width(std::uint64_t t, const OcmespConfig& config);

/// Active subsets C, the pairs Q they still need (i <= j, diagonal
/// included), per-pair sample counts and running means of x_i x_j.
class CandidateSet {
public:
    explicit CandidateSet(std::size_t d);

    std::size_t dim() const { return d_; }
    const std::vector<Subset>& candidates() const { return candidates_; }
    bool in_q(std::size_t i, std::size_t j) const { return in_q_[index(i, j)]; }
    std::vector<std::pair<std::size_t, std::size_t>> remaining_pairs() const;
    std::size_t count(std::size_t i, std::size_t j) const { return count_[index(i, j)]; }
    double estimate(std::size_t i, std::size_t j) const { return mean_[index(i, j)]; }
    Eigen::MatrixXd estimate_matrix() const;

    /// Adds x_i x_j to every Q pair inside the tested subset.
    void update(Subset tested, const std::vector<double>& x);
    /// Drops the listed subsets and recomputes Q. C never becomes empty.
    void remove(const std::vector<Subset>& doomed);

private:
    std::size_t index(std::size_t i, std::size_t j) const { return i <= j ? i * d_ + j : j * d_ + i; }
    void recompute_q();

    std::size_t d_;
    std::vector<Subset> candidates_;
    std::vector<char> in_q_;
    std::vector<std::size_t> count_;
    std::vector<double> mean_;
};

struct Selection {
    std::pair<std::size_t, std::size_t> pair;
    Subset subset = 0;
};

/// Least-sampled Q pair (lexicographic ties), then the largest candidate
/// containing it (lexicographic ties).
Selection select_next_subset(const CandidateSet& state);

void update_estimates(CandidateSet& state, Subset tested, const std::vector<double>& x);

struct EliminationOutcome {
    std::size_t eliminated = 0;
    bool gated = false;   // U > 1: nothing attempted
    bool non_pd = false;  // an estimate was not PD: round skipped
};

/// Removes every S with H^(S) + 2 lambda U <= max H^ when U <= 1.
EliminationOutcome eliminate(CandidateSet& state, double width, double lambda, const std::vector<double>& costs);

/// Exhaustive argmax of entropy_objective over all subsets (or those of
/// size `cardinality`), lexicographic ties. d <= 20.
Subset solve_mesp_offline(const Eigen::MatrixXd& sigma, double lambda, const std::vector<double>& costs,
                          std::optional<std::size_t> cardinality = std::nullopt);

struct OcmespResult {
    RegretTrace trace;
    std::vector<Subset> final_candidates;
    Subset optimum = 0;
    std::size_t non_pd_rounds = 0;
    std::optional<std::uint64_t> converged_at;
};

/// Iterative elimination on a zero-mean Gaussian environment. Regret is
/// measured with the true-covariance objective of the played subset.
OcmespResult run_ocmesp(const Environment& env, const OcmespConfig& config);

struct Calibration {
    double bernstein_c = 1.0;
    std::size_t safe_runs = 0;  // pilot runs whose final C kept the optimum
    std::size_t pilot_runs = 0;
    std::vector<std::pair<double, std::size_t>> tried;  // (c, safe runs), in scan order
};

/// Largest c on the grid (scanned from the top) whose pilot runs keep the
/// true optimum in the final candidate set at least a (1 - delta) fraction
/// of the time; falls back to the smallest grid value.
Calibration calibrate_bernstein_c(const OutcomeModel& model, OcmespConfig config,
                                  const std::vector<std::uint64_t>& pilot_seeds, std::vector<double> grid);

} // namespace otp
