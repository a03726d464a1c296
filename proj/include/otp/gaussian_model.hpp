#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "otp/rng.hpp"
#include "otp/state.hpp"

namespace otp {

/// Multivariate normal with strictly positive-definite covariance. A
/// zero-dimensional model is allowed and represents a fully observed state.
class GaussianOutcomeModel {
public:
    GaussianOutcomeModel(Eigen::VectorXd mean, Eigen::MatrixXd cov);

    std::size_t dim() const { return static_cast<std::size_t>(mean_.size()); }
    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& cov() const { return cov_; }
    double condition_number() const { return condition_number_; }
    double lambda_min() const { return lambda_min_; }
    double lambda_max() const { return lambda_max_; }

    OutcomeVector sample(Rng& rng) const;

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
    Eigen::MatrixXd chol_;
    double lambda_min_ = 1.0;
    double lambda_max_ = 1.0;
    double condition_number_ = 1.0;
};

/// Conditional law of the unobserved coordinates (listed in `free`, in
/// increasing order) given the observed ones.
struct GaussianPosterior {
    std::vector<std::size_t> free;
    GaussianOutcomeModel model;
};

/// Refuses when the observed block has condition number above this.
inline constexpr double kMaxObservedCondition = 1e12;

/// Schur-complement conditioning. Throws NumericalError when the observed
/// block is numerically singular; never regularizes.
GaussianPosterior posterior_gaussian(const GaussianOutcomeModel& model, const TestState& s);

struct NormalMarginal {
    double mean;
    double variance;
};

NormalMarginal marginal_gaussian(const GaussianOutcomeModel& model, const TestState& s,
                                 std::size_t test);

/// Eigenvalue-based condition number of a symmetric matrix (inf if not PD).
double spd_condition_number(const Eigen::MatrixXd& m);

/// Sub-matrix m[rows, cols].
Eigen::MatrixXd select(const Eigen::MatrixXd& m, const std::vector<std::size_t>& rows,
                       const std::vector<std::size_t>& cols);

} // namespace otp
