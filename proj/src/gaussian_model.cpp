#include "otp/gaussian_model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "otp/error.hpp"

namespace otp {

double spd_condition_number(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 1.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

Eigen::MatrixXd select(const Eigen::MatrixXd& m, const std::vector<std::size_t>& rows,
                       const std::vector<std::size_t>& cols) {
    Eigen::MatrixXd out(rows.size(), cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c) out(r, c) = m(rows[r], cols[c]);
    return out;
}

GaussianOutcomeModel::GaussianOutcomeModel(Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
    const auto d = mean_.size();
    if (cov_.rows() != d || cov_.cols() != d)
        throw InvalidArgument("gaussian model: covariance must be " + std::to_string(d) + "x" +
                              std::to_string(d));
    if (!mean_.allFinite() || !cov_.allFinite())
        throw InvalidArgument("gaussian model: non-finite parameters");
    if (d == 0) return;
    const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
    if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw InvalidArgument("gaussian model: covariance is not symmetric");
    cov_ = 0.5 * (cov_ + cov_.transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov_, Eigen::EigenvaluesOnly);
    lambda_min_ = es.eigenvalues().minCoeff();
    lambda_max_ = es.eigenvalues().maxCoeff();
    if (!(lambda_min_ > 0.0))
        throw NumericalError("gaussian model: covariance is not positive definite (min eigenvalue " +
                             std::to_string(lambda_min_) + ")");
    condition_number_ = lambda_max_ / lambda_min_;

    Eigen::LLT<Eigen::MatrixXd> llt(cov_);
    if (llt.info() != Eigen::Success)
        throw NumericalError("gaussian model: Cholesky factorization failed");
    chol_ = llt.matrixL();
}

OutcomeVector GaussianOutcomeModel::sample(Rng& rng) const {
    const auto d = mean_.size();
    Eigen::VectorXd z(d);
    for (Eigen::Index i = 0; i < d; ++i) z(i) = rng.normal();
    const Eigen::VectorXd x = mean_ + chol_ * z;
    return OutcomeVector(x.data(), x.data() + d);
}

GaussianPosterior posterior_gaussian(const GaussianOutcomeModel& model, const TestState& s) {
    if (s.dim() != model.dim()) throw InvalidArgument("posterior_gaussian: state dimension mismatch");
    if (s.is_terminal()) throw InvalidArgument("posterior_gaussian: terminal state");
    const auto obs = s.observed_indices();
    const auto free = s.missing_indices();
    if (obs.empty()) return {free, model};

    const Eigen::MatrixXd s_bb = select(model.cov(), obs, obs);
    const double cond = spd_condition_number(s_bb);
    if (!(cond <= kMaxObservedCondition))
        throw NumericalError("posterior_gaussian: observed block is ill-conditioned (condition " +
                             std::to_string(cond) + ")");
    Eigen::VectorXd resid(obs.size());
    for (std::size_t r = 0; r < obs.size(); ++r) resid(r) = s.value(obs[r]) - model.mean()(obs[r]);
    if (free.empty()) return {free, GaussianOutcomeModel(Eigen::VectorXd(0), Eigen::MatrixXd(0, 0))};

    const Eigen::LLT<Eigen::MatrixXd> llt(s_bb);
    const Eigen::MatrixXd s_ab = select(model.cov(), free, obs);
    const Eigen::MatrixXd gain = llt.solve(s_ab.transpose()).transpose();  // S_ab S_bb^-1
    Eigen::VectorXd mu(free.size());
    for (std::size_t r = 0; r < free.size(); ++r) mu(r) = model.mean()(free[r]);
    mu += gain * resid;
    Eigen::MatrixXd cov = select(model.cov(), free, free) - gain * s_ab.transpose();
    cov = 0.5 * (cov + cov.transpose());
    return {free, GaussianOutcomeModel(std::move(mu), std::move(cov))};
}

NormalMarginal marginal_gaussian(const GaussianOutcomeModel& model, const TestState& s,
                                 std::size_t test) {
    if (test >= model.dim()) throw InvalidArgument("marginal: test index out of range");
    if (s.observed(test)) throw InvalidArgument("marginal: test already observed");
    const auto post = posterior_gaussian(model, s);
    for (std::size_t r = 0; r < post.free.size(); ++r)
        if (post.free[r] == test)
            return {post.model.mean()(r), post.model.cov()(r, r)};
    throw InvalidArgument("marginal: test not free");
}

} // namespace otp
