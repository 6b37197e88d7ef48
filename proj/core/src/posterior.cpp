#include "itscale/posterior.hpp"

#include <cmath>
#include <stdexcept>

namespace itscale {

Posterior fit_posterior(const Dataset& data, const ModelConfig& config) {
    config.validate();
    const int d = config.d;
    const int n = data.size();
    if (data.inputs.rows() != n || (n > 0 && data.inputs.cols() != d)) {
        throw std::invalid_argument("fit_posterior: dataset shape does not match config");
    }
    if (!data.inputs.allFinite() || !data.labels.allFinite()) {
        throw std::invalid_argument("fit_posterior: non-finite inputs or labels");
    }
    if (n > 0 && config.sigma == 0.0) {
        throw std::invalid_argument("fit_posterior: sigma = 0 with n > 0 gives a degenerate likelihood");
    }

    Posterior post;
    post.sigma_ = config.sigma;
    post.gamma_ = config.gamma;
    const double inv_gamma2 = 1.0 / (config.gamma * config.gamma);

    if (n == 0) {
        post.mu_ = Eigen::VectorXd::Zero(d);
        post.omega_ = Eigen::MatrixXd::Identity(d, d) * (config.gamma * config.gamma);
        post.precision_llt_.compute(Eigen::MatrixXd::Identity(d, d) * inv_gamma2);
        return post;
    }

    const double inv_sigma2 = 1.0 / (config.sigma * config.sigma);
    const double inv_d = 1.0 / static_cast<double>(d);
    Eigen::MatrixXd precision(d, d);
    precision.setZero();
    precision.selfadjointView<Eigen::Lower>().rankUpdate(data.inputs.transpose(), inv_sigma2 * inv_d);
    precision = precision.selfadjointView<Eigen::Lower>();
    precision.diagonal().array() += inv_gamma2;

    post.precision_llt_.compute(precision);
    if (post.precision_llt_.info() != Eigen::Success) {
        throw std::runtime_error("fit_posterior: precision matrix is not positive definite");
    }
    const Eigen::VectorXd rhs = data.inputs.transpose() * data.labels * (inv_sigma2 / std::sqrt(double(d)));
    post.mu_ = post.precision_llt_.solve(rhs);

    Eigen::MatrixXd omega = post.precision_llt_.solve(Eigen::MatrixXd::Identity(d, d));
    post.omega_ = 0.5 * (omega + omega.transpose());
    return post;
}

double Posterior::quadratic_form(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != mu_.size()) throw std::invalid_argument("Posterior: dimension mismatch");
    const Eigen::VectorXd xs = x / std::sqrt(static_cast<double>(x.size()));
    // x^T P^{-1} x = |L^{-1} x|^2 with P = L L^T.
    const Eigen::VectorXd z = precision_llt_.matrixL().solve(xs);
    return z.squaredNorm();
}

PredictiveMoments predictive_moments(const Posterior& post, const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (x.size() != post.dim()) throw std::invalid_argument("predictive_moments: dimension mismatch");
    PredictiveMoments out;
    out.mean = post.mu().dot(x) / std::sqrt(static_cast<double>(x.size()));
    out.variance = post.quadratic_form(x) + post.sigma() * post.sigma();
    return out;
}

}  // namespace itscale
