#pragma once

#include <Eigen/Dense>

#include "itscale/model.hpp"

namespace itscale {

/// Mean m(x) and variance s^2(x) of the Gaussian posterior predictive at x.
struct PredictiveMoments {
    double mean = 0.0;
    double variance = 0.0;
};

/// Exact Bayesian linear-regression posterior over the student weights,
/// N(mu, Omega), with features scaled as x/sqrt(d).
///
/// Omega^{-1} = (1/sigma^2) sum_i x_i x_i^T / d + I / gamma^2
/// mu         = (1/sigma^2) Omega sum_i y_i x_i / sqrt(d)
///
/// The precision matrix is kept as a Cholesky factor; Omega is materialised
/// from it (symmetrised) for inspection.
class Posterior {
public:
    const Eigen::VectorXd& mu() const noexcept { return mu_; }
    const Eigen::MatrixXd& omega() const noexcept { return omega_; }
    double sigma() const noexcept { return sigma_; }
    double gamma() const noexcept { return gamma_; }
    int dim() const noexcept { return static_cast<int>(mu_.size()); }

    /// (x/sqrt(d))^T Omega (x/sqrt(d)), computed by a triangular solve.
    double quadratic_form(const Eigen::Ref<const Eigen::VectorXd>& x) const;

private:
    friend Posterior fit_posterior(const Dataset& data, const ModelConfig& config);

    Eigen::VectorXd mu_;
    Eigen::MatrixXd omega_;
    Eigen::LLT<Eigen::MatrixXd> precision_llt_;
    double sigma_ = 0.0;
    double gamma_ = 1.0;
};

/// Throws std::invalid_argument when sigma = 0 with n > 0 or on non-finite data.
Posterior fit_posterior(const Dataset& data, const ModelConfig& config);

PredictiveMoments predictive_moments(const Posterior& post, const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace itscale
