#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "itscale/model.hpp"
#include "itscale/posterior.hpp"

namespace itscale {

/// Renormalised ridge R solving R (1 - alpha m(R)) = sigma^2 alpha / gamma^2,
/// with m(R) = (1/d) sum_j lambda_j / (lambda_j + R) over the covariance
/// spectrum, and the quantities derived from it.
///
/// For an isotropic spectrum A and B are the scalar shrinkage factors
/// S^2/(R+S^2) and R/(R+S^2). For a general spectrum they are the trace
/// averages (1/d) Tr A_R = m1 and 1 - m1; per-direction factors are
/// available through shrinkage().
struct DetEquiv {
    double R = 0.0;
    double R_hat = 0.0;
    double alpha = 0.0;
    double A = 1.0;
    double B = 0.0;
    double m1 = 1.0;
    double m2 = 1.0;
    std::vector<double> spectrum;

    bool isotropic() const noexcept;
    /// Diagonal of B_R in the eigenbasis of the covariance.
    Eigen::VectorXd shrinkage() const;
};

/// Bracketing bisection on the strictly increasing map R -> R(1 - alpha m(R)).
/// Throws std::domain_error for the ridgeless degenerate case (alpha >= 1 with
/// R_hat = 0) and std::invalid_argument for invalid inputs.
DetEquiv solve_ridge(double alpha, double sigma, double gamma, std::span<const double> spectrum);

/// Closed-form root for spectrum {S^2}; evaluated in the cancellation-free
/// form of the quadratic formula.
double isotropic_ridge(double alpha, double sigma, double gamma, double S);

/// Solves the isotropic ridge for a model configuration (requires n > 0).
DetEquiv solve_ridge(const ModelConfig& config);

/// Isotropic deterministic-equivalent predictive moments at x:
/// mean = A w_T.x/sqrt(d), variance = sigma^2 + gamma^2 B |x|^2/d.
PredictiveMoments de_moments(const Eigen::Ref<const Eigen::VectorXd>& x, const WeightVector& teacher,
                             const DetEquiv& de, const ModelConfig& config);

/// Relative margin used by noise_variance_check: sigma^2 <= factor * sigma_c^2.
inline constexpr double kNoiseValidityFactor = 0.01;

struct NoiseVarianceCheck {
    double var_z = 0.0;
    double sigma_c = 0.0;
    bool valid = false;
    double factor = kNoiseValidityFactor;
};

/// Variance of the label-noise contribution to the predictive mean and the
/// noise threshold sigma_c, with sigma_c^2 = (1 - alpha m2) / (alpha m2).
/// The threshold compares a label variance to a dimensionless ratio exactly as
/// the asymptotic analysis writes it; tighten `factor` if that matters.
/// Throws std::domain_error when alpha m2 >= 1.
NoiseVarianceCheck noise_variance_check(const DetEquiv& de, double sigma,
                                        double factor = kNoiseValidityFactor);

}  // namespace itscale
