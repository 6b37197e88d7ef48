#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "itscale/det_equiv.hpp"
#include "itscale/posterior.hpp"
#include "itscale/rng.hpp"

using namespace itscale;

namespace {

double residual(const DetEquiv& de) {
    double m = 0.0;
    for (double l : de.spectrum) m += l / (l + de.R);
    m /= double(de.spectrum.size());
    return std::abs(de.R * (1 - de.alpha * m) - de.R_hat);
}

DetEquiv iso(double alpha, double sigma, double gamma, double S = 1.0) {
    return solve_ridge(alpha, sigma, gamma, std::vector<double>{S * S});
}

}  // namespace

TEST(SolveRidge, SmallAlphaApproachesBareRidge) {
    const DetEquiv de = iso(1e-9, 1.0, 1.0);
    EXPECT_NEAR(de.R / de.R_hat, 1.0, 1e-8);
}

TEST(SolveRidge, NoiselessBelowInterpolationIsZero) {
    const DetEquiv de = iso(0.5, 0.0, 1.0);
    EXPECT_EQ(de.R, 0.0);
    EXPECT_EQ(de.A, 1.0);
    EXPECT_EQ(de.B, 0.0);
}

TEST(SolveRidge, RidgelessDegenerateCaseIsAnError) {
    EXPECT_THROW(iso(1.0, 0.0, 1.0), std::domain_error);
    EXPECT_THROW(iso(2.0, 0.0, 1.0), std::domain_error);
}

TEST(SolveRidge, RejectsInvalidInputs) {
    EXPECT_THROW(iso(0.0, 1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(iso(0.1, 1.0, 0.0), std::invalid_argument);
    EXPECT_THROW(solve_ridge(0.1, 1.0, 1.0, std::vector<double>{1.0, 0.0}), std::invalid_argument);
}

TEST(SolveRidge, MatchesClosedFormAtFigureTwoParameters) {
    const DetEquiv de = iso(1e-3, 1e-4, 1e-3);
    const double closed = isotropic_ridge(1e-3, 1e-4, 1e-3, 1.0);
    EXPECT_NEAR(de.R / closed, 1.0, 1e-10);
    EXPECT_LE(residual(de), 1e-12 * std::max(1.0, de.R_hat));
}

TEST(IsotropicRidge, TrivialLimits) {
    EXPECT_EQ(isotropic_ridge(0.5, 0.0, 1.0, 1.0), 0.0);
    const double r_hat = 0.3 * 1e-8 / 1.0;
    EXPECT_NEAR(isotropic_ridge(1e-8, std::sqrt(0.3), 1.0, 1.0) / r_hat, 1.0, 1e-7);
}

TEST(IsotropicRidge, HandValue) {
    // alpha = 0.5, R_hat = 1 with S = 1: R = (0.5 + sqrt(4.25)) / 2.
    const double R = isotropic_ridge(0.5, 1.0, std::sqrt(0.5), 1.0);
    EXPECT_NEAR(R, 0.5 * (0.5 + std::sqrt(4.25)), 1e-15);
    EXPECT_NEAR(R, 1.28077, 1e-5);
    EXPECT_LT(std::abs(R * (1 - 0.5 / (1 + R)) - 1.0), 1e-12);
}

TEST(IsotropicRidge, AgreesWithSolverOnGrid) {
    for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) {
            const double alpha = std::pow(10.0, -4 + 4.0 * i / 10.0) * 0.99;  // up to ~0.99
            const double r_hat = std::pow(10.0, -8 + 10.0 * j / 9.0);
            const double S = 0.5 + 0.25 * (i % 4);
            const double sigma = std::sqrt(r_hat / alpha);  // gamma = 1
            const double closed = isotropic_ridge(alpha, sigma, 1.0, S);
            const DetEquiv de = iso(alpha, sigma, 1.0, S);
            EXPECT_NEAR(de.R / closed, 1.0, 1e-10) << alpha << " " << r_hat;
            EXPECT_LE(residual(de), 1e-12 * std::max(1.0, de.R_hat));
        }
    }
}

TEST(SolveRidge, MonotoneInAlphaAndNoiseRatio) {
    double prev = 0.0;
    for (double alpha = 0.01; alpha < 3.0; alpha *= 1.3) {
        const double R = iso(alpha, 0.5, 1.0).R;
        EXPECT_GE(R, prev);
        prev = R;
    }
    prev = 0.0;
    for (double sigma = 1e-3; sigma < 10; sigma *= 1.5) {
        const double R = iso(0.4, sigma, 1.0).R;
        EXPECT_GE(R, prev);
        prev = R;
    }
}

TEST(SolveRidge, ShrinkageFactorsAreConsistent) {
    for (double alpha : {1e-3, 0.1, 0.7, 2.0}) {
        const DetEquiv de = iso(alpha, 0.3, 0.5, 1.2);
        EXPECT_NEAR(de.A + de.B, 1.0, 1e-12);
        EXPECT_GT(de.A, 0.0);
        EXPECT_LT(de.A, 1.0);
        EXPECT_GE(de.R, de.R_hat);
        EXPECT_GT(de.m1, 0.0);
        EXPECT_LT(de.m1, 1.0);
        EXPECT_GT(de.m2, 0.0);
        EXPECT_LT(de.m2, 1.0);
    }
}

TEST(SolveRidge, GeneralSpectrumResidual) {
    const std::vector<double> spectrum{0.1, 0.5, 1.0, 4.0, 9.0};
    for (double alpha : {0.05, 0.5, 1.5}) {
        const DetEquiv de = solve_ridge(alpha, 0.4, 1.0, spectrum);
        EXPECT_FALSE(de.isotropic());
        EXPECT_LE(residual(de), 1e-12 * std::max(1.0, de.R_hat));
        EXPECT_NEAR(de.A + de.B, 1.0, 1e-12);
        EXPECT_EQ(de.shrinkage().size(), 5);
    }
}

TEST(DeMoments, OriginAndZeroRidge) {
    ModelConfig cfg;
    cfg.d = 3;
    cfg.n = 6;
    cfg.sigma = 0.0;
    const WeightVector w(Eigen::Vector3d(1.0, 2.0, -1.0));
    const DetEquiv de = solve_ridge(cfg);
    EXPECT_EQ(de.R, 0.0);
    const Eigen::Vector3d x(0.3, -0.2, 1.1);
    const PredictiveMoments pm = de_moments(x, w, de, cfg);
    EXPECT_DOUBLE_EQ(pm.mean, w.project(x));
    EXPECT_EQ(pm.variance, 0.0);

    cfg.sigma = 0.2;
    const PredictiveMoments origin = de_moments(Eigen::Vector3d::Zero(), w, solve_ridge(cfg), cfg);
    EXPECT_EQ(origin.mean, 0.0);
    EXPECT_DOUBLE_EQ(origin.variance, 0.04);
}

TEST(DeMoments, AgreesWithExactPosteriorAverage) {
    ModelConfig cfg;
    cfg.d = 50;
    cfg.n = 5000;
    cfg.S = 1.0;
    cfg.sigma = 1e-2;
    cfg.gamma = 1.0;
    SplitMix64 trng = make_stream(3, stream::kTeacher);
    const WeightVector w = sample_teacher(cfg, trng);
    const DetEquiv de = solve_ridge(cfg);
    const int n_x = 100, n_data = 20;
    Eigen::MatrixXd X(n_x, cfg.d);
    SplitMix64 xr = make_stream(3, stream::kTestPoints);
    for (int i = 0; i < n_x; ++i) X.row(i) = sample_input(cfg.d, cfg.S, xr).transpose();
    Eigen::VectorXd mean_exact = Eigen::VectorXd::Zero(n_x), var_exact = Eigen::VectorXd::Zero(n_x);
    for (int r = 0; r < n_data; ++r) {
        SplitMix64 dr = make_stream(3, stream::kData, {std::uint64_t(r)});
        const Posterior post = fit_posterior(generate_dataset(cfg, w, dr), cfg);
        for (int i = 0; i < n_x; ++i) {
            const PredictiveMoments pm = predictive_moments(post, X.row(i).transpose());
            mean_exact(i) += pm.mean / n_data;
            var_exact(i) += pm.variance / n_data;
        }
    }
    Eigen::VectorXd mean_de(n_x), var_de(n_x);
    for (int i = 0; i < n_x; ++i) {
        const PredictiveMoments pm = de_moments(X.row(i).transpose(), w, de, cfg);
        mean_de(i) = pm.mean;
        var_de(i) = pm.variance;
    }
    const double mean_scale = std::sqrt(mean_de.squaredNorm() / n_x);
    EXPECT_LT((mean_exact - mean_de).cwiseAbs().maxCoeff() / mean_scale, 0.02);
    EXPECT_LT(((var_exact - var_de).array() / var_de.array()).abs().maxCoeff(), 0.02);
}

TEST(NoiseVarianceCheck, Limits) {
    const DetEquiv tiny = iso(1e-9, 1e-3, 1.0);
    const NoiseVarianceCheck a = noise_variance_check(tiny, 1e-3);
    EXPECT_LT(a.var_z, 1e-14);
    EXPECT_TRUE(a.valid);

    const DetEquiv huge = iso(0.5, 1e4, 1e-2);
    EXPECT_LT(huge.m2, 1e-10);
    EXPECT_LT(noise_variance_check(huge, 1.0).var_z, 1e-10);
}

TEST(NoiseVarianceCheck, DivergenceIsReported) {
    DetEquiv de = iso(0.5, 0.1, 1.0);
    de.alpha = 2.0 / de.m2;
    EXPECT_THROW(noise_variance_check(de, 0.1), std::domain_error);
}

TEST(NoiseVarianceCheck, MatchesSimulatedLabelNoiseTerm) {
    ModelConfig cfg;
    cfg.d = 40;
    cfg.n = 400;
    cfg.S = 1.0;
    cfg.sigma = 0.1;
    cfg.gamma = 1.0;
    const DetEquiv de = solve_ridge(cfg);
    const NoiseVarianceCheck nc = noise_variance_check(de, cfg.sigma);
    // Z(x) = (x/sqrt d)^T Omega F^T eta / sigma^2, the part of the predictive
    // mean driven by label noise.
    const int n_data = 200, n_x = 20;
    std::vector<double> z;
    for (int r = 0; r < n_data; ++r) {
        SplitMix64 rng = make_stream(41, stream::kData, {std::uint64_t(r)});
        ModelConfig noiseless = cfg;
        const Dataset data = generate_dataset(noiseless, WeightVector::zeros(cfg.d), rng);  // labels = eta
        const Posterior post = fit_posterior(data, cfg);
        for (int i = 0; i < n_x; ++i) {
            const Eigen::VectorXd x = sample_input(cfg.d, cfg.S, rng);
            z.push_back(post.mu().dot(x) / std::sqrt(double(cfg.d)));
        }
    }
    double m = 0.0, v = 0.0;
    for (double zi : z) m += zi;
    m /= double(z.size());
    for (double zi : z) v += (zi - m) * (zi - m);
    v /= double(z.size() - 1);
    EXPECT_NEAR(v / nc.var_z, 1.0, 0.10);
}
