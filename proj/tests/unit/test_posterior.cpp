#include <cmath>

#include <gtest/gtest.h>

#include "itscale/posterior.hpp"
#include "itscale/rng.hpp"

using namespace itscale;

namespace {

Dataset random_dataset(int d, int n, std::uint64_t seed, double sigma = 0.3) {
    ModelConfig cfg;
    cfg.d = d;
    cfg.n = n;
    cfg.sigma = sigma;
    SplitMix64 t = make_stream(seed, stream::kTeacher);
    SplitMix64 r = make_stream(seed, stream::kData);
    return generate_dataset(cfg, sample_teacher(cfg, t), r);
}

ModelConfig config(int d, int n, double sigma, double gamma) {
    ModelConfig cfg;
    cfg.d = d;
    cfg.n = n;
    cfg.sigma = sigma;
    cfg.gamma = gamma;
    return cfg;
}

}  // namespace

TEST(FitPosterior, NoDataReturnsPrior) {
    const ModelConfig cfg = config(4, 0, 0.1, 0.7);
    const Posterior post = fit_posterior(Dataset{Eigen::MatrixXd(0, 4), Eigen::VectorXd(0)}, cfg);
    EXPECT_EQ(post.mu(), Eigen::VectorXd::Zero(4));
    EXPECT_TRUE(post.omega().isApprox(0.49 * Eigen::MatrixXd::Identity(4, 4)));
}

TEST(FitPosterior, OneSampleHandSolve) {
    const ModelConfig cfg = config(1, 1, 1.0, 1.0);
    Dataset data{Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Ones(1)};
    const Posterior post = fit_posterior(data, cfg);
    EXPECT_NEAR(post.omega()(0, 0), 0.5, 1e-15);
    EXPECT_NEAR(post.mu()(0), 0.5, 1e-15);
    const PredictiveMoments pm = predictive_moments(post, Eigen::VectorXd::Ones(1));
    EXPECT_NEAR(pm.mean, 0.5, 1e-15);
    EXPECT_NEAR(pm.variance, 1.5, 1e-15);
}

TEST(FitPosterior, MeanIsRidgeSolution) {
    const int d = 6, n = 40;
    const double sigma = 0.3, gamma = 0.8;
    const Dataset data = random_dataset(d, n, 3, sigma);
    const Posterior post = fit_posterior(data, config(d, n, sigma, gamma));
    const Eigen::MatrixXd F = data.inputs / std::sqrt(double(d));
    const double lambda = sigma * sigma / (gamma * gamma);
    const Eigen::VectorXd ridge =
        (F.transpose() * F + lambda * Eigen::MatrixXd::Identity(d, d)).fullPivLu().solve(F.transpose() * data.labels);
    EXPECT_TRUE(post.mu().isApprox(ridge, 1e-10));
}

TEST(FitPosterior, AgreesWithBruteForceSolve) {
    for (int trial = 0; trial < 20; ++trial) {
        SplitMix64 pick = make_stream(17, "shape", {std::uint64_t(trial)});
        const int d = 1 + int(pick() % 20);
        const int n = int(pick() % 201);
        const double sigma = 0.05 + (pick() % 100) / 100.0;
        const double gamma = 0.2 + (pick() % 100) / 50.0;
        const Dataset data = random_dataset(d, n, 100 + trial, sigma);
        const Posterior post = fit_posterior(data, config(d, n, sigma, gamma));

        const Eigen::MatrixXd F = data.inputs / std::sqrt(double(d));
        const Eigen::MatrixXd prec =
            F.transpose() * F / (sigma * sigma) + Eigen::MatrixXd::Identity(d, d) / (gamma * gamma);
        const Eigen::MatrixXd omega = prec.inverse();
        const Eigen::VectorXd mu = omega * F.transpose() * data.labels / (sigma * sigma);
        EXPECT_TRUE(post.omega().isApprox(omega, 1e-8)) << "trial " << trial;
        if (n > 0) EXPECT_TRUE(post.mu().isApprox(mu, 1e-8)) << "trial " << trial;
    }
}

TEST(FitPosterior, CovarianceInvariants) {
    const double gamma = 1.3;
    const Dataset data = random_dataset(8, 30, 21);
    const Posterior post = fit_posterior(data, config(8, 30, 0.3, gamma));
    const Eigen::MatrixXd& om = post.omega();
    EXPECT_LE((om - om.transpose()).cwiseAbs().maxCoeff(), 1e-12 * om.cwiseAbs().maxCoeff());
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(om).eigenvalues();
    EXPECT_GT(ev.minCoeff(), 0.0);
    EXPECT_LE(ev.maxCoeff(), gamma * gamma * (1 + 1e-12));
}

TEST(FitPosterior, RejectsDegenerateLikelihood) {
    const Dataset data = random_dataset(3, 5, 1);
    EXPECT_THROW(fit_posterior(data, config(3, 5, 0.0, 1.0)), std::invalid_argument);
    Dataset bad = data;
    bad.labels(2) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(fit_posterior(bad, config(3, 5, 0.3, 1.0)), std::invalid_argument);
}

TEST(PredictiveMoments, OriginHasNoiseVariance) {
    const Dataset data = random_dataset(5, 20, 2);
    const Posterior post = fit_posterior(data, config(5, 20, 0.3, 1.0));
    const PredictiveMoments pm = predictive_moments(post, Eigen::VectorXd::Zero(5));
    EXPECT_EQ(pm.mean, 0.0);
    EXPECT_DOUBLE_EQ(pm.variance, 0.09);
}

TEST(PredictiveMoments, PriorPredictive) {
    const ModelConfig cfg = config(3, 0, 0.2, 0.5);
    const Posterior post = fit_posterior(Dataset{Eigen::MatrixXd(0, 3), Eigen::VectorXd(0)}, cfg);
    const Eigen::Vector3d x(1.0, -2.0, 0.5);
    const PredictiveMoments pm = predictive_moments(post, x);
    EXPECT_EQ(pm.mean, 0.0);
    EXPECT_NEAR(pm.variance, 0.25 * x.squaredNorm() / 3 + 0.04, 1e-15);
}

TEST(PredictiveMoments, VarianceStrictlyAboveNoise) {
    const Dataset data = random_dataset(4, 100, 8);
    const Posterior post = fit_posterior(data, config(4, 100, 0.3, 1.0));
    SplitMix64 rng(4);
    for (int i = 0; i < 50; ++i) {
        const Eigen::VectorXd x = sample_input(4, 1.0, rng);
        EXPECT_GT(predictive_moments(post, x).variance, 0.09);
    }
}

TEST(FitPosterior, DuplicateSampleNeverIncreasesUncertainty) {
    for (int trial = 0; trial < 30; ++trial) {
        SplitMix64 pick = make_stream(23, "shape", {std::uint64_t(trial)});
        const int d = 1 + int(pick() % 8);
        const int n = 1 + int(pick() % 16);
        const Dataset data = random_dataset(d, n, 500 + trial);
        const ModelConfig cfg = config(d, n, 0.3, 1.0);
        const Posterior before = fit_posterior(data, cfg);
        Dataset more{Eigen::MatrixXd(n + 1, d), Eigen::VectorXd(n + 1)};
        more.inputs << data.inputs, data.inputs.row(int(pick() % n));
        more.labels << data.labels, 0.0;
        ModelConfig cfg2 = cfg;
        cfg2.n = n + 1;
        const Posterior after = fit_posterior(more, cfg2);
        SplitMix64 xr = make_stream(29, "x", {std::uint64_t(trial)});
        for (int i = 0; i < 10; ++i) {
            const Eigen::VectorXd x = sample_input(d, 1.0, xr);
            EXPECT_LE(after.quadratic_form(x), before.quadratic_form(x) * (1 + 1e-12));
        }
    }
}
