#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "itscale/evt.hpp"

using namespace itscale;

TEST(ChiSq1Cdf, RightEndpointIsOne) {
    // The displayed closed form evaluates to 1 at v = 0 for every lambda, as a
    // CDF of v <= 0 must.
    for (double lambda : {0.0, 0.3, 2.0, 9.0}) EXPECT_NEAR(chisq1_cdf(0.0, lambda), 1.0, 1e-15);
}

TEST(ChiSq1Cdf, CentralSurvivalAtOne) {
    EXPECT_NEAR(chisq1_cdf(-1.0, 0.0), 1 - std::erf(1 / std::numbers::sqrt2), 1e-15);
    EXPECT_NEAR(chisq1_cdf(-1.0, 0.0), 0.31731, 1e-5);
}

TEST(ChiSq1Cdf, MatchesIntegratedDensity) {
    const double lambda = 1.0, v = -0.25;
    const auto phi = [lambda](double u) { return chisq1_density(-u, lambda); };
    double err = 0.0;
    const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        phi, -v, std::numeric_limits<double>::infinity(), 15, 1e-13, &err);
    EXPECT_NEAR(chisq1_cdf(v, lambda), integral, 1e-8);
}

TEST(ChiSq1Cdf, MonotoneWithCorrectLimits) {
    for (double lambda : {0.0, 0.5, 4.0}) {
        EXPECT_EQ(chisq1_cdf(-std::numeric_limits<double>::infinity(), lambda), 0.0);
        EXPECT_LT(chisq1_cdf(-200.0, lambda), 1e-30);
        double prev = 0.0;
        for (double v = -50.0; v <= 0.0; v += 0.05) {
            const double f = chisq1_cdf(std::min(v, 0.0), lambda);
            EXPECT_GE(f, prev - 1e-15);
            prev = f;
        }
    }
    EXPECT_THROW(chisq1_cdf(0.1, 0.0), std::invalid_argument);
    EXPECT_THROW(chisq1_cdf(-1.0, -0.1), std::invalid_argument);
}

TEST(WeibullNorming, Values) {
    EXPECT_DOUBLE_EQ(weibull_norming(0.0, 1), std::numbers::pi / 2);
    EXPECT_DOUBLE_EQ(weibull_norming(1.0, 10), std::numbers::pi / 200 * std::exp(1.0));
    EXPECT_THROW(weibull_norming(0.0, 0), std::invalid_argument);
}

TEST(WeibullNorming, QuantileGapRatioTendsToOne) {
    double prev_err = std::numeric_limits<double>::infinity();
    for (int k : {10, 100, 1000, 10000}) {
        const double err = std::abs(quantile_gap(0.0, k) / weibull_norming(0.0, k) - 1.0);
        EXPECT_LT(err, prev_err);
        prev_err = err;
    }
    EXPECT_LT(prev_err, 0.02);
    EXPECT_NEAR(quantile_gap(0.7, 10000) / weibull_norming(0.7, 10000), 1.0, 0.02);
}

TEST(WeibullNorming, MeanOfMinimumMatchesWeibullMean) {
    const double lambda = 0.5;
    const int k = 1000;
    const MeanStderr mc = min_chisq_mc(lambda, k, 200000, 3);
    // E[-v_max] = c_k Gamma(1 + 1/alpha) = 2 c_k for alpha = 1/2.
    EXPECT_NEAR(mc.mean / (2 * weibull_norming(lambda, k)), 1.0, 0.05);
}

TEST(MinChiSqMc, SingleDrawMeans) {
    const MeanStderr central = min_chisq_mc(0.0, 1, 200000, 5);
    EXPECT_LT(std::abs(central.mean - 1.0), 4 * central.std_error);
    const MeanStderr shifted = min_chisq_mc(2.0, 1, 200000, 6);
    EXPECT_LT(std::abs(shifted.mean - 3.0), 4 * shifted.std_error);
}

TEST(MinChiSqMc, BestOfKScale) {
    const int k = 1000;
    const MeanStderr mc = min_chisq_mc(0.0, k, 200000, 7);
    EXPECT_NEAR(mc.mean * k * k / std::numbers::pi, 1.0, 0.05);
}

TEST(MinChiSqMc, NonIncreasingInKWithSharedDraws) {
    double prev = std::numeric_limits<double>::infinity();
    for (int k : {1, 2, 5, 20, 100}) {
        const MeanStderr mc = min_chisq_mc(0.3, k, 5000, 9);
        EXPECT_LE(mc.mean, prev);
        prev = mc.mean;
    }
}

TEST(MinChiSqMc, IndependentOfThreadCount) {
    EXPECT_EQ(min_chisq_samples(0.2, 30, 3000, 4, 1), min_chisq_samples(0.2, 30, 3000, 4, 3));
}

TEST(MinChiSqMc, WeibullShape) {
    const int k = 10000;
    auto mins = min_chisq_samples(0.0, k, 100000, 11);
    const double c = weibull_norming(0.0, k);
    for (double& m : mins) m /= c;
    std::sort(mins.begin(), mins.end());
    const double n = double(mins.size());
    double ks = 0.0;
    for (std::size_t i = 0; i < mins.size(); ++i) {
        if (mins[i] > 4.0) break;
        const double F = 1.0 - std::exp(-std::sqrt(mins[i]));
        ks = std::max({ks, std::abs(F - i / n), std::abs(F - (i + 1) / n)});
    }
    EXPECT_LT(ks, 0.02);
}

TEST(ExtremeValueDomain, WeibullIndexIsOneHalf) {
    for (double lambda : {0.0, 0.5, 2.0}) EXPECT_NEAR(weibull_index(lambda, -1e-8), 0.5, 1e-3);
}

TEST(ExtremeValueDomain, NotGumbel) {
    for (double lambda : {0.0, 1.0}) {
        const double slope = gumbel_auxiliary_slope(lambda, -1e-8);
        EXPECT_NEAR(slope, -2.0, 1e-3);
        EXPECT_GT(std::abs(slope), 1.0);
    }
}
