#pragma once

#include <cstdint>
#include <vector>

#include "itscale/gen_error.hpp"

namespace itscale {

// Extreme-value objects for the best-of-k limit. The penalty of a candidate is
// v = -(y - mu_R)^2 / s^2, so -v ~ chi^2_1(lambda) and best-of-k keeps the
// largest v.

/// F(v) = 1 - (erf((sqrt(-v) - sqrt(lambda))/sqrt2) + erf((sqrt(lambda) + sqrt(-v))/sqrt2)) / 2
/// for v <= 0. Throws std::invalid_argument for v > 0 or lambda < 0.
double chisq1_cdf(double v, double lambda);

/// Density of v, exp((v - lambda)/2) cosh(sqrt(-lambda v)) / (sqrt(2 pi) sqrt(-v)), for v < 0.
double chisq1_density(double v, double lambda);

/// Weibull norming constant c_k = pi e^lambda / (2 k^2).
double weibull_norming(double lambda, int k);

/// v_F - F^{-1}(1 - 1/k) with v_F = 0, by bisection on the chi-squared CDF.
double quantile_gap(double lambda, int k);

/// Min over k draws of (z + sqrt(lambda))^2, one value per Monte Carlo
/// replicate. Replicate i always uses the same normals, so runs at different
/// k share their draws.
std::vector<double> min_chisq_samples(double lambda, int k, int n_mc, std::uint64_t seed, unsigned threads = 0);

MeanStderr min_chisq_mc(double lambda, int k, int n_mc, std::uint64_t seed, unsigned threads = 0);

/// (v_F - v) F'(v) / (1 - F(v)) at v < 0; tends to the Weibull index 1/2 as v -> 0.
double weibull_index(double lambda, double v);

/// Derivative of the Gumbel auxiliary a(v) = (1 - F(v)) / F'(v) at v < 0 by
/// centred difference. A nonzero limit as v -> 0 rules out the Gumbel domain.
double gumbel_auxiliary_slope(double lambda, double v);

}  // namespace itscale
