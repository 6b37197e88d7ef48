#include "itscale/evt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "itscale/parallel.hpp"
#include "itscale/rng.hpp"

namespace itscale {

namespace {

void check_lambda(double lambda) {
    if (!(lambda >= 0) || !std::isfinite(lambda)) throw std::invalid_argument("noncentrality must be finite and >= 0");
}

// P(chi^2_1(lambda) <= x), i.e. 1 - F(-x).
double chisq1_lower(double x, double lambda) {
    const double r = std::sqrt(x);
    const double a = std::sqrt(lambda);
    return 0.5 * (std::erf((r - a) / std::numbers::sqrt2) + std::erf((a + r) / std::numbers::sqrt2));
}

}  // namespace

double chisq1_cdf(double v, double lambda) {
    check_lambda(lambda);
    if (v > 0 || std::isnan(v)) throw std::invalid_argument("chisq1_cdf: v must be <= 0");
    if (std::isinf(v)) return 0.0;
    return 1.0 - chisq1_lower(-v, lambda);
}

double chisq1_density(double v, double lambda) {
    check_lambda(lambda);
    if (!(v < 0)) throw std::invalid_argument("chisq1_density: v must be < 0");
    return std::exp((v - lambda) / 2.0) * std::cosh(std::sqrt(-lambda * v)) / (std::sqrt(2.0 * std::numbers::pi) * std::sqrt(-v));
}

double weibull_norming(double lambda, int k) {
    check_lambda(lambda);
    if (k < 1) throw std::invalid_argument("weibull_norming: k must be >= 1");
    const double kk = static_cast<double>(k);
    return std::numbers::pi / (2.0 * kk * kk) * std::exp(lambda);
}

double quantile_gap(double lambda, int k) {
    check_lambda(lambda);
    if (k < 1) throw std::invalid_argument("quantile_gap: k must be >= 1");
    if (k == 1) return std::numeric_limits<double>::infinity();
    const double target = 1.0 / k;
    double lo = 0.0;
    double hi = 1.0;
    while (chisq1_lower(hi, lambda) < target) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (chisq1_lower(mid, lambda) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> min_chisq_samples(double lambda, int k, int n_mc, std::uint64_t seed, unsigned threads) {
    check_lambda(lambda);
    if (k < 1 || n_mc < 1) throw std::invalid_argument("min_chisq_samples: k and n_mc must be >= 1");
    const double shift = std::sqrt(lambda);
    std::vector<double> mins(static_cast<std::size_t>(n_mc));
    parallel_for_chunks(mins.size(), 256, threads, [&](std::size_t begin, std::size_t end) {
        std::normal_distribution<double> normal(0.0, 1.0);
        for (std::size_t i = begin; i < end; ++i) {
            SplitMix64 rng = make_stream(seed, stream::kEvt, {i});
            normal.reset();
            double best = std::numeric_limits<double>::infinity();
            for (int j = 0; j < k; ++j) {
                const double e = normal(rng) + shift;
                best = std::min(best, e * e);
            }
            mins[i] = best;
        }
    });
    return mins;
}

MeanStderr min_chisq_mc(double lambda, int k, int n_mc, std::uint64_t seed, unsigned threads) {
    const auto mins = min_chisq_samples(lambda, k, n_mc, seed, threads);
    const Eigen::Map<const Eigen::VectorXd> v(mins.data(), static_cast<Eigen::Index>(mins.size()));
    MeanStderr out;
    out.mean = v.mean();
    if (v.size() > 1) {
        const double var = (v.array() - out.mean).square().sum() / static_cast<double>(v.size() - 1);
        out.std_error = std::sqrt(var / static_cast<double>(v.size()));
    }
    return out;
}

double weibull_index(double lambda, double v) {
    return -v * chisq1_density(v, lambda) / (1.0 - chisq1_cdf(v, lambda));
}

double gumbel_auxiliary_slope(double lambda, double v) {
    if (!(v < 0)) throw std::invalid_argument("gumbel_auxiliary_slope: v must be < 0");
    const auto a = [lambda](double u) { return (1.0 - chisq1_cdf(u, lambda)) / chisq1_density(u, lambda); };
    const double h = 1e-3 * -v;
    return (a(v + h) - a(v - h)) / (2.0 * h);
}

}  // namespace itscale
