#include "itscale/det_equiv.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace itscale {
namespace {

struct SpectralMoments {
    double m1 = 0.0;
    double m2 = 0.0;
};

SpectralMoments spectral_moments(std::span<const double> spectrum, double R) {
    SpectralMoments out;
    for (double lambda : spectrum) {
        const double ratio = lambda / (lambda + R);
        out.m1 += ratio;
        out.m2 += ratio * ratio;
    }
    const double inv_d = 1.0 / static_cast<double>(spectrum.size());
    out.m1 *= inv_d;
    out.m2 *= inv_d;
    return out;
}

double fixed_point_map(double alpha, std::span<const double> spectrum, double R) {
    return R * (1.0 - alpha * spectral_moments(spectrum, R).m1);
}

void check_inputs(double alpha, double sigma, double gamma) {
    if (!(std::isfinite(alpha) && alpha > 0)) throw std::invalid_argument("ridge: alpha must be finite and > 0");
    if (!(std::isfinite(sigma) && sigma >= 0)) throw std::invalid_argument("ridge: sigma must be >= 0");
    if (!(std::isfinite(gamma) && gamma > 0)) throw std::invalid_argument("ridge: gamma must be > 0");
}

}  // namespace

bool DetEquiv::isotropic() const noexcept {
    return !spectrum.empty() &&
           std::all_of(spectrum.begin(), spectrum.end(), [&](double l) { return l == spectrum.front(); });
}

Eigen::VectorXd DetEquiv::shrinkage() const {
    Eigen::VectorXd b(static_cast<Eigen::Index>(spectrum.size()));
    for (std::size_t j = 0; j < spectrum.size(); ++j) b(Eigen::Index(j)) = R / (spectrum[j] + R);
    return b;
}

DetEquiv solve_ridge(double alpha, double sigma, double gamma, std::span<const double> spectrum) {
    check_inputs(alpha, sigma, gamma);
    if (spectrum.empty()) throw std::invalid_argument("ridge: empty spectrum");
    for (double lambda : spectrum) {
        if (!(std::isfinite(lambda) && lambda > 0)) throw std::invalid_argument("ridge: spectrum entries must be > 0");
    }
    const double r_hat = sigma * sigma * alpha / (gamma * gamma);

    double R = 0.0;
    if (r_hat == 0.0) {
        if (alpha >= 1.0) {
            throw std::domain_error("ridge: alpha >= 1 with zero noise is the ridgeless degenerate case");
        }
    } else {
        // g(R) = R (1 - alpha m(R)) is strictly increasing with g(R_hat) <= R_hat.
        double lo = r_hat;
        double hi = 2.0 * r_hat;
        int grow = 0;
        while (fixed_point_map(alpha, spectrum, hi) < r_hat) {
            lo = hi;
            hi *= 2.0;
            if (++grow > 2000) throw std::runtime_error("ridge: failed to bracket the fixed point");
        }
        for (int it = 0; it < 400; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            if (fixed_point_map(alpha, spectrum, mid) < r_hat) lo = mid;
            else hi = mid;
        }
        const double g_lo = std::abs(fixed_point_map(alpha, spectrum, lo) - r_hat);
        const double g_hi = std::abs(fixed_point_map(alpha, spectrum, hi) - r_hat);
        R = g_lo <= g_hi ? lo : hi;
    }

    const double residual = std::abs(fixed_point_map(alpha, spectrum, R) - r_hat);
    if (residual > 1e-12 * std::max(1.0, r_hat)) {
        throw std::runtime_error("ridge: fixed-point residual " + std::to_string(residual) + " exceeds tolerance");
    }

    DetEquiv de;
    de.R = R;
    de.R_hat = r_hat;
    de.alpha = alpha;
    de.spectrum.assign(spectrum.begin(), spectrum.end());
    const SpectralMoments mom = spectral_moments(spectrum, R);
    de.m1 = mom.m1;
    de.m2 = mom.m2;
    if (de.isotropic()) {
        const double s2 = spectrum.front();
        de.A = s2 / (R + s2);
        de.B = R / (R + s2);
    } else {
        de.A = mom.m1;
        de.B = 1.0 - mom.m1;
    }
    return de;
}

double isotropic_ridge(double alpha, double sigma, double gamma, double S) {
    check_inputs(alpha, sigma, gamma);
    if (!(std::isfinite(S) && S > 0)) throw std::invalid_argument("ridge: S must be > 0");
    const double S2 = S * S;
    const double r = sigma * sigma * alpha / (gamma * gamma) / S2;
    // Positive root of R^2 - b S^2 R - r S^4 = 0 with b = alpha + r - 1.
    const double b = alpha + r - 1.0;
    const double disc = std::sqrt(b * b + 4.0 * r);
    if (b >= 0) return 0.5 * S2 * (b + disc);
    return 2.0 * r * S2 / (disc - b);
}

DetEquiv solve_ridge(const ModelConfig& config) {
    config.validate();
    if (config.n == 0) throw std::invalid_argument("ridge: n = 0 has no finite alpha");
    const double spectrum[] = {config.S * config.S};
    return solve_ridge(config.alpha(), config.sigma, config.gamma, spectrum);
}

PredictiveMoments de_moments(const Eigen::Ref<const Eigen::VectorXd>& x, const WeightVector& teacher,
                             const DetEquiv& de, const ModelConfig& config) {
    if (x.size() != teacher.size()) throw std::invalid_argument("de_moments: dimension mismatch");
    if (!de.isotropic()) throw std::invalid_argument("de_moments: requires an isotropic spectrum");
    const double d = static_cast<double>(x.size());
    PredictiveMoments out;
    out.mean = de.A * teacher.project(x);
    out.variance = config.sigma * config.sigma + config.gamma * config.gamma * de.B * x.squaredNorm() / d;
    return out;
}

NoiseVarianceCheck noise_variance_check(const DetEquiv& de, double sigma, double factor) {
    const double am2 = de.alpha * de.m2;
    if (am2 >= 1.0) {
        throw std::domain_error("noise_variance_check: alpha m2 >= 1, the deterministic equivalent diverges");
    }
    NoiseVarianceCheck out;
    out.factor = factor;
    out.var_z = sigma * sigma * am2 / (1.0 - am2);
    const double sigma_c2 = (1.0 - am2) / am2;
    out.sigma_c = std::sqrt(sigma_c2);
    out.valid = sigma * sigma <= factor * sigma_c2;
    return out;
}

}  // namespace itscale
