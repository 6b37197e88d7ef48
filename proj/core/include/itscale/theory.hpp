#pragma once

#include <array>
#include <optional>
#include <span>

#include "itscale/det_equiv.hpp"
#include "itscale/gen_error.hpp"
#include "itscale/model.hpp"

namespace itscale {

/// Below this t = T/(2 s^2) the truncated high-temperature series is flagged
/// as outside its accurate range.
inline constexpr double kSeriesValidT = 5.0;

/// Per-point inputs of the high-temperature series.
struct SeriesTerms {
    double delta_T = 0.0;
    double delta_R = 0.0;
    double s2 = 1.0;
    double t = 0.0;
    std::array<double, 3> C{};  // C_l = 2 Delta_T Delta_R + s^2 + (l-1) Delta_R^2

    static SeriesTerms make(double delta_T, double delta_R, double s2, double T);
    static SeriesTerms at(const TestPoint& point, double T);

    bool series_valid() const noexcept { return t >= kSeriesValidT; }
};

/// Delta_T^2 + s^2 + sum_{l=1..3} (-1)^l C_l / t^l prod_{i=1..l} (1 - i/k).
double high_t_delta_x(const SeriesTerms& st, int k);

/// The l-th correction term of the series, (-1)^l C_l / t^l prod_{i<=l} (1 - i/k).
double series_term(const SeriesTerms& st, int k, int l);

/// Large-k best-of-k error with the exact teacher as reward:
/// (pi / k^2) s^2 exp(Delta_T^2 / s^2).
double best_of_k_delta_x(double s2, double delta_T, int k);

struct RefinedBestOfK {
    double delta = 0.0;
    double prefactor = 1.0;    // (1 - 2 u.Sigma.u / (sigma^2 d))^{-1/2}
    double u_sigma_u = 0.0;
    bool regime_ok = false;    // (gamma^2/d) Tr(B Sigma) <= 0.01 sigma^2
};

/// Best-of-k error averaged over x, with u = B w (isotropic Sigma = S^2 I).
/// Throws std::domain_error when 2 u.Sigma.u >= sigma^2 d.
RefinedBestOfK refined_best_of_k_delta(const ModelConfig& config, const DetEquiv& de, const WeightVector& w, int k);

/// w_T + k/(k-2) t B w_T. Throws for k <= 2.
WeightVector optimal_reward(const WeightVector& w_T, const DetEquiv& de, int k, double t);

/// The same optimum expressed as the radial misalignment c of RewardSpec::radial.
double optimal_reward_c(int k, double t);

/// Interior optimum in k, or nullopt when delta(k) decreases monotonically.
std::optional<int> optimal_k(const SeriesTerms& st);
std::optional<int> optimal_k(double C1, double C2, double t);

/// T_opt = 2 s^2 t_opt with t_opt = 2 (1 - 2/k) C2/C1.
/// Throws for k <= 2 and std::domain_error unless C1, C2 > 0.
double optimal_temperature(double delta_T, double delta_R, double s2, int k);
double optimal_temperature_from(double C1, double C2, double s2, int k);

/// Series coefficients averaged over test points, for sweeps at one global T.
struct CoefficientSet {
    std::array<double, 3> C{};
    double s2 = 0.0;
    double delta_T2 = 0.0;

    double t(double T) const noexcept { return T / (2.0 * s2); }
    std::optional<int> optimal_k(double T) const { return itscale::optimal_k(C[0], C[1], t(T)); }
    double optimal_temperature(int k) const { return optimal_temperature_from(C[0], C[1], s2, k); }
};

CoefficientSet average_coefficients(std::span<const TestPoint> points);

/// Series and best-of-k predictions averaged pointwise over test points.
double high_t_delta(std::span<const TestPoint> points, double T, int k);
double best_of_k_delta(std::span<const TestPoint> points, int k);

struct ScalingDerivatives {
    double dlogk = -2.0;
    double dlogn = 0.0;
    double u_sigma_u = 0.0;
    /// R <= 0.01 sigma^2 and (gamma^2/d) Tr(B Sigma) <= 0.01 sigma^2.
    bool regime_ok = false;
    /// |dlogn| at most a tenth of |dlogk|.
    bool inference_dominates = false;
};

/// dlog(delta)/dlog(k) and dlog(delta)/dlog(n) of the refined best-of-k law.
/// The alpha derivative of u.Sigma.u is a centred difference through the
/// ridge solver at relative step `rel_step`.
ScalingDerivatives scaling_derivatives(const ModelConfig& config, const DetEquiv& de, const WeightVector& w,
                                       double rel_step = 1e-4);

/// Flat-prior, ample-data closed form of dlog(delta)/dlog(n).
double dlogn_closed_form(const ModelConfig& config, const WeightVector& w);

}  // namespace itscale
