#include "itscale/theory.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace itscale {

namespace {

void require_k(int k, int min_k, const char* what) {
    if (k < min_k) throw std::invalid_argument(std::string(what) + ": k too small");
}

double u_sigma_u_at(double alpha, const ModelConfig& config, double w2) {
    const double S2 = config.S * config.S;
    const double R = solve_ridge(alpha, config.sigma, config.gamma, std::vector<double>{S2}).R;
    const double B = R / (R + S2);
    return S2 * B * B * w2;
}

}  // namespace

SeriesTerms SeriesTerms::make(double delta_T, double delta_R, double s2, double T) {
    if (!(s2 > 0)) throw std::invalid_argument("SeriesTerms: s2 must be positive");
    if (!(T >= 0)) throw std::invalid_argument("SeriesTerms: T must be nonnegative");
    SeriesTerms st;
    st.delta_T = delta_T;
    st.delta_R = delta_R;
    st.s2 = s2;
    st.t = T / (2.0 * s2);
    for (int l = 1; l <= 3; ++l) {
        st.C[l - 1] = 2.0 * delta_T * delta_R + s2 + (l - 1) * delta_R * delta_R;
    }
    return st;
}

SeriesTerms SeriesTerms::at(const TestPoint& point, double T) {
    return make(point.delta_T(), point.delta_R(), point.moments.variance, T);
}

double series_term(const SeriesTerms& st, int k, int l) {
    require_k(k, 1, "series_term");
    if (l < 1 || l > 3) throw std::invalid_argument("series_term: l must be 1, 2 or 3");
    double prod = 1.0;
    for (int i = 1; i <= l; ++i) prod *= 1.0 - static_cast<double>(i) / k;
    if (prod == 0.0) return 0.0;
    const double sign = (l % 2 == 1) ? -1.0 : 1.0;
    return sign * st.C[l - 1] / std::pow(st.t, l) * prod;
}

double high_t_delta_x(const SeriesTerms& st, int k) {
    require_k(k, 1, "high_t_delta_x");
    double v = st.delta_T * st.delta_T + st.s2;
    for (int l = 1; l <= 3; ++l) v += series_term(st, k, l);
    return v;
}

double best_of_k_delta_x(double s2, double delta_T, int k) {
    if (!(s2 > 0)) throw std::invalid_argument("best_of_k_delta_x: s2 must be positive");
    require_k(k, 1, "best_of_k_delta_x");
    const double kk = static_cast<double>(k);
    return std::numbers::pi / (kk * kk) * s2 * std::exp(delta_T * delta_T / s2);
}

RefinedBestOfK refined_best_of_k_delta(const ModelConfig& config, const DetEquiv& de, const WeightVector& w, int k) {
    require_k(k, 1, "refined_best_of_k_delta");
    if (w.size() != config.d) throw std::invalid_argument("refined_best_of_k_delta: dimension mismatch");
    const double S2 = config.S * config.S;
    const double sigma2 = config.sigma * config.sigma;
    RefinedBestOfK out;
    out.u_sigma_u = S2 * de.B * de.B * w.values().squaredNorm();
    const double ratio = 2.0 * out.u_sigma_u / (sigma2 * config.d);
    if (!(ratio < 1.0)) throw std::domain_error("refined_best_of_k_delta: 2 u.Sigma.u >= sigma^2 d");
    out.prefactor = 1.0 / std::sqrt(1.0 - ratio);
    const double kk = static_cast<double>(k);
    out.delta = std::numbers::pi * sigma2 / (kk * kk) * out.prefactor;
    out.regime_ok = config.gamma * config.gamma * de.B * S2 <= 0.01 * sigma2;
    return out;
}

double optimal_reward_c(int k, double t) {
    require_k(k, 3, "optimal_reward");
    return static_cast<double>(k) / (k - 2) * t;
}

WeightVector optimal_reward(const WeightVector& w_T, const DetEquiv& de, int k, double t) {
    const double c = optimal_reward_c(k, t);
    return WeightVector(w_T.values() * (1.0 + c * de.B));
}

std::optional<int> optimal_k(double C1, double C2, double t) {
    if (!(C1 > 0) || !(C2 > 0)) return std::nullopt;
    const double t_star = 3.0 * C2 / C1;
    if (!(t < t_star)) return std::nullopt;
    return static_cast<int>(std::ceil(4.0 / 3.0 * t_star / (t_star - t)));
}

std::optional<int> optimal_k(const SeriesTerms& st) { return optimal_k(st.C[0], st.C[1], st.t); }

double optimal_temperature_from(double C1, double C2, double s2, int k) {
    require_k(k, 3, "optimal_temperature");
    if (!(C1 > 0) || !(C2 > 0)) throw std::domain_error("optimal_temperature: needs C1 > 0 and C2 > 0");
    const double t_opt = 2.0 * (1.0 - 2.0 / k) * C2 / C1;
    return 2.0 * s2 * t_opt;
}

double optimal_temperature(double delta_T, double delta_R, double s2, int k) {
    const SeriesTerms st = SeriesTerms::make(delta_T, delta_R, s2, 0.0);
    return optimal_temperature_from(st.C[0], st.C[1], s2, k);
}

CoefficientSet average_coefficients(std::span<const TestPoint> points) {
    if (points.empty()) throw std::invalid_argument("average_coefficients: no points");
    CoefficientSet cs;
    for (const TestPoint& p : points) {
        const SeriesTerms st = SeriesTerms::make(p.delta_T(), p.delta_R(), p.moments.variance, 0.0);
        for (int l = 0; l < 3; ++l) cs.C[l] += st.C[l];
        cs.s2 += st.s2;
        cs.delta_T2 += st.delta_T * st.delta_T;
    }
    const double n = static_cast<double>(points.size());
    for (double& c : cs.C) c /= n;
    cs.s2 /= n;
    cs.delta_T2 /= n;
    return cs;
}

double high_t_delta(std::span<const TestPoint> points, double T, int k) {
    if (points.empty()) throw std::invalid_argument("high_t_delta: no points");
    double sum = 0.0;
    for (const TestPoint& p : points) sum += high_t_delta_x(SeriesTerms::at(p, T), k);
    return sum / static_cast<double>(points.size());
}

double best_of_k_delta(std::span<const TestPoint> points, int k) {
    if (points.empty()) throw std::invalid_argument("best_of_k_delta: no points");
    double sum = 0.0;
    for (const TestPoint& p : points) sum += best_of_k_delta_x(p.moments.variance, p.delta_T(), k);
    return sum / static_cast<double>(points.size());
}

ScalingDerivatives scaling_derivatives(const ModelConfig& config, const DetEquiv& de, const WeightVector& w,
                                       double rel_step) {
    if (!(rel_step > 0 && rel_step < 1)) throw std::invalid_argument("scaling_derivatives: bad step");
    if (w.size() != config.d) throw std::invalid_argument("scaling_derivatives: dimension mismatch");
    const double S2 = config.S * config.S;
    const double sigma2 = config.sigma * config.sigma;
    const double w2 = w.values().squaredNorm();
    ScalingDerivatives out;
    out.u_sigma_u = S2 * de.B * de.B * w2;
    const double denom = sigma2 * config.d - 2.0 * out.u_sigma_u;
    if (!(denom > 0)) throw std::domain_error("scaling_derivatives: sigma^2 d - 2 u.Sigma.u <= 0");
    const double up = u_sigma_u_at(de.alpha * (1.0 + rel_step), config, w2);
    const double down = u_sigma_u_at(de.alpha * (1.0 - rel_step), config, w2);
    const double alpha_d_alpha = (up - down) / (2.0 * rel_step);
    out.dlogn = -alpha_d_alpha / denom;
    out.regime_ok = de.R <= 0.01 * sigma2 && config.gamma * config.gamma * de.B * S2 <= 0.01 * sigma2;
    out.inference_dominates = std::abs(out.dlogn) <= 0.1 * std::abs(out.dlogk);
    return out;
}

double dlogn_closed_form(const ModelConfig& config, const WeightVector& w) {
    if (config.n <= 0) throw std::invalid_argument("dlogn_closed_form: needs n > 0");
    const double d = config.d;
    const double n = config.n;
    const double g4 = std::pow(config.gamma, 4);
    const double X = w.values().squaredNorm() / d / (config.S * config.S) * d * d * config.sigma * config.sigma /
                     (n * n * g4);
    return -2.0 * X / (1.0 - 2.0 * X);
}

}  // namespace itscale
