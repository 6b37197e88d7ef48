#include "itscale/model.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace itscale {

std::string_view to_string(TeacherMode mode) noexcept {
    return mode == TeacherMode::sampled ? "sampled" : "normalized";
}

TeacherMode parse_teacher_mode(std::string_view text) {
    if (text == "sampled") return TeacherMode::sampled;
    if (text == "normalized") return TeacherMode::normalized;
    throw std::invalid_argument("teacher_mode must be 'sampled' or 'normalized', got '" +
                                std::string(text) + "'");
}

void ModelConfig::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("ModelConfig: " + what); };
    if (d < 1) fail("d must be >= 1");
    if (n < 0) fail("n must be >= 0");
    if (!(std::isfinite(S) && S > 0)) fail("S must be finite and > 0");
    if (!(std::isfinite(sigma) && sigma >= 0)) fail("sigma must be finite and >= 0");
    if (!(std::isfinite(gamma) && gamma > 0)) fail("gamma must be finite and > 0");
    if (!(std::isfinite(tau) && tau >= 0)) fail("tau must be finite and >= 0");
}

double ModelConfig::alpha() const noexcept {
    if (n == 0) return std::numeric_limits<double>::infinity();
    return static_cast<double>(d) / static_cast<double>(n);
}

double ModelConfig::ridge_hat() const noexcept {
    return sigma * sigma * alpha() / (gamma * gamma);
}

WeightVector::WeightVector(Eigen::VectorXd values) : values_(std::move(values)) {
    if (!values_.allFinite()) throw std::invalid_argument("WeightVector: non-finite entry");
}

double WeightVector::project(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != values_.size()) {
        throw std::invalid_argument("WeightVector::project: dimension mismatch");
    }
    return values_.dot(x) / std::sqrt(static_cast<double>(values_.size()));
}

RewardSpec RewardSpec::radial(double c) {
    RewardSpec spec;
    spec.mode = RewardMode::radial_c;
    spec.c = c;
    return spec;
}

RewardSpec RewardSpec::polar(double c, double theta) {
    RewardSpec spec;
    spec.mode = RewardMode::polar;
    spec.c = c;
    spec.theta = theta;
    return spec;
}

RewardSpec RewardSpec::explicit_weights(WeightVector w) {
    RewardSpec spec;
    spec.mode = RewardMode::explicit_weights;
    spec.explicit_w = std::move(w);
    return spec;
}

WeightVector sample_teacher(const ModelConfig& config, SplitMix64& rng) {
    config.validate();
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd w(config.d);
    for (int i = 0; i < config.d; ++i) w(i) = config.tau * normal(rng);
    if (config.teacher_mode == TeacherMode::normalized) {
        const double norm2 = w.squaredNorm();
        if (norm2 > 0) w *= std::sqrt(static_cast<double>(config.d) / norm2);
    }
    return WeightVector(std::move(w));
}

Eigen::VectorXd sample_input(int d, double S, SplitMix64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd x(d);
    for (int j = 0; j < d; ++j) x(j) = S * normal(rng);
    return x;
}

Dataset generate_dataset(const ModelConfig& config, const WeightVector& teacher, SplitMix64& rng) {
    config.validate();
    if (teacher.size() != config.d) {
        throw std::invalid_argument("generate_dataset: teacher dimension differs from d");
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    Dataset data;
    data.inputs.resize(config.n, config.d);
    data.labels.resize(config.n);
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(config.d));
    // Row-sequential draws: x^i first, then eta^i.
    for (int i = 0; i < config.n; ++i) {
        double dot = 0.0;
        for (int j = 0; j < config.d; ++j) {
            const double xij = config.S * normal(rng);
            data.inputs(i, j) = xij;
            dot += teacher[j] * xij;
        }
        data.labels(i) = dot * inv_sqrt_d + config.sigma * normal(rng);
    }
    return data;
}

WeightVector resolve_reward(const RewardSpec& spec, const WeightVector& teacher, double R, double S) {
    if (!(R >= 0)) throw std::invalid_argument("resolve_reward: R must be >= 0");
    switch (spec.mode) {
        case RewardMode::explicit_weights: {
            if (!spec.explicit_w) throw std::invalid_argument("resolve_reward: explicit mode without weights");
            if (spec.explicit_w->size() != teacher.size()) {
                throw std::invalid_argument("resolve_reward: explicit reward dimension differs from teacher");
            }
            return *spec.explicit_w;
        }
        case RewardMode::radial_c: {
            const double shrink = std::isinf(R) ? 1.0 : R / (R + S * S);
            return WeightVector((1.0 + spec.c * shrink) * teacher.values());
        }
        case RewardMode::polar: {
            if (teacher.size() != 2) {
                throw std::invalid_argument("resolve_reward: polar reward requires d = 2, got d = " +
                                            std::to_string(teacher.size()));
            }
            const double theta_t = std::atan2(teacher[1], teacher[0]);
            Eigen::VectorXd w = teacher.values();
            w(0) += spec.c * std::cos(theta_t + spec.theta);
            w(1) += spec.c * std::sin(theta_t + spec.theta);
            return WeightVector(std::move(w));
        }
    }
    throw std::logic_error("resolve_reward: unknown mode");
}

}  // namespace itscale
