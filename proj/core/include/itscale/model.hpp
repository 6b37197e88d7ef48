#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include <Eigen/Dense>

#include "itscale/rng.hpp"

namespace itscale {

enum class TeacherMode { sampled, normalized };

std::string_view to_string(TeacherMode mode) noexcept;
TeacherMode parse_teacher_mode(std::string_view text);

/// Teacher-student setup: inputs x ~ N(0, S^2 I) in d dimensions, labels
/// y = w_T.x/sqrt(d) + N(0, sigma^2), Gaussian prior N(0, gamma^2 I) on the
/// student weights.
struct ModelConfig {
    int d = 10;
    int n = 10000;
    double S = 1.0;
    double sigma = 1e-4;
    double gamma = 1e-3;
    double tau = 2.0;
    TeacherMode teacher_mode = TeacherMode::sampled;

    /// Throws std::invalid_argument naming the first violated constraint.
    void validate() const;

    /// d/n; infinite when n == 0.
    double alpha() const noexcept;
    /// sigma^2 alpha / gamma^2, the bare ridge of the posterior.
    double ridge_hat() const noexcept;
};

class WeightVector {
public:
    WeightVector() = default;
    explicit WeightVector(Eigen::VectorXd values);

    static WeightVector zeros(int d) { return WeightVector(Eigen::VectorXd::Zero(d)); }

    const Eigen::VectorXd& values() const noexcept { return values_; }
    int size() const noexcept { return static_cast<int>(values_.size()); }
    double operator[](int i) const { return values_(i); }

    /// w.x / sqrt(d), the teacher (or reward) target at x.
    double project(const Eigen::Ref<const Eigen::VectorXd>& x) const;

private:
    Eigen::VectorXd values_;
};

struct Dataset {
    Eigen::MatrixXd inputs;  // n x d
    Eigen::VectorXd labels;  // n

    int size() const noexcept { return static_cast<int>(labels.size()); }
};

enum class RewardMode { explicit_weights, radial_c, polar };

/// How the reward weight w_R is built from the teacher.
///   radial_c: w_R = (1 + c R/(R+S^2)) w_T
///   polar:    w_R = w_T + c (cos(theta_T + theta), sin(theta_T + theta)), d = 2
struct RewardSpec {
    RewardMode mode = RewardMode::radial_c;
    std::optional<WeightVector> explicit_w;
    double c = 0.0;
    double theta = 0.0;

    static RewardSpec aligned() { return radial(0.0); }
    static RewardSpec radial(double c);
    static RewardSpec polar(double c, double theta);
    static RewardSpec explicit_weights(WeightVector w);
};

WeightVector sample_teacher(const ModelConfig& config, SplitMix64& rng);

Dataset generate_dataset(const ModelConfig& config, const WeightVector& teacher, SplitMix64& rng);

/// R may be +infinity (no data), in which case the radial factor is 1 + c.
WeightVector resolve_reward(const RewardSpec& spec, const WeightVector& teacher, double R, double S);

/// One test input x ~ N(0, S^2 I).
Eigen::VectorXd sample_input(int d, double S, SplitMix64& rng);

}  // namespace itscale
