#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "itscale/det_equiv.hpp"
#include "itscale/model.hpp"
#include "itscale/posterior.hpp"
#include "itscale/rng.hpp"
#include "itscale/sampler.hpp"

namespace itscale {

/// Where the predictive moments at a test point come from.
enum class MomentMode { exact_posterior, det_equiv };

enum class EstimateMode { exact_posterior, det_equiv, judge };

std::string_view to_string(MomentMode mode) noexcept;
std::string_view to_string(EstimateMode mode) noexcept;
MomentMode parse_moment_mode(std::string_view text);

struct MeanStderr {
    double mean = 0.0;
    double std_error = 0.0;
};

struct ErrorEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t n_outer = 0;
    std::int64_t n_inner = 0;
    EstimateMode mode = EstimateMode::det_equiv;
};

/// Monte Carlo estimate of the selection error at one test point: the average
/// over n_inner batches of k draws y_i ~ N(m, s^2) of the softmax-weighted loss
///   sum_i (y_i - mu_T)^2 exp(-(y_i - mu_R)^2 / T) / sum_j exp(-(y_j - mu_R)^2 / T),
/// and at T = 0 the loss of the best-reward draw. The softmax-weighted average
/// is used instead of a categorical draw (same expectation, lower variance).
MeanStderr delta_x(const PredictiveMoments& moments, double mu_T, double mu_R, const SamplerConfig& sc,
                   int n_inner, SplitMix64& rng);

/// A test point bound to a reward: predictive moments plus teacher and reward
/// targets. `key` names the inference stream, so two points with the same key
/// see the same candidate draws (common random numbers across rewards).
struct TestPoint {
    PredictiveMoments moments;
    double mu_T = 0.0;
    double mu_R = 0.0;
    std::uint64_t key = 0;

    double delta_T() const noexcept { return moments.mean - mu_T; }
    double delta_R() const noexcept { return moments.mean - mu_R; }
};

struct SweepGrid {
    std::vector<int> ks;              // ascending, >= 1
    std::vector<double> temperatures; // >= 0, absolute units

    void validate() const;
    std::size_t cells() const noexcept { return ks.size() * temperatures.size(); }
    std::size_t cell(std::size_t k_index, std::size_t t_index) const noexcept {
        return t_index * ks.size() + k_index;
    }
};

/// Per-point estimates for every (k, T) cell of a grid. For each point and
/// batch, k_max candidates are drawn once and every k uses a prefix of them,
/// so curves in k and in T share their randomness.
class SweepResult {
public:
    SweepResult(SweepGrid grid, Eigen::MatrixXd per_point, int n_inner, EstimateMode mode);

    const SweepGrid& grid() const noexcept { return grid_; }
    /// rows = test points, columns = grid cells.
    const Eigen::MatrixXd& per_point() const noexcept { return per_point_; }
    int n_inner() const noexcept { return n_inner_; }

    ErrorEstimate estimate(std::size_t k_index, std::size_t t_index) const;
    /// Paired estimate of delta(b) - delta(a) over the same test points.
    MeanStderr difference(std::size_t cell_a, std::size_t cell_b) const;

private:
    SweepGrid grid_;
    Eigen::MatrixXd per_point_;
    int n_inner_;
    EstimateMode mode_;
};

SweepResult sweep_delta(std::span<const TestPoint> points, const SweepGrid& grid, int n_inner,
                        std::uint64_t seed, unsigned threads = 0,
                        EstimateMode mode = EstimateMode::det_equiv);

/// One teacher draw (and, for exact moments, one dataset and its posterior).
struct Scenario {
    ModelConfig config;
    WeightVector teacher;
    std::optional<Posterior> posterior;
    std::optional<DetEquiv> de;
    std::uint64_t replicate = 0;

    /// Renormalised ridge used to resolve radial rewards; +inf without data.
    double ridge() const noexcept;
    PredictiveMoments moments(const Eigen::Ref<const Eigen::VectorXd>& x, MomentMode mode) const;
};

/// Teacher from stream (seed, "teacher", replicate), data from
/// (seed, "data", replicate). det_equiv mode needs n > 0; exact mode needs
/// sigma > 0 when n > 0.
Scenario make_scenario(const ModelConfig& config, MomentMode mode, std::uint64_t seed,
                       std::uint64_t replicate = 0);

/// Test inputs of one scenario with their predictive moments.
struct TestPoints {
    Eigen::MatrixXd inputs;  // rows are x
    std::vector<PredictiveMoments> moments;
    std::vector<double> mu_T;
    std::vector<std::uint64_t> keys;

    std::size_t size() const noexcept { return mu_T.size(); }
};

TestPoints draw_test_points(const Scenario& scenario, MomentMode mode, int n_outer, std::uint64_t seed,
                            unsigned threads = 0);

std::vector<TestPoint> bind_reward(const TestPoints& points, const WeightVector& reward);

/// Scenarios (teacher and dataset replicates) with their test points, reused
/// across every reward, k and T evaluated on them. n_datasets > 1 averages
/// over teacher draws as well as test inputs.
class Experiment {
public:
    Experiment(ModelConfig config, MomentMode mode, int n_outer, int n_datasets, std::uint64_t seed,
               unsigned threads = 0);

    const ModelConfig& config() const noexcept { return config_; }
    MomentMode mode() const noexcept { return mode_; }
    std::uint64_t seed() const noexcept { return seed_; }
    unsigned threads() const noexcept { return threads_; }
    const std::vector<Scenario>& scenarios() const noexcept { return scenarios_; }
    const std::vector<TestPoints>& test_points() const noexcept { return points_; }
    std::size_t n_points() const noexcept;

    /// All test points of all replicates, bound to the reward each replicate resolves.
    std::vector<TestPoint> bind(const RewardSpec& reward) const;

    SweepResult sweep(const RewardSpec& reward, const SweepGrid& grid, int n_inner) const;

private:
    ModelConfig config_;
    MomentMode mode_;
    std::uint64_t seed_;
    unsigned threads_;
    std::vector<Scenario> scenarios_;
    std::vector<TestPoints> points_;
};

/// delta = E_x delta(x); the standard error comes from the spread of the
/// per-point estimates, which already carries the inner-batch noise.
ErrorEstimate delta(const ModelConfig& config, const RewardSpec& reward, const SamplerConfig& sc, int n_outer,
                    int n_inner, MomentMode mode, std::uint64_t seed, unsigned threads = 0, int n_datasets = 1);

enum class CurveShape { monotone, non_monotone };
std::string_view to_string(CurveShape shape) noexcept;

struct CurveClassification {
    CurveShape shape = CurveShape::monotone;
    std::size_t argmin = 0;  // index into grid.ks
    /// Largest paired z-score of delta(k_j) - delta(k_i) over interior i < j.
    double max_rise_z = 0.0;
};

/// Labels delta(k) at one temperature non_monotone iff some interior grid
/// point lies at least z_threshold paired standard errors below a point at
/// larger k.
CurveClassification classify_k_curve(const SweepResult& sweep, std::size_t t_index, double z_threshold = 3.0);

/// Grid indices whose estimate is statistically tied with the empirical
/// minimum along k (paired difference within z_threshold standard errors).
std::vector<std::size_t> tied_argmin_k(const SweepResult& sweep, std::size_t t_index, double z_threshold = 2.0);
std::vector<std::size_t> tied_argmin_t(const SweepResult& sweep, std::size_t k_index, double z_threshold = 2.0);

}  // namespace itscale
