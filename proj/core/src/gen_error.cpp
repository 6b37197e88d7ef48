#include "itscale/gen_error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "itscale/parallel.hpp"

namespace itscale {

std::string_view to_string(MomentMode mode) noexcept {
    return mode == MomentMode::exact_posterior ? "exact" : "de";
}

std::string_view to_string(EstimateMode mode) noexcept {
    switch (mode) {
        case EstimateMode::exact_posterior: return "exact";
        case EstimateMode::det_equiv: return "de";
        case EstimateMode::judge: return "judge";
    }
    return "unknown";
}

MomentMode parse_moment_mode(std::string_view text) {
    if (text == "exact" || text == "exact_posterior") return MomentMode::exact_posterior;
    if (text == "de" || text == "det_equiv") return MomentMode::det_equiv;
    throw std::invalid_argument("mode must be 'exact' or 'de', got '" + std::string(text) + "'");
}

std::string_view to_string(CurveShape shape) noexcept {
    return shape == CurveShape::monotone ? "monotone" : "non_monotone";
}

namespace {

constexpr std::size_t kPointChunk = 16;

EstimateMode estimate_mode(MomentMode m) {
    return m == MomentMode::exact_posterior ? EstimateMode::exact_posterior : EstimateMode::det_equiv;
}

// Evaluates one batch of candidates for every (k, T) cell. `z` holds k_max
// standard normal draws; candidate i is y_i = m + s z_i. Losses and rewards are
// formed from the offsets Delta_T = m - mu_T and Delta_R = m - mu_R directly.
class BatchKernel {
public:
    explicit BatchKernel(const SweepGrid& grid)
        : grid_(grid), k_max_(static_cast<std::size_t>(grid.ks.back())), loss_(k_max_), reward_(k_max_) {}

    void evaluate(std::span<const double> z, double delta_T, double delta_R, double s, std::span<double> out) {
        for (std::size_t i = 0; i < k_max_; ++i) {
            const double eT = delta_T + s * z[i];
            const double eR = delta_R + s * z[i];
            loss_[i] = eT * eT;
            reward_[i] = -eR * eR;
        }
        const std::size_t nk = grid_.ks.size();
        for (std::size_t ti = 0; ti < grid_.temperatures.size(); ++ti) {
            const double T = grid_.temperatures[ti];
            std::size_t next_k = 0;
            if (T == 0.0) {
                std::size_t best = 0;
                for (std::size_t i = 0; i < k_max_ && next_k < nk; ++i) {
                    if (reward_[i] > reward_[best]) best = i;
                    while (next_k < nk && static_cast<std::size_t>(grid_.ks[next_k]) == i + 1) {
                        out[ti * nk + next_k] = loss_[best];
                        ++next_k;
                    }
                }
            } else {
                // Running log-sum-exp: rescale the partial sums whenever the
                // running maximum reward moves.
                double top = -std::numeric_limits<double>::infinity();
                double sum_w = 0.0;
                double sum_wl = 0.0;
                for (std::size_t i = 0; i < k_max_ && next_k < nk; ++i) {
                    if (reward_[i] > top) {
                        const double scale = std::exp((top - reward_[i]) / T);
                        sum_w *= scale;
                        sum_wl *= scale;
                        top = reward_[i];
                    }
                    const double w = std::exp((reward_[i] - top) / T);
                    sum_w += w;
                    sum_wl += w * loss_[i];
                    while (next_k < nk && static_cast<std::size_t>(grid_.ks[next_k]) == i + 1) {
                        out[ti * nk + next_k] = sum_wl / sum_w;
                        ++next_k;
                    }
                }
            }
        }
    }

    std::size_t k_max() const noexcept { return k_max_; }

private:
    const SweepGrid& grid_;
    std::size_t k_max_;
    std::vector<double> loss_;
    std::vector<double> reward_;
};

void fill_normals(std::uint64_t seed, std::uint64_t key, std::uint64_t batch, std::span<double> z) {
    SplitMix64 rng = make_stream(seed, stream::kInference, {key, batch});
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& v : z) v = normal(rng);
}

MeanStderr mean_stderr(const Eigen::Ref<const Eigen::VectorXd>& values) {
    MeanStderr out;
    const auto n = values.size();
    if (n == 0) return out;
    out.mean = values.mean();
    if (n > 1) {
        const double var = (values.array() - out.mean).square().sum() / static_cast<double>(n - 1);
        out.std_error = std::sqrt(var / static_cast<double>(n));
    }
    return out;
}

}  // namespace

void SweepGrid::validate() const {
    if (ks.empty() || temperatures.empty()) throw std::invalid_argument("SweepGrid: empty k or T grid");
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (ks[i] < 1) throw std::invalid_argument("SweepGrid: k must be >= 1");
        if (i > 0 && ks[i] <= ks[i - 1]) throw std::invalid_argument("SweepGrid: k grid must be strictly ascending");
    }
    for (double T : temperatures) {
        if (!(T >= 0) || !std::isfinite(T)) throw std::invalid_argument("SweepGrid: T must be finite and >= 0");
    }
}

MeanStderr delta_x(const PredictiveMoments& moments, double mu_T, double mu_R, const SamplerConfig& sc,
                   int n_inner, SplitMix64& rng) {
    sc.validate();
    if (n_inner < 1) throw std::invalid_argument("delta_x: n_inner must be >= 1");
    if (!(moments.variance >= 0)) throw std::invalid_argument("delta_x: negative predictive variance");
    const SweepGrid grid{{sc.k}, {sc.T}};
    BatchKernel kernel(grid);
    const std::uint64_t key = rng();
    const double s = std::sqrt(moments.variance);
    const double dT = moments.mean - mu_T;
    const double dR = moments.mean - mu_R;
    std::vector<double> z(kernel.k_max());
    Eigen::VectorXd batches(n_inner);
    double out = 0.0;
    for (int j = 0; j < n_inner; ++j) {
        fill_normals(key, key, static_cast<std::uint64_t>(j), z);
        kernel.evaluate(z, dT, dR, s, std::span<double>(&out, 1));
        batches(j) = out;
    }
    return mean_stderr(batches);
}

SweepResult::SweepResult(SweepGrid grid, Eigen::MatrixXd per_point, int n_inner, EstimateMode mode)
    : grid_(std::move(grid)), per_point_(std::move(per_point)), n_inner_(n_inner), mode_(mode) {}

ErrorEstimate SweepResult::estimate(std::size_t k_index, std::size_t t_index) const {
    const MeanStderr ms = mean_stderr(per_point_.col(static_cast<Eigen::Index>(grid_.cell(k_index, t_index))));
    ErrorEstimate e;
    e.mean = ms.mean;
    e.std_error = ms.std_error;
    e.n_outer = per_point_.rows();
    e.n_inner = n_inner_;
    e.mode = mode_;
    return e;
}

MeanStderr SweepResult::difference(std::size_t cell_a, std::size_t cell_b) const {
    const Eigen::VectorXd diff = per_point_.col(static_cast<Eigen::Index>(cell_b)) -
                                 per_point_.col(static_cast<Eigen::Index>(cell_a));
    return mean_stderr(diff);
}

SweepResult sweep_delta(std::span<const TestPoint> points, const SweepGrid& grid, int n_inner, std::uint64_t seed,
                        unsigned threads, EstimateMode mode) {
    grid.validate();
    if (n_inner < 1) throw std::invalid_argument("sweep_delta: n_inner must be >= 1");
    if (points.empty()) throw std::invalid_argument("sweep_delta: no test points");
    const std::size_t cells = grid.cells();
    Eigen::MatrixXd per_point(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(cells));

    parallel_for_chunks(points.size(), kPointChunk, threads, [&](std::size_t begin, std::size_t end) {
        BatchKernel kernel(grid);
        std::vector<double> z(kernel.k_max());
        std::vector<double> batch(cells);
        std::vector<double> acc(cells);
        for (std::size_t p = begin; p < end; ++p) {
            const TestPoint& tp = points[p];
            if (!(tp.moments.variance >= 0)) throw std::invalid_argument("sweep_delta: negative variance");
            const double s = std::sqrt(tp.moments.variance);
            const double dT = tp.delta_T();
            const double dR = tp.delta_R();
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int j = 0; j < n_inner; ++j) {
                fill_normals(seed, tp.key, static_cast<std::uint64_t>(j), z);
                kernel.evaluate(z, dT, dR, s, batch);
                for (std::size_t c = 0; c < cells; ++c) acc[c] += batch[c];
            }
            for (std::size_t c = 0; c < cells; ++c) {
                per_point(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(c)) = acc[c] / n_inner;
            }
        }
    });
    return SweepResult(grid, std::move(per_point), n_inner, mode);
}

double Scenario::ridge() const noexcept {
    if (de) return de->R;
    return std::numeric_limits<double>::infinity();
}

PredictiveMoments Scenario::moments(const Eigen::Ref<const Eigen::VectorXd>& x, MomentMode mode) const {
    if (mode == MomentMode::exact_posterior) {
        if (!posterior) throw std::logic_error("Scenario: exact moments requested without a posterior");
        return predictive_moments(*posterior, x);
    }
    if (!de) throw std::logic_error("Scenario: deterministic-equivalent moments requested without a ridge");
    return de_moments(x, teacher, *de, config);
}

Scenario make_scenario(const ModelConfig& config, MomentMode mode, std::uint64_t seed, std::uint64_t replicate) {
    config.validate();
    Scenario sc;
    sc.config = config;
    sc.replicate = replicate;
    SplitMix64 teacher_rng = make_stream(seed, stream::kTeacher, {replicate});
    sc.teacher = sample_teacher(config, teacher_rng);

    const bool ridge_defined = config.n > 0 && !(config.sigma == 0.0 && config.alpha() >= 1.0);
    if (ridge_defined) sc.de = solve_ridge(config);
    if (mode == MomentMode::det_equiv && !sc.de) {
        throw std::invalid_argument("det_equiv moments need n > 0 and a well-posed ridge");
    }
    if (mode == MomentMode::exact_posterior) {
        SplitMix64 data_rng = make_stream(seed, stream::kData, {replicate});
        const Dataset data = generate_dataset(config, sc.teacher, data_rng);
        sc.posterior = fit_posterior(data, config);
    }
    return sc;
}

TestPoints draw_test_points(const Scenario& scenario, MomentMode mode, int n_outer, std::uint64_t seed,
                            unsigned threads) {
    if (n_outer < 1) throw std::invalid_argument("draw_test_points: n_outer must be >= 1");
    const int d = scenario.config.d;
    TestPoints tp;
    tp.inputs.resize(n_outer, d);
    tp.moments.resize(static_cast<std::size_t>(n_outer));
    tp.mu_T.resize(static_cast<std::size_t>(n_outer));
    tp.keys.resize(static_cast<std::size_t>(n_outer));
    parallel_for_chunks(static_cast<std::size_t>(n_outer), 64, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            SplitMix64 rng = make_stream(seed, stream::kTestPoints, {scenario.replicate, i});
            const Eigen::VectorXd x = sample_input(d, scenario.config.S, rng);
            tp.inputs.row(static_cast<Eigen::Index>(i)) = x.transpose();
            tp.moments[i] = scenario.moments(x, mode);
            tp.mu_T[i] = scenario.teacher.project(x);
            tp.keys[i] = (scenario.replicate << 32) | static_cast<std::uint64_t>(i);
        }
    });
    return tp;
}

std::vector<TestPoint> bind_reward(const TestPoints& points, const WeightVector& reward) {
    if (reward.size() != points.inputs.cols()) throw std::invalid_argument("bind_reward: dimension mismatch");
    std::vector<TestPoint> out(points.size());
    const Eigen::VectorXd mu_R = points.inputs * reward.values() / std::sqrt(double(reward.size()));
    for (std::size_t i = 0; i < points.size(); ++i) {
        out[i] = TestPoint{points.moments[i], points.mu_T[i], mu_R(static_cast<Eigen::Index>(i)), points.keys[i]};
    }
    return out;
}

Experiment::Experiment(ModelConfig config, MomentMode mode, int n_outer, int n_datasets, std::uint64_t seed,
                       unsigned threads)
    : config_(std::move(config)), mode_(mode), seed_(seed), threads_(threads) {
    if (n_datasets < 1) throw std::invalid_argument("Experiment: n_datasets must be >= 1");
    for (int r = 0; r < n_datasets; ++r) {
        scenarios_.push_back(make_scenario(config_, mode_, seed_, static_cast<std::uint64_t>(r)));
        points_.push_back(draw_test_points(scenarios_.back(), mode_, n_outer, seed_, threads_));
    }
}

std::size_t Experiment::n_points() const noexcept {
    std::size_t n = 0;
    for (const auto& p : points_) n += p.size();
    return n;
}

std::vector<TestPoint> Experiment::bind(const RewardSpec& reward) const {
    std::vector<TestPoint> out;
    out.reserve(n_points());
    for (std::size_t r = 0; r < scenarios_.size(); ++r) {
        const Scenario& sc = scenarios_[r];
        const WeightVector w_R = resolve_reward(reward, sc.teacher, sc.ridge(), config_.S);
        auto bound = bind_reward(points_[r], w_R);
        out.insert(out.end(), bound.begin(), bound.end());
    }
    return out;
}

SweepResult Experiment::sweep(const RewardSpec& reward, const SweepGrid& grid, int n_inner) const {
    const auto points = bind(reward);
    return sweep_delta(points, grid, n_inner, seed_, threads_, estimate_mode(mode_));
}

ErrorEstimate delta(const ModelConfig& config, const RewardSpec& reward, const SamplerConfig& sc, int n_outer,
                    int n_inner, MomentMode mode, std::uint64_t seed, unsigned threads, int n_datasets) {
    sc.validate();
    const Experiment exp(config, mode, n_outer, n_datasets, seed, threads);
    const SweepGrid grid{{sc.k}, {sc.T}};
    return exp.sweep(reward, grid, n_inner).estimate(0, 0);
}

CurveClassification classify_k_curve(const SweepResult& sweep, std::size_t t_index, double z_threshold) {
    const SweepGrid& g = sweep.grid();
    const std::size_t nk = g.ks.size();
    CurveClassification out;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nk; ++i) {
        const double v = sweep.estimate(i, t_index).mean;
        if (v < best) {
            best = v;
            out.argmin = i;
        }
    }
    out.max_rise_z = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < nk; ++i) {
        for (std::size_t j = i + 1; j < nk; ++j) {
            const MeanStderr diff = sweep.difference(g.cell(i, t_index), g.cell(j, t_index));
            double z = 0.0;
            if (diff.std_error > 0) z = diff.mean / diff.std_error;
            else if (diff.mean > 0) z = std::numeric_limits<double>::infinity();
            else if (diff.mean < 0) z = -std::numeric_limits<double>::infinity();
            out.max_rise_z = std::max(out.max_rise_z, z);
        }
    }
    if (nk < 3) out.max_rise_z = 0.0;
    out.shape = out.max_rise_z >= z_threshold ? CurveShape::non_monotone : CurveShape::monotone;
    return out;
}

namespace {

std::vector<std::size_t> tied_with_min(const SweepResult& sweep, const std::vector<std::size_t>& cells,
                                       double z_threshold) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < cells.size(); ++i) {
        const auto& pp = sweep.per_point();
        if (pp.col(Eigen::Index(cells[i])).mean() < pp.col(Eigen::Index(cells[best])).mean()) best = i;
    }
    std::vector<std::size_t> tied;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const MeanStderr diff = sweep.difference(cells[best], cells[i]);
        if (i == best || diff.mean <= z_threshold * diff.std_error) tied.push_back(i);
    }
    return tied;
}

}  // namespace

std::vector<std::size_t> tied_argmin_k(const SweepResult& sweep, std::size_t t_index, double z_threshold) {
    std::vector<std::size_t> cells;
    for (std::size_t i = 0; i < sweep.grid().ks.size(); ++i) cells.push_back(sweep.grid().cell(i, t_index));
    return tied_with_min(sweep, cells, z_threshold);
}

std::vector<std::size_t> tied_argmin_t(const SweepResult& sweep, std::size_t k_index, double z_threshold) {
    std::vector<std::size_t> cells;
    for (std::size_t i = 0; i < sweep.grid().temperatures.size(); ++i) cells.push_back(sweep.grid().cell(k_index, i));
    return tied_with_min(sweep, cells, z_threshold);
}

}  // namespace itscale
