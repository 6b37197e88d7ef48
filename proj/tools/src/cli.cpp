#include "itscale_cli/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "itscale/config_file.hpp"
#include "itscale/csv.hpp"
#include "itscale/det_equiv.hpp"
#include "itscale/evt.hpp"
#include "itscale/gen_error.hpp"
#include "itscale/judge.hpp"
#include "itscale/theory.hpp"

#ifndef ITSCALE_VERSION
#define ITSCALE_VERSION "0.0.0"
#endif

namespace itscale::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

double parse_double(std::string_view text) {
    std::string s(text);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw UsageError("not a number: '" + s + "'");
    }
    if (used != s.size()) throw UsageError("not a number: '" + s + "'");
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace

std::vector<double> parse_grid(std::string_view spec) {
    if (spec.empty()) throw UsageError("empty grid");
    const auto parts = split(spec, ':');
    std::vector<double> out;
    if (parts.size() == 1) {
        for (auto item : split(spec, ',')) out.push_back(parse_double(item));
        return out;
    }
    const std::string kind(parts[0]);
    if (kind == "circle") {
        if (parts.size() != 2) throw UsageError("grid 'circle:n' takes one argument");
        const int n = static_cast<int>(parse_double(parts[1]));
        if (n < 1) throw UsageError("circle grid needs n >= 1");
        for (int j = 0; j < n; ++j) out.push_back(2.0 * std::numbers::pi * j / n);
        return out;
    }
    if (kind != "lin" && kind != "log") throw UsageError("unknown grid kind '" + kind + "'");
    if (parts.size() != 4) throw UsageError("grid '" + kind + ":a:b:n' takes three arguments");
    const double a = parse_double(parts[1]);
    const double b = parse_double(parts[2]);
    const int n = static_cast<int>(parse_double(parts[3]));
    if (n < 1) throw UsageError("grid needs n >= 1");
    if (kind == "log" && !(a > 0 && b > 0)) throw UsageError("log grid needs positive endpoints");
    for (int j = 0; j < n; ++j) {
        const double f = n == 1 ? 0.0 : static_cast<double>(j) / (n - 1);
        out.push_back(kind == "lin" ? a + f * (b - a) : a * std::pow(b / a, f));
    }
    return out;
}

std::vector<int> parse_int_grid(std::string_view spec) {
    std::set<int> values;
    for (double v : parse_grid(spec)) {
        const double r = std::round(v);
        if (!(r >= 1) || r > 1e9) throw UsageError("integer grid values must be in [1, 1e9]");
        values.insert(static_cast<int>(r));
    }
    return {values.begin(), values.end()};
}

namespace {

struct Options {
    std::string config_path;
    std::uint64_t seed = 1;
    std::string out;
    int n_outer = 2000;
    int n_inner = 200;
    std::string mode = "exact";
    unsigned threads = 0;
    int n_datasets = 1;
    std::map<std::string, std::string> overrides;

    std::string k_grid;
    std::string t_grid;
    std::string c_grid;
    std::string theta_grid;
    std::string n_grid;
    double z_threshold = 3.0;

    std::vector<std::string> records;
    int n_resample = 100;
    bool accuracy = false;
};

struct Context {
    std::string command;
    Options opt;
    ModelConfig config;
    MomentMode mode = MomentMode::exact_posterior;
    json extra = json::object();
};

EstimateMode estimate_mode(MomentMode m) {
    return m == MomentMode::exact_posterior ? EstimateMode::exact_posterior : EstimateMode::det_equiv;
}

ModelConfig resolve_config(const Options& opt) {
    ModelConfig cfg;
    try {
        if (!opt.config_path.empty()) cfg = load_model_config(opt.config_path, cfg);
        for (const auto& [key, value] : opt.overrides) apply_model_setting(cfg, key, value);
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return cfg;
}

std::vector<std::string> base_header() {
    return {"mode", "d", "n", "S", "sigma", "gamma", "k", "T", "c", "theta", "delta", "stderr", "n_outer", "n_inner", "n_datasets", "seed"};
}

std::vector<std::string> with_extra(std::vector<std::string> h, std::initializer_list<const char*> extra) {
    for (const char* e : extra) h.emplace_back(e);
    return h;
}

std::vector<CsvField> base_row(const Context& ctx, const ErrorEstimate& est, int k, double T, double c, double theta) {
    const ModelConfig& m = ctx.config;
    return {std::string(to_string(est.mode)),
            std::int64_t{m.d},
            std::int64_t{m.n},
            m.S,
            m.sigma,
            m.gamma,
            std::int64_t{k},
            T,
            c,
            theta,
            est.mean,
            est.std_error,
            est.n_outer,
            est.n_inner,
            std::int64_t{ctx.opt.n_datasets},
            static_cast<std::int64_t>(ctx.opt.seed)};
}

void append(std::vector<CsvField>& row, std::initializer_list<CsvField> extra) {
    row.insert(row.end(), extra.begin(), extra.end());
}

CsvField optional_int(std::optional<int> v) {
    if (v) return std::int64_t{*v};
    return std::string("none");
}

double sigma2(const Context& ctx) { return ctx.config.sigma * ctx.config.sigma; }

std::vector<double> temperatures(const Context& ctx, const std::string& spec) {
    std::vector<double> Ts;
    for (double t : parse_grid(spec)) {
        if (!(t >= 0)) throw UsageError("temperatures must be >= 0");
        Ts.push_back(t * sigma2(ctx));
    }
    return Ts;
}

void require_sigma(const Context& ctx) {
    if (!(ctx.config.sigma > 0)) throw UsageError("this command measures T in units of sigma^2 and needs sigma > 0");
}

Experiment make_experiment(const Context& ctx) {
    return Experiment(ctx.config, ctx.mode, ctx.opt.n_outer, ctx.opt.n_datasets, ctx.opt.seed, ctx.opt.threads);
}

// ---------------------------------------------------------------------------

void cmd_ridge(Context& ctx, std::ostream& csv) {
    if (ctx.config.n < 1) throw UsageError("ridge needs n >= 1");
    const DetEquiv de = solve_ridge(ctx.config);
    CsvWriter w(csv, {"d", "n", "S", "sigma", "gamma", "alpha", "R_hat", "R", "A", "B", "m1", "m2", "var_z",
                      "sigma_c", "valid", "validity_factor"});
    std::vector<CsvField> row{std::int64_t{ctx.config.d}, std::int64_t{ctx.config.n}, ctx.config.S, ctx.config.sigma,
                              ctx.config.gamma, de.alpha, de.R_hat, de.R, de.A, de.B, de.m1, de.m2};
    try {
        const NoiseVarianceCheck nc = noise_variance_check(de, ctx.config.sigma);
        append(row, {nc.var_z, nc.sigma_c, std::int64_t{nc.valid ? 1 : 0}, nc.factor});
    } catch (const std::domain_error&) {
        const double inf = std::numeric_limits<double>::infinity();
        append(row, {inf, 0.0, std::int64_t{0}, kNoiseValidityFactor});
    }
    w.row(row);
    ctx.extra["noise_validity_factor"] = kNoiseValidityFactor;
}

void cmd_sweep_k(Context& ctx, std::ostream& csv) {
    require_sigma(ctx);
    const SweepGrid grid{parse_int_grid(ctx.opt.k_grid), temperatures(ctx, ctx.opt.t_grid)};
    grid.validate();
    const auto cs = parse_grid(ctx.opt.c_grid);
    const Experiment exp = make_experiment(ctx);
    CsvWriter w(csv, with_extra(base_header(), {"theory_highT", "theory_bestofk", "t_mean", "series_valid", "k_opt",
                                                "shape", "max_rise_z"}));
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (double c : cs) {
        const auto points = exp.bind(RewardSpec::radial(c));
        const SweepResult sweep =
            sweep_delta(points, grid, ctx.opt.n_inner, ctx.opt.seed, ctx.opt.threads, estimate_mode(ctx.mode));
        const CoefficientSet coeffs = average_coefficients(points);
        for (std::size_t ti = 0; ti < grid.temperatures.size(); ++ti) {
            const double T = grid.temperatures[ti];
            const CurveClassification cls = classify_k_curve(sweep, ti, ctx.opt.z_threshold);
            for (std::size_t ki = 0; ki < grid.ks.size(); ++ki) {
                const int k = grid.ks[ki];
                auto row = base_row(ctx, sweep.estimate(ki, ti), k, T, c, 0.0);
                const double high = T > 0 ? high_t_delta(points, T, k) : nan;
                const double bok = (T == 0 && c == 0) ? best_of_k_delta(points, k) : nan;
                const double t_mean = coeffs.t(T);
                append(row, {high, bok, t_mean, std::int64_t{t_mean >= kSeriesValidT ? 1 : 0},
                             optional_int(T > 0 ? coeffs.optimal_k(T) : std::nullopt),
                             std::string(to_string(cls.shape)), cls.max_rise_z});
                w.row(row);
            }
        }
    }
}

void cmd_sweep_t(Context& ctx, std::ostream& csv) {
    require_sigma(ctx);
    const SweepGrid grid{parse_int_grid(ctx.opt.k_grid), temperatures(ctx, ctx.opt.t_grid)};
    grid.validate();
    const auto cs = parse_grid(ctx.opt.c_grid);
    const Experiment exp = make_experiment(ctx);
    CsvWriter w(csv, with_extra(base_header(), {"theory_highT", "T_opt", "t_mean", "is_argmin"}));
    for (double c : cs) {
        const auto points = exp.bind(RewardSpec::radial(c));
        const SweepResult sweep =
            sweep_delta(points, grid, ctx.opt.n_inner, ctx.opt.seed, ctx.opt.threads, estimate_mode(ctx.mode));
        const CoefficientSet coeffs = average_coefficients(points);
        for (std::size_t ki = 0; ki < grid.ks.size(); ++ki) {
            const int k = grid.ks[ki];
            double T_opt = std::numeric_limits<double>::quiet_NaN();
            if (k > 2 && coeffs.C[0] > 0 && coeffs.C[1] > 0) T_opt = coeffs.optimal_temperature(k);
            std::size_t argmin = 0;
            for (std::size_t ti = 1; ti < grid.temperatures.size(); ++ti) {
                if (sweep.estimate(ki, ti).mean < sweep.estimate(ki, argmin).mean) argmin = ti;
            }
            for (std::size_t ti = 0; ti < grid.temperatures.size(); ++ti) {
                const double T = grid.temperatures[ti];
                auto row = base_row(ctx, sweep.estimate(ki, ti), k, T, c, 0.0);
                const double high = T > 0 ? high_t_delta(points, T, k) : std::numeric_limits<double>::quiet_NaN();
                append(row, {high, T_opt, coeffs.t(T), std::int64_t{ti == argmin ? 1 : 0}});
                w.row(row);
            }
        }
    }
}

void cmd_sweep_c(Context& ctx, std::ostream& csv) {
    require_sigma(ctx);
    const SweepGrid grid{parse_int_grid(ctx.opt.k_grid), temperatures(ctx, ctx.opt.t_grid)};
    grid.validate();
    const auto cs = parse_grid(ctx.opt.c_grid);
    const Experiment exp = make_experiment(ctx);
    CsvWriter w(csv, with_extra(base_header(), {"c_opt", "c_ref"}));
    // Predictive variances do not depend on the reward, so t is shared by every c.
    const CoefficientSet coeffs = average_coefficients(exp.bind(RewardSpec::aligned()));
    std::vector<SweepResult> sweeps;
    for (double c : cs) {
        const auto points = exp.bind(RewardSpec::radial(c));
        sweeps.push_back(
            sweep_delta(points, grid, ctx.opt.n_inner, ctx.opt.seed, ctx.opt.threads, estimate_mode(ctx.mode)));
    }
    for (std::size_t ti = 0; ti < grid.temperatures.size(); ++ti) {
        const double T = grid.temperatures[ti];
        for (std::size_t ki = 0; ki < grid.ks.size(); ++ki) {
            const int k = grid.ks[ki];
            const double c_opt = k > 2 ? optimal_reward_c(k, coeffs.t(T)) : std::numeric_limits<double>::quiet_NaN();
            const double c_ref = T / (2.0 * sigma2(ctx));
            for (std::size_t ci = 0; ci < cs.size(); ++ci) {
                auto row = base_row(ctx, sweeps[ci].estimate(ki, ti), k, T, cs[ci], 0.0);
                append(row, {c_opt, c_ref});
                w.row(row);
            }
        }
    }
}

void cmd_polar_map(Context& ctx, std::ostream& csv) {
    require_sigma(ctx);
    if (ctx.config.d != 2) throw UsageError("polar-map needs d = 2");
    const SweepGrid grid{parse_int_grid(ctx.opt.k_grid), temperatures(ctx, ctx.opt.t_grid)};
    grid.validate();
    if (grid.ks.size() < 3) throw UsageError("polar-map needs at least three k values");
    const auto cs = parse_grid(ctx.opt.c_grid);
    const auto thetas = parse_grid(ctx.opt.theta_grid);
    const Experiment exp = make_experiment(ctx);
    CsvWriter w(csv, {"mode", "d", "n", "S", "sigma", "gamma", "T", "c", "theta", "label", "argmin_k", "max_rise_z",
                      "n_outer", "n_inner", "n_datasets", "seed"});
    std::vector<std::vector<CsvField>> rows(grid.temperatures.size() * cs.size() * thetas.size());
    std::size_t cell = 0;
    for (double c : cs) {
        for (double theta : thetas) {
            const auto points = exp.bind(RewardSpec::polar(c, theta));
            const SweepResult sweep =
                sweep_delta(points, grid, ctx.opt.n_inner, ctx.opt.seed, ctx.opt.threads, estimate_mode(ctx.mode));
            for (std::size_t ti = 0; ti < grid.temperatures.size(); ++ti) {
                const CurveClassification cls = classify_k_curve(sweep, ti, ctx.opt.z_threshold);
                const ModelConfig& m = ctx.config;
                rows[ti * cs.size() * thetas.size() + cell] = {
                    std::string(to_string(estimate_mode(ctx.mode))), std::int64_t{m.d}, std::int64_t{m.n}, m.S,
                    m.sigma, m.gamma, grid.temperatures[ti], c, theta, std::string(to_string(cls.shape)),
                    std::int64_t{grid.ks[cls.argmin]}, cls.max_rise_z, static_cast<std::int64_t>(points.size()),
                    std::int64_t{ctx.opt.n_inner}, std::int64_t{ctx.opt.n_datasets},
                    static_cast<std::int64_t>(ctx.opt.seed)};
            }
            ++cell;
        }
    }
    for (const auto& r : rows) w.row(r);
    ctx.extra["z_threshold"] = ctx.opt.z_threshold;
}

void cmd_tradeoff(Context& ctx, std::ostream& csv) {
    require_sigma(ctx);
    const auto ns = parse_int_grid(ctx.opt.n_grid);
    const SweepGrid grid{parse_int_grid(ctx.opt.k_grid), temperatures(ctx, ctx.opt.t_grid)};
    grid.validate();
    CsvWriter w(csv, with_extra(base_header(), {"theory_refined", "dlogk", "dlogn", "dlogn_closed", "regime_ok"}));
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const ModelConfig base = ctx.config;
    for (int n : ns) {
        ctx.config = base;
        ctx.config.n = n;
        const Experiment exp = make_experiment(ctx);
        const auto points = exp.bind(RewardSpec::aligned());
        const SweepResult sweep =
            sweep_delta(points, grid, ctx.opt.n_inner, ctx.opt.seed, ctx.opt.threads, estimate_mode(ctx.mode));
        // Theory columns average over the teacher replicates.
        double refined_unit = 0.0, dlogn = 0.0, dlogn_closed = 0.0;
        bool regime_ok = true;
        bool defined = true;
        for (const Scenario& sc : exp.scenarios()) {
            if (!sc.de) {
                defined = false;
                break;
            }
            try {
                refined_unit += refined_best_of_k_delta(ctx.config, *sc.de, sc.teacher, 1).delta;
                const ScalingDerivatives sd = scaling_derivatives(ctx.config, *sc.de, sc.teacher);
                dlogn += sd.dlogn;
                regime_ok = regime_ok && sd.regime_ok;
                dlogn_closed += dlogn_closed_form(ctx.config, sc.teacher);
            } catch (const std::domain_error&) {
                defined = false;
                break;
            }
        }
        const double r = static_cast<double>(exp.scenarios().size());
        for (std::size_t ti = 0; ti < grid.temperatures.size(); ++ti) {
            for (std::size_t ki = 0; ki < grid.ks.size(); ++ki) {
                const int k = grid.ks[ki];
                const double T = grid.temperatures[ti];
                auto row = base_row(ctx, sweep.estimate(ki, ti), k, T, 0.0, 0.0);
                const double kk = static_cast<double>(k);
                append(row, {defined && T == 0 ? refined_unit / r / (kk * kk) : nan, -2.0, defined ? dlogn / r : nan,
                             defined ? dlogn_closed / r : nan, std::int64_t{defined && regime_ok ? 1 : 0}});
                w.row(row);
            }
        }
    }
    ctx.config = base;
}

void cmd_bestofk_check(Context& ctx, std::ostream& csv) {
    require_sigma(ctx);
    const SweepGrid grid{parse_int_grid(ctx.opt.k_grid), {0.0}};
    grid.validate();
    const Experiment exp = make_experiment(ctx);
    const auto points = exp.bind(RewardSpec::aligned());
    const SweepResult sweep =
        sweep_delta(points, grid, ctx.opt.n_inner, ctx.opt.seed, ctx.opt.threads, estimate_mode(ctx.mode));
    double refined_unit = std::numeric_limits<double>::quiet_NaN();
    try {
        double sum = 0.0;
        for (const Scenario& sc : exp.scenarios()) {
            if (!sc.de) throw std::domain_error("no ridge");
            sum += refined_best_of_k_delta(ctx.config, *sc.de, sc.teacher, 1).delta;
        }
        refined_unit = sum / static_cast<double>(exp.scenarios().size());
    } catch (const std::domain_error&) {
    }
    CsvWriter w(csv, with_extra(base_header(), {"k2_delta", "k2_theory_pointwise", "k2_theory_refined",
                                                "weibull_gap_ratio"}));
    for (std::size_t ki = 0; ki < grid.ks.size(); ++ki) {
        const int k = grid.ks[ki];
        const double kk = static_cast<double>(k);
        const ErrorEstimate est = sweep.estimate(ki, 0);
        auto row = base_row(ctx, est, k, 0.0, 0.0, 0.0);
        const double gap_ratio =
            k > 1 ? quantile_gap(0.0, k) / weibull_norming(0.0, k) : std::numeric_limits<double>::quiet_NaN();
        append(row, {kk * kk * est.mean, kk * kk * best_of_k_delta(points, k), refined_unit, gap_ratio});
        w.row(row);
    }
}

void cmd_judge(Context& ctx, std::ostream& csv) {
    if (ctx.opt.records.empty()) throw UsageError("judge needs --records <file>");
    const SweepGrid grid{parse_int_grid(ctx.opt.k_grid), parse_grid(ctx.opt.t_grid)};
    try {
        grid.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    CsvWriter w(csv, {"source", "k", "T", ctx.opt.accuracy ? "accuracy" : "delta", "stderr", "n_questions_used",
                      "n_questions_excluded", "n_resample", "seed"});
    json sources = json::array();
    for (const std::string& path : ctx.opt.records) {
        const JudgeDataset ds = load_records(path);
        const JudgeSweep js = judge_sweep(ds, grid, ctx.opt.n_resample, ctx.opt.seed, ctx.opt.threads);
        const std::string source = fs::path(path).filename().string();
        sources.push_back({{"path", path}, {"questions", ds.size()}, {"records", ds.n_records()}});
        for (std::size_t ti = 0; ti < grid.temperatures.size(); ++ti) {
            for (std::size_t ki = 0; ki < grid.ks.size(); ++ki) {
                const ErrorEstimate est = js.sweep.estimate(ki, ti);
                w.row({source, std::int64_t{grid.ks[ki]}, grid.temperatures[ti],
                       ctx.opt.accuracy ? -est.mean : est.mean, est.std_error,
                       static_cast<std::int64_t>(js.n_used), static_cast<std::int64_t>(js.n_excluded),
                       std::int64_t{ctx.opt.n_resample}, static_cast<std::int64_t>(ctx.opt.seed)});
            }
        }
    }
    ctx.extra["records"] = sources;
}

// ---------------------------------------------------------------------------

fs::path output_path(const Context& ctx) {
    if (!ctx.opt.out.empty()) return ctx.opt.out;
    const char* dir = std::getenv(kOutDirEnv);
    return fs::path(dir && *dir ? dir : ".") / (ctx.command + ".csv");
}

json manifest(const Context& ctx, const std::string& output, double wall_time) {
    const ModelConfig& m = ctx.config;
    json flags = {{"n_outer", ctx.opt.n_outer},   {"n_inner", ctx.opt.n_inner},     {"mode", ctx.opt.mode},
                  {"threads", ctx.opt.threads},   {"n_datasets", ctx.opt.n_datasets}, {"k_grid", ctx.opt.k_grid},
                  {"t_grid", ctx.opt.t_grid},     {"c_grid", ctx.opt.c_grid},       {"theta_grid", ctx.opt.theta_grid},
                  {"n_grid", ctx.opt.n_grid},     {"n_resample", ctx.opt.n_resample}, {"accuracy", ctx.opt.accuracy},
                  {"config_file", ctx.opt.config_path}};
    return {{"command", ctx.command},
            {"version", ITSCALE_VERSION},
            {"seed", ctx.opt.seed},
            {"output", output},
            {"wall_time_s", wall_time},
            {"config",
             {{"d", m.d}, {"n", m.n}, {"S", m.S}, {"sigma", m.sigma}, {"gamma", m.gamma}, {"tau", m.tau},
              {"teacher_mode", std::string(to_string(m.teacher_mode))}}},
            {"flags", flags},
            {"details", ctx.extra}};
}

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("--config", o.config_path, "Model config file (key = value lines)");
    sub->add_option("--seed", o.seed, "Master seed");
    sub->add_option("--out", o.out, "Output CSV path, '-' for stdout");
    sub->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
}

void add_model(CLI::App* sub, Options& o) {
    for (const char* key : {"d", "n", "S", "sigma", "gamma", "tau"}) {
        sub->add_option_function<std::string>(
            std::string("--") + key, [&o, key](const std::string& v) { o.overrides[key] = v; },
            std::string("Override model setting ") + key);
    }
    sub->add_option_function<std::string>(
        "--teacher-mode", [&o](const std::string& v) { o.overrides["teacher_mode"] = v; },
        "sampled or normalized");
}

void add_mc(CLI::App* sub, Options& o) {
    sub->add_option("--n-outer", o.n_outer, "Test points per teacher replicate")->check(CLI::PositiveNumber);
    sub->add_option("--n-inner", o.n_inner, "Batches of k candidates per test point")->check(CLI::PositiveNumber);
    sub->add_option("--mode", o.mode, "Predictive moments: exact or de")->check(CLI::IsMember({"exact", "de"}));
    sub->add_option("--n-datasets", o.n_datasets, "Teacher and dataset replicates")->check(CLI::PositiveNumber);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Inference-time scaling laboratory: reward-weighted sampling on Bayesian linear regression"};
    app.require_subcommand(1);
    Options o;

    struct Command {
        const char* name;
        const char* help;
        void (*fn)(Context&, std::ostream&);
        const char* k_grid;
        const char* t_grid;
        const char* c_grid;
    };
    const std::vector<Command> commands = {
        {"ridge", "Renormalised ridge and derived scalars", cmd_ridge, "", "", ""},
        {"sweep-k", "delta versus k at fixed T for a c-grid", cmd_sweep_k, "1,2,5,10,20,50,100", "20", "0"},
        {"sweep-t", "delta versus T at fixed k with the optimal-T marker", cmd_sweep_t, "50", "log:1:10000:30", "0"},
        {"sweep-c", "delta versus the reward misalignment c", cmd_sweep_c, "50", "20", "lin:-10:30:21"},
        {"polar-map", "Monotone / non-monotone labels of delta(k) over a polar reward grid", cmd_polar_map,
         "log:1:1000:13", "20", "lin:0.0001:0.0008:8"},
        {"tradeoff", "delta over (n, k) with scaling derivatives", cmd_tradeoff, "100,1000,10000", "0", ""},
        {"bestofk-check", "k^2 delta versus k against the best-of-k asymptote", cmd_bestofk_check, "10,100,1000", "",
         ""},
        {"judge", "Reward-weighted accuracy metric on judge-scored records", cmd_judge, "1,2,4,8,16", "0", ""},
    };
    std::map<CLI::App*, const Command*> by_app;
    for (const Command& c : commands) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        by_app[sub] = &c;
        add_common(sub, o);
        const std::string name = c.name;
        if (name != "judge") add_model(sub, o);
        if (name != "ridge" && name != "judge") add_mc(sub, o);
        if (name != "ridge") sub->add_option("--k-grid", o.k_grid, "k values")->default_str(c.k_grid);
        if (name != "ridge" && name != "bestofk-check") {
            sub->add_option("--t-grid", o.t_grid,
                            name == "judge" ? "Temperatures" : "Temperatures in units of sigma^2")
                ->default_str(c.t_grid);
        }
        if (name == "sweep-k" || name == "sweep-t" || name == "sweep-c" || name == "polar-map") {
            sub->add_option("--c-grid", o.c_grid, "Reward misalignment values")->default_str(c.c_grid);
        }
        if (name == "polar-map") {
            sub->add_option("--theta-grid", o.theta_grid, "Reward angles in radians")->default_str("circle:8");
        }
        if (name == "polar-map" || name == "sweep-k") {
            sub->add_option("--z-threshold", o.z_threshold, "Paired z-score needed to call a rise in delta(k)");
        }
        if (name == "tradeoff") sub->add_option("--n-grid", o.n_grid, "Training set sizes")->default_str("1000,10000,100000");
        if (name == "judge") {
            sub->add_option("--records", o.records, "JSONL record file (repeatable)");
            sub->add_option("--n-resample", o.n_resample, "Subsets per question")->check(CLI::PositiveNumber);
            sub->add_flag("--accuracy", o.accuracy, "Report -delta (mean accuracy)");
        }
    }

    std::vector<char*> argv;
    std::vector<std::string> storage(args);
    if (storage.empty()) storage.emplace_back("itscale");
    for (auto& s : storage) argv.push_back(s.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    Context ctx;
    const Command* cmd = nullptr;
    for (const auto& [sub, c] : by_app) {
        if (sub->parsed()) cmd = c;
    }
    ctx.command = cmd->name;
    const auto start = std::chrono::steady_clock::now();
    try {
        ctx.opt = o;
        if (ctx.opt.k_grid.empty()) ctx.opt.k_grid = cmd->k_grid;
        if (ctx.opt.t_grid.empty()) ctx.opt.t_grid = cmd->t_grid;
        if (ctx.opt.c_grid.empty()) ctx.opt.c_grid = cmd->c_grid;
        if (ctx.opt.theta_grid.empty()) ctx.opt.theta_grid = "circle:8";
        if (ctx.opt.n_grid.empty()) ctx.opt.n_grid = "1000,10000,100000";
        if (ctx.command == "polar-map" && !ctx.opt.overrides.count("d")) ctx.opt.overrides["d"] = "2";
        ctx.config = resolve_config(ctx.opt);
        ctx.mode = parse_moment_mode(ctx.opt.mode);

        std::ostringstream csv;
        cmd->fn(ctx, csv);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        if (ctx.opt.out == "-") {
            out << csv.str();
            err << manifest(ctx, "-", wall).dump(2) << '\n';
        } else {
            const fs::path path = output_path(ctx);
            if (path.has_parent_path()) fs::create_directories(path.parent_path());
            std::ofstream f(path, std::ios::binary);
            if (!f) throw std::runtime_error("cannot write " + path.string());
            f << csv.str();
            std::ofstream mf(path.string() + ".manifest.json", std::ios::binary);
            if (!mf) throw std::runtime_error("cannot write manifest for " + path.string());
            mf << manifest(ctx, path.string(), wall).dump(2) << '\n';
            err << "wrote " << path.string() << '\n';
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\nRun with --help for usage.\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

}  // namespace itscale::cli
