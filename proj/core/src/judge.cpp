#include "itscale/judge.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "itscale/parallel.hpp"
#include "itscale/rng.hpp"

namespace itscale {

namespace {

std::string id_string(const nlohmann::json& v, const char* key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return v.dump();
    throw std::invalid_argument(std::string("field '") + key + "' must be a string");
}

std::string at_line(std::string_view source, std::size_t line, const std::string& msg) {
    return std::string(source) + ":" + std::to_string(line) + ": " + msg;
}

}  // namespace

JudgeDataset JudgeDataset::from_records(std::vector<JudgeRecord> records) {
    if (records.empty()) throw std::invalid_argument("no records");
    std::map<std::string, std::vector<JudgeRecord>> grouped;
    for (auto& r : records) {
        if (!std::isfinite(r.reward)) throw std::invalid_argument("non-finite reward for " + r.question_id);
        if (r.correct != 0 && r.correct != 1) throw std::invalid_argument("correct must be 0 or 1");
        grouped[r.question_id].push_back(std::move(r));
    }
    JudgeDataset ds;
    for (auto& [qid, recs] : grouped) {
        std::sort(recs.begin(), recs.end(),
                  [](const JudgeRecord& a, const JudgeRecord& b) { return a.sample_id < b.sample_id; });
        JudgeQuestion q;
        q.id = qid;
        for (std::size_t i = 0; i < recs.size(); ++i) {
            if (i > 0 && recs[i].sample_id == recs[i - 1].sample_id) {
                throw std::invalid_argument("duplicate record (" + qid + ", " + recs[i].sample_id + ")");
            }
            q.sample_ids.push_back(recs[i].sample_id);
            q.rewards.push_back(recs[i].reward);
            q.correct.push_back(recs[i].correct);
        }
        ds.questions_.push_back(std::move(q));
    }
    return ds;
}

std::size_t JudgeDataset::n_records() const noexcept {
    std::size_t n = 0;
    for (const auto& q : questions_) n += q.size();
    return n;
}

std::vector<std::size_t> JudgeDataset::counts() const {
    std::vector<std::size_t> out;
    for (const auto& q : questions_) out.push_back(q.size());
    return out;
}

JudgeDataset parse_records(std::istream& in, std::string_view source) {
    std::vector<JudgeRecord> records;
    std::set<std::pair<std::string, std::string>> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        JudgeRecord r;
        try {
            const auto j = nlohmann::json::parse(line);
            if (!j.is_object()) throw std::invalid_argument("record must be a JSON object");
            for (const char* key : {"question_id", "sample_id", "reward", "correct"}) {
                if (!j.contains(key)) throw std::invalid_argument(std::string("missing field '") + key + "'");
            }
            r.question_id = id_string(j["question_id"], "question_id");
            r.sample_id = id_string(j["sample_id"], "sample_id");
            const auto& reward = j["reward"];
            if (!reward.is_number()) throw std::invalid_argument("field 'reward' must be a number");
            r.reward = reward.get<double>();
            if (!std::isfinite(r.reward)) throw std::invalid_argument("field 'reward' must be finite");
            const auto& correct = j["correct"];
            if (correct.is_boolean()) {
                r.correct = correct.get<bool>() ? 1 : 0;
            } else if (correct.is_number_integer() && (correct.get<long long>() == 0 || correct.get<long long>() == 1)) {
                r.correct = static_cast<int>(correct.get<long long>());
            } else {
                throw std::invalid_argument("field 'correct' must be 0 or 1, got " + correct.dump());
            }
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument(at_line(source, lineno, std::string("malformed JSON: ") + e.what()));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(at_line(source, lineno, e.what()));
        }
        if (!seen.emplace(r.question_id, r.sample_id).second) {
            throw std::invalid_argument(
                at_line(source, lineno, "duplicate record (" + r.question_id + ", " + r.sample_id + ")"));
        }
        records.push_back(std::move(r));
    }
    if (records.empty()) throw std::invalid_argument(std::string(source) + ": no records");
    return JudgeDataset::from_records(std::move(records));
}

JudgeDataset load_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open record file " + path.string());
    return parse_records(in, path.string());
}

void write_records(std::ostream& out, const std::vector<JudgeRecord>& records) {
    for (const auto& r : records) {
        nlohmann::json j{{"question_id", r.question_id},
                         {"sample_id", r.sample_id},
                         {"reward", r.reward},
                         {"correct", r.correct}};
        out << j.dump() << '\n';
    }
}

JudgeSweep judge_sweep(const JudgeDataset& ds, const SweepGrid& grid, int n_resample, std::uint64_t seed,
                       unsigned threads) {
    grid.validate();
    if (n_resample < 1) throw std::invalid_argument("judge_sweep: n_resample must be >= 1");
    const std::size_t k_max = static_cast<std::size_t>(grid.ks.back());
    std::vector<std::size_t> used;
    for (std::size_t q = 0; q < ds.size(); ++q) {
        if (ds.questions()[q].size() >= k_max) used.push_back(q);
    }
    if (used.empty()) {
        throw std::invalid_argument("no question has at least k = " + std::to_string(k_max) + " samples");
    }
    const std::size_t cells = grid.cells();
    const std::size_t nk = grid.ks.size();
    Eigen::MatrixXd per_q(static_cast<Eigen::Index>(used.size()), static_cast<Eigen::Index>(cells));

    parallel_for_chunks(used.size(), 8, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<std::size_t> perm;
        std::vector<double> acc(cells);
        for (std::size_t row = begin; row < end; ++row) {
            const std::size_t q = used[row];
            const JudgeQuestion& question = ds.questions()[q];
            perm.resize(question.size());
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int rep = 0; rep < n_resample; ++rep) {
                SplitMix64 rng = make_stream(seed, stream::kJudge, {q, static_cast<std::uint64_t>(rep)});
                std::iota(perm.begin(), perm.end(), std::size_t{0});
                // Partial Fisher-Yates: only the first k_max positions are needed.
                for (std::size_t i = 0; i < k_max; ++i) {
                    std::uniform_int_distribution<std::size_t> pick(i, perm.size() - 1);
                    std::swap(perm[i], perm[pick(rng)]);
                }
                for (std::size_t ti = 0; ti < grid.temperatures.size(); ++ti) {
                    const double T = grid.temperatures[ti];
                    std::size_t next_k = 0;
                    std::size_t best = perm[0];
                    double top = -std::numeric_limits<double>::infinity();
                    double sum_w = 0.0;
                    double sum_wv = 0.0;
                    for (std::size_t i = 0; i < k_max; ++i) {
                        const std::size_t s = perm[i];
                        const double r = question.rewards[s];
                        if (T == 0.0) {
                            const double rb = question.rewards[best];
                            if (r > rb || (r == rb && s < best)) best = s;
                        } else {
                            if (r > top) {
                                const double scale = std::exp((top - r) / T);
                                sum_w *= scale;
                                sum_wv *= scale;
                                top = r;
                            }
                            const double w = std::exp((r - top) / T);
                            sum_w += w;
                            sum_wv += w * question.correct[s];
                        }
                        while (next_k < nk && static_cast<std::size_t>(grid.ks[next_k]) == i + 1) {
                            const double acc_v = T == 0.0 ? question.correct[best] : sum_wv / sum_w;
                            acc[ti * nk + next_k] -= acc_v;
                            ++next_k;
                        }
                    }
                }
            }
            for (std::size_t c = 0; c < cells; ++c) {
                per_q(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(c)) = acc[c] / n_resample;
            }
        }
    });
    JudgeSweep out{SweepResult(grid, std::move(per_q), n_resample, EstimateMode::judge), used.size(),
                   ds.size() - used.size()};
    return out;
}

JudgeEstimate judge_delta(const JudgeDataset& ds, int k, double T, int n_resample, std::uint64_t seed,
                          unsigned threads) {
    const JudgeSweep js = judge_sweep(ds, SweepGrid{{k}, {T}}, n_resample, seed, threads);
    return JudgeEstimate{js.sweep.estimate(0, 0), js.n_used, js.n_excluded};
}

std::vector<JudgeRecord> synthetic_records(const SyntheticJudgeConfig& config, std::uint64_t seed) {
    if (config.n_questions < 1 || config.samples_per_question < 1) {
        throw std::invalid_argument("synthetic_records: need at least one question and sample");
    }
    std::vector<JudgeRecord> out;
    out.reserve(static_cast<std::size_t>(config.n_questions) * config.samples_per_question);
    for (int q = 0; q < config.n_questions; ++q) {
        SplitMix64 rng = make_stream(seed, stream::kJudge, {0xffffffffULL, static_cast<std::uint64_t>(q)});
        std::bernoulli_distribution is_correct(config.p_correct);
        std::bernoulli_distribution is_hack(config.hack_fraction);
        std::normal_distribution<double> noise(0.0, config.noise);
        for (int i = 0; i < config.samples_per_question; ++i) {
            JudgeRecord r;
            r.question_id = "q" + std::to_string(q);
            char sid[16];
            std::snprintf(sid, sizeof sid, "s%04d", i);
            r.sample_id = sid;
            r.correct = is_correct(rng) ? 1 : 0;
            double base = config.correct_reward;
            if (!r.correct) base = is_hack(rng) ? config.hack_reward : config.base_reward;
            r.reward = base + noise(rng);
            out.push_back(std::move(r));
        }
    }
    return out;
}

}  // namespace itscale
