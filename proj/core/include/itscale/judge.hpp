#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "itscale/gen_error.hpp"

namespace itscale {

struct JudgeRecord {
    std::string question_id;
    std::string sample_id;
    double reward = 0.0;
    int correct = 0;
};

/// Samples of one question, ordered by sample_id.
struct JudgeQuestion {
    std::string id;
    std::vector<std::string> sample_ids;
    std::vector<double> rewards;
    std::vector<int> correct;

    std::size_t size() const noexcept { return rewards.size(); }
};

class JudgeDataset {
public:
    /// Validates and groups records. Throws std::invalid_argument on duplicate
    /// (question_id, sample_id), non-finite reward, non-binary correct or no records.
    static JudgeDataset from_records(std::vector<JudgeRecord> records);

    const std::vector<JudgeQuestion>& questions() const noexcept { return questions_; }
    std::size_t size() const noexcept { return questions_.size(); }
    std::size_t n_records() const noexcept;
    std::vector<std::size_t> counts() const;

private:
    std::vector<JudgeQuestion> questions_;  // ordered by question_id
};

/// One JSON object per line with keys question_id, sample_id, reward, correct.
/// Blank lines are skipped. Errors cite `source` and the 1-based line number.
JudgeDataset parse_records(std::istream& in, std::string_view source = "<input>");
JudgeDataset load_records(const std::filesystem::path& path);

void write_records(std::ostream& out, const std::vector<JudgeRecord>& records);

struct JudgeSweep {
    SweepResult sweep;
    std::size_t n_used = 0;
    std::size_t n_excluded = 0;
};

/// delta = -E_q mean_resamples sum_i softmax(r_i / T) v_i over size-k subsets
/// drawn without replacement. Each (question, resample) draws one random
/// permutation and every k uses its prefix; questions with fewer samples than
/// the largest k are excluded so all cells average the same questions.
/// At T = 0 the highest reward wins, ties going to the lowest sample_id.
JudgeSweep judge_sweep(const JudgeDataset& ds, const SweepGrid& grid, int n_resample, std::uint64_t seed,
                       unsigned threads = 0);

struct JudgeEstimate {
    ErrorEstimate estimate;
    std::size_t n_used = 0;
    std::size_t n_excluded = 0;
};

/// Throws std::invalid_argument when no question has k samples.
JudgeEstimate judge_delta(const JudgeDataset& ds, int k, double T, int n_resample, std::uint64_t seed,
                          unsigned threads = 0);

/// Synthetic judge scores. Each sample is correct with probability p_correct
/// and then scores correct_reward; an incorrect sample is a reward hack with
/// probability hack_fraction and scores hack_reward, else base_reward. Every
/// reward carries N(0, noise^2).
struct SyntheticJudgeConfig {
    int n_questions = 200;
    int samples_per_question = 32;
    double p_correct = 0.5;
    double hack_fraction = 0.0;
    double correct_reward = 1.0;
    double hack_reward = 3.0;
    double base_reward = 0.0;
    double noise = 0.1;
};

std::vector<JudgeRecord> synthetic_records(const SyntheticJudgeConfig& config, std::uint64_t seed);

}  // namespace itscale
