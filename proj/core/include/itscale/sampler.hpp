#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "itscale/rng.hpp"

namespace itscale {

struct SamplerConfig {
    int k = 1;
    double T = 0.0;  // T = 0 is best-of-k

    void validate() const;
};

/// r(y) = -(y - mu_R)^2
inline double quadratic_reward(double y, double mu_R) noexcept {
    const double e = y - mu_R;
    return -e * e;
}

/// Softmax of rewards / T, shifted by the maximum reward so no term overflows.
/// T = 0 returns the one-hot vector at the first maximal reward. Throws
/// std::invalid_argument for empty input, NaN rewards or T < 0, and
/// std::domain_error when every reward is -infinity.
std::vector<double> softmax_weights(std::span<const double> rewards, double T);

struct Selection {
    std::size_t index = 0;
    double value = 0.0;
};

/// One run of reward-weighted sampling over already-drawn candidates: draw an
/// index from Categorical(softmax(r/T)) with quadratic rewards around mu_R.
Selection reward_weighted_select(std::span<const double> samples, double mu_R, double T, SplitMix64& rng);

}  // namespace itscale
