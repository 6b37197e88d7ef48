#include "itscale/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace itscale {

void SamplerConfig::validate() const {
    if (k < 1) throw std::invalid_argument("SamplerConfig: k must be >= 1");
    if (!(T >= 0) || std::isnan(T)) throw std::invalid_argument("SamplerConfig: T must be >= 0");
}

std::vector<double> softmax_weights(std::span<const double> rewards, double T) {
    if (rewards.empty()) throw std::invalid_argument("softmax_weights: no rewards");
    if (!(T >= 0)) throw std::invalid_argument("softmax_weights: T must be >= 0");

    std::size_t best = 0;
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        if (std::isnan(rewards[i])) throw std::invalid_argument("softmax_weights: NaN reward");
        if (rewards[i] > rewards[best]) best = i;
    }
    const double top = rewards[best];
    if (top == -std::numeric_limits<double>::infinity()) {
        throw std::domain_error("softmax_weights: every reward is -infinity");
    }

    std::vector<double> w(rewards.size(), 0.0);
    if (T == 0.0) {
        w[best] = 1.0;
        return w;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        w[i] = std::exp((rewards[i] - top) / T);
        total += w[i];
    }
    for (double& wi : w) wi /= total;
    return w;
}

Selection reward_weighted_select(std::span<const double> samples, double mu_R, double T, SplitMix64& rng) {
    if (samples.empty()) throw std::invalid_argument("reward_weighted_select: no samples");
    std::vector<double> rewards(samples.size());
    std::transform(samples.begin(), samples.end(), rewards.begin(),
                   [mu_R](double y) { return quadratic_reward(y, mu_R); });
    const std::vector<double> q = softmax_weights(rewards, T);

    std::size_t index = 0;
    if (T == 0.0) {
        index = static_cast<std::size_t>(std::max_element(q.begin(), q.end()) - q.begin());
    } else {
        std::discrete_distribution<std::size_t> pick(q.begin(), q.end());
        index = pick(rng);
    }
    return {index, samples[index]};
}

}  // namespace itscale
