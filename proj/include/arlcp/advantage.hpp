#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "arlcp/errors.hpp"

namespace arlcp {

/// Leave-one-out advantages for one group of m rewards:
///   A_i = R_i - (S - R_i) / (m - 1)
/// where S is the group sum. Requires m >= 2.
inline std::vector<double> rloo_advantages(std::span<const double> rewards) {
    const std::size_t m = rewards.size();
    if (m < 2) {
        throw InvalidInputError("leave-one-out baseline needs at least 2 rollouts, got " +
                                std::to_string(m));
    }
    double sum = 0.0;
    for (double r : rewards) sum += r;
    std::vector<double> advantages;
    advantages.reserve(m);
    const double denom = static_cast<double>(m - 1);
    for (double r : rewards) {
        advantages.push_back(r - (sum - r) / denom);
    }
    return advantages;
}

/// Per-sequence advantages broadcast to token positions.
struct AdvantageBatch {
    std::vector<double> sequence_advantages;
    std::vector<std::vector<double>> token_advantages;
};

/// Broadcast each sequence advantage across that sequence's token count.
inline AdvantageBatch broadcast_token_advantages(std::span<const double> advantages,
                                                 std::span<const std::size_t> token_counts) {
    if (advantages.size() != token_counts.size()) {
        throw InvalidInputError("advantage/token-count size mismatch: " +
                                std::to_string(advantages.size()) + " vs " +
                                std::to_string(token_counts.size()));
    }
    AdvantageBatch batch;
    batch.sequence_advantages.assign(advantages.begin(), advantages.end());
    batch.token_advantages.reserve(advantages.size());
    for (std::size_t i = 0; i < advantages.size(); ++i) {
        if (token_counts[i] == 0) {
            throw InvalidInputError("sequence " + std::to_string(i) + " has no tokens");
        }
        batch.token_advantages.emplace_back(token_counts[i], advantages[i]);
    }
    return batch;
}

/// Probability ratio of the current policy to the sampling policy.
inline double density_ratio(double p_new, double p_old) {
    if (!(p_old > 0.0)) {
        throw InvalidInputError("sampling probability must be positive, got " +
                                std::to_string(p_old));
    }
    return p_new / p_old;
}

/// Clipped surrogate contribution of one action:
///   min(f * A, clip(f, 1 - eps, 1 + eps) * A)
inline double ppo_clipped_term(double ratio, double advantage, double clip_eps) {
    if (!(clip_eps > 0.0) || !(clip_eps < 1.0)) {
        throw ConfigError("clip epsilon must lie in (0, 1), got " + std::to_string(clip_eps));
    }
    const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
    return std::min(ratio * advantage, clipped * advantage);
}

}  // namespace arlcp
