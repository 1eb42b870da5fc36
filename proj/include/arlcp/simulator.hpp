#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "arlcp/advantage.hpp"
#include "arlcp/complexity.hpp"
#include "arlcp/errors.hpp"
#include "arlcp/format.hpp"
#include "arlcp/reward.hpp"
#include "arlcp/rng.hpp"

namespace arlcp {

/// A synthetic response style: how often it is correct and how its length
/// and reflection count are distributed.
struct Archetype {
    std::string name;
    double p_correct = 0.5;
    double len_mean = 500.0;
    double len_std = 50.0;
    double rtc_mean = 10.0;
    double rtc_std = 2.0;
};

/// Categorical policy over archetypes. Action probabilities are the
/// softmax of the logits.
struct SimPolicy {
    std::vector<double> logits;
    double learning_rate = 0.05;
    std::uint64_t rng_seed = 42;

    std::vector<double> probabilities() const {
        if (logits.empty()) throw InvalidInputError("policy has no logits");
        const double max_logit = *std::max_element(logits.begin(), logits.end());
        std::vector<double> probs(logits.size());
        double sum = 0.0;
        for (std::size_t k = 0; k < logits.size(); ++k) {
            probs[k] = std::exp(logits[k] - max_logit);
            sum += probs[k];
        }
        for (double& p : probs) p /= sum;
        return probs;
    }
};

enum class RewardMode { kArlcp, kAccuracyOnly };

inline const char* to_string(RewardMode mode) {
    return mode == RewardMode::kArlcp ? "arlcp" : "accuracy_only";
}

inline RewardMode reward_mode_from_string(const std::string& s) {
    if (s == "arlcp") return RewardMode::kArlcp;
    if (s == "accuracy_only") return RewardMode::kAccuracyOnly;
    throw ConfigError("unknown reward mode '" + s + "' (expected arlcp or accuracy_only)");
}

struct SimConfig {
    std::vector<Archetype> archetypes;
    int m = 16;
    int steps = 2000;
    PenaltyConfig penalty;
    RewardMode reward_mode = RewardMode::kArlcp;
    double clip_eps = 0.2;
    int epochs_per_batch = 1;
    double learning_rate = 0.05;
    std::uint64_t seed = 42;
    std::vector<double> initial_logits;

    void validate() const {
        if (archetypes.size() < 2) {
            throw ConfigError("simulator needs at least 2 archetypes, got " +
                              std::to_string(archetypes.size()));
        }
        if (m < 2) throw ConfigError("rollouts per step must be >= 2, got " + std::to_string(m));
        if (steps < 0) throw ConfigError("steps must be >= 0, got " + std::to_string(steps));
        if (!(clip_eps > 0.0) || !(clip_eps < 1.0)) {
            throw ConfigError("clip_eps must lie in (0, 1), got " + std::to_string(clip_eps));
        }
        if (epochs_per_batch < 1) {
            throw ConfigError("epochs_per_batch must be >= 1, got " +
                              std::to_string(epochs_per_batch));
        }
        if (!(learning_rate > 0.0)) {
            throw ConfigError("learning_rate must be positive, got " +
                              std::to_string(learning_rate));
        }
        if (!initial_logits.empty() && initial_logits.size() != archetypes.size()) {
            throw ConfigError("initial_logits size " + std::to_string(initial_logits.size()) +
                              " does not match archetype count " +
                              std::to_string(archetypes.size()));
        }
        penalty.validate();
        for (const auto& a : archetypes) {
            if (a.name.empty()) throw ConfigError("archetype name must be non-empty");
            if (!(a.p_correct >= 0.0) || !(a.p_correct <= 1.0)) {
                throw ConfigError("archetype '" + a.name + "': p_correct must lie in [0, 1]");
            }
            if (!(a.len_mean > 0.0) || !(a.len_std >= 0.0)) {
                throw ConfigError("archetype '" + a.name +
                                  "': len_mean must be positive and len_std non-negative");
            }
            if (!(a.rtc_mean >= 0.0) || !(a.rtc_std >= 0.0)) {
                throw ConfigError("archetype '" + a.name +
                                  "': rtc_mean and rtc_std must be non-negative");
            }
        }
        for (std::size_t i = 0; i < archetypes.size(); ++i) {
            for (std::size_t j = i + 1; j < archetypes.size(); ++j) {
                if (archetypes[i].name == archetypes[j].name) {
                    throw ConfigError("duplicate archetype name '" + archetypes[i].name + "'");
                }
            }
        }
    }
};

struct SyntheticRollout {
    int archetype = 0;
    bool correct = false;
    int rtc = 0;
    std::int64_t len = 1;
};

namespace detail {

// Draw order is part of the determinism contract: correctness, then
// length, then reflection count.
inline SyntheticRollout sample_from_archetype(const Archetype& arch, int index,
                                              RandomStream& rng) {
    SyntheticRollout s;
    s.archetype = index;
    s.correct = rng.next_bernoulli(arch.p_correct);
    s.len = std::max<std::int64_t>(1, std::llround(rng.next_normal(arch.len_mean, arch.len_std)));
    s.rtc = static_cast<int>(
        std::max<std::int64_t>(0, std::llround(rng.next_normal(arch.rtc_mean, arch.rtc_std))));
    return s;
}

}  // namespace detail

/// Draw one group of m rollouts: all m archetype indices first, then the
/// per-rollout attributes.
inline std::vector<SyntheticRollout> sample_group(const SimPolicy& policy, const SimConfig& cfg,
                                                  RandomStream& rng) {
    cfg.validate();
    const std::vector<double> probs = policy.probabilities();
    std::vector<int> indices(static_cast<std::size_t>(cfg.m));
    for (auto& idx : indices) idx = rng.next_categorical(probs);
    std::vector<SyntheticRollout> group;
    group.reserve(indices.size());
    for (int idx : indices) {
        group.push_back(detail::sample_from_archetype(cfg.archetypes[static_cast<std::size_t>(idx)],
                                                      idx, rng));
    }
    return group;
}

/// Per-rollout rewards for a sampled group under the configured mode.
inline std::vector<double> compute_group_rewards(std::span<const SyntheticRollout> group,
                                                 const SimConfig& cfg) {
    std::vector<double> rewards;
    rewards.reserve(group.size());
    if (cfg.reward_mode == RewardMode::kAccuracyOnly) {
        for (const auto& s : group) rewards.push_back(s.correct ? 1.0 : 0.0);
        return rewards;
    }
    std::vector<GroupObservation> obs;
    obs.reserve(group.size());
    for (const auto& s : group) obs.push_back({s.rtc, s.len, s.correct});
    const auto [scored, stats] = score_observed_group(obs, cfg.penalty);
    for (const auto& s : scored) rewards.push_back(s.reward);
    return rewards;
}

/// Clipped surrogate objective at the given logits, holding the sampling
/// probabilities fixed.
inline double surrogate_objective(std::span<const double> logits, std::span<const double> p_old,
                                  std::span<const int> actions,
                                  std::span<const double> advantages, double clip_eps) {
    SimPolicy probe;
    probe.logits.assign(logits.begin(), logits.end());
    const std::vector<double> p_new = probe.probabilities();
    double total = 0.0;
    for (std::size_t i = 0; i < actions.size(); ++i) {
        const auto a = static_cast<std::size_t>(actions[i]);
        const double ratio = density_ratio(p_new[a], p_old[a]);
        total += ppo_clipped_term(ratio, advantages[i], clip_eps);
    }
    return total;
}

/// Analytic logit gradient of surrogate_objective. Terms whose ratio sits
/// on the flat side of the clip are dropped.
inline std::vector<double> surrogate_gradient(std::span<const double> p_new,
                                              std::span<const double> p_old,
                                              std::span<const int> actions,
                                              std::span<const double> advantages,
                                              double clip_eps) {
    std::vector<double> grad(p_new.size(), 0.0);
    for (std::size_t i = 0; i < actions.size(); ++i) {
        const auto a = static_cast<std::size_t>(actions[i]);
        const double advantage = advantages[i];
        const double ratio = density_ratio(p_new[a], p_old[a]);
        const bool clipped_flat = (advantage > 0.0 && ratio > 1.0 + clip_eps) ||
                                  (advantage < 0.0 && ratio < 1.0 - clip_eps);
        if (clipped_flat) continue;
        const double coef = advantage * ratio;
        for (std::size_t k = 0; k < grad.size(); ++k) {
            const double indicator = (k == a) ? 1.0 : 0.0;
            grad[k] += coef * (indicator - p_new[k]);
        }
    }
    return grad;
}

/// One policy-gradient update on a sampled group: mode-dependent rewards,
/// leave-one-out advantages, then epochs_per_batch ascent passes on the
/// clipped surrogate against the pre-update snapshot.
inline SimPolicy policy_gradient_step(const SimPolicy& policy,
                                      std::span<const SyntheticRollout> group,
                                      const SimConfig& cfg) {
    if (group.size() < 2) {
        throw InvalidInputError("policy gradient step needs a group of >= 2 rollouts");
    }
    const std::vector<double> rewards = compute_group_rewards(group, cfg);
    const std::vector<double> advantages = rloo_advantages(rewards);
    std::vector<int> actions;
    actions.reserve(group.size());
    for (const auto& s : group) actions.push_back(s.archetype);
    const std::vector<double> p_old = policy.probabilities();
    SimPolicy updated = policy;
    for (int epoch = 0; epoch < cfg.epochs_per_batch; ++epoch) {
        const std::vector<double> p_new = updated.probabilities();
        const std::vector<double> grad =
            surrogate_gradient(p_new, p_old, actions, advantages, cfg.clip_eps);
        for (std::size_t k = 0; k < updated.logits.size(); ++k) {
            updated.logits[k] += updated.learning_rate * grad[k];
        }
    }
    return updated;
}

/// One row of the training trace. Probabilities are those of the policy
/// the step sampled from, before its update.
struct TraceRow {
    int step = 0;
    std::vector<double> probabilities;
    double mean_reward = 0.0;
    double mean_rtc = 0.0;
    double mean_len = 0.0;
    double accuracy = 0.0;
};

struct TrainingResult {
    std::vector<TraceRow> trace;
    SimPolicy final_policy;
};

inline TrainingResult run_training(const SimConfig& cfg) {
    cfg.validate();
    SimPolicy policy;
    policy.logits = cfg.initial_logits.empty()
                        ? std::vector<double>(cfg.archetypes.size(), 0.0)
                        : cfg.initial_logits;
    policy.learning_rate = cfg.learning_rate;
    policy.rng_seed = cfg.seed;
    RandomStream rng(cfg.seed);
    TrainingResult result;
    result.trace.reserve(static_cast<std::size_t>(cfg.steps));
    for (int step = 1; step <= cfg.steps; ++step) {
        const auto group = sample_group(policy, cfg, rng);
        const auto rewards = compute_group_rewards(group, cfg);
        TraceRow row;
        row.step = step;
        row.probabilities = policy.probabilities();
        double sum_reward = 0.0;
        double sum_rtc = 0.0;
        double sum_len = 0.0;
        double sum_correct = 0.0;
        for (std::size_t i = 0; i < group.size(); ++i) {
            sum_reward += rewards[i];
            sum_rtc += static_cast<double>(group[i].rtc);
            sum_len += static_cast<double>(group[i].len);
            sum_correct += group[i].correct ? 1.0 : 0.0;
        }
        const auto n = static_cast<double>(group.size());
        row.mean_reward = sum_reward / n;
        row.mean_rtc = sum_rtc / n;
        row.mean_len = sum_len / n;
        row.accuracy = sum_correct / n;
        result.trace.push_back(std::move(row));
        policy = policy_gradient_step(policy, group, cfg);
    }
    result.final_policy = std::move(policy);
    return result;
}

/// Monte-Carlo estimate of the expected composite reward of one archetype
/// scored against fixed reference statistics.
struct OracleEstimate {
    double expected_reward = 0.0;
    double standard_error = 0.0;
};

inline OracleEstimate brute_force_expected_reward(const Archetype& arch, const GroupStats& ref,
                                                  const PenaltyConfig& cfg, int n_mc,
                                                  RandomStream& rng) {
    if (n_mc < 10000) {
        throw InvalidInputError("Monte-Carlo oracle needs n_mc >= 10000, got " +
                                std::to_string(n_mc));
    }
    cfg.validate();
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int i = 0; i < n_mc; ++i) {
        const SyntheticRollout s = detail::sample_from_archetype(arch, 0, rng);
        const ComplexityBucket bucket = classify_complexity(s.rtc, cfg);
        const auto [a1, a2] = allocate_coefficients(bucket, cfg);
        const double f_rtc = reflection_penalty(s.rtc, ref, cfg);
        const double f_len = length_penalty(s.len, ref, cfg);
        const double r = composite_reward(s.correct, f_rtc, f_len, a1, a2);
        sum += r;
        sum_sq += r * r;
    }
    const auto n = static_cast<double>(n_mc);
    OracleEstimate est;
    est.expected_reward = sum / n;
    const double variance =
        std::max(0.0, (sum_sq - n * est.expected_reward * est.expected_reward) / (n - 1.0));
    est.standard_error = std::sqrt(variance / n);
    return est;
}

/// Reference statistics for oracle ranking: the correct-group statistics
/// of a large sample drawn with every archetype equally likely.
inline GroupStats uniform_reference_stats(const SimConfig& cfg, int n_draws, std::uint64_t seed) {
    cfg.validate();
    if (n_draws < 2) throw InvalidInputError("reference sample needs n_draws >= 2");
    RandomStream rng(seed);
    const std::vector<double> uniform(cfg.archetypes.size(),
                                      1.0 / static_cast<double>(cfg.archetypes.size()));
    std::vector<GroupObservation> obs;
    obs.reserve(static_cast<std::size_t>(n_draws));
    for (int i = 0; i < n_draws; ++i) {
        const int idx = rng.next_categorical(uniform);
        const SyntheticRollout s =
            detail::sample_from_archetype(cfg.archetypes[static_cast<std::size_t>(idx)], idx, rng);
        obs.push_back({s.rtc, s.len, s.correct});
    }
    return correct_group_stats(obs);
}

/// The three-archetype benchmark: a concise mostly-correct style, a
/// verbose heavily-reflective mostly-correct style, and a mostly-incorrect
/// style.
inline SimConfig benchmark_sim_config() {
    SimConfig cfg;
    cfg.archetypes = {
        {"concise_correct", 0.9, 300.0, 50.0, 10.0, 5.0},
        {"verbose_reflective", 0.9, 2000.0, 300.0, 100.0, 20.0},
        {"incorrect", 0.1, 1500.0, 300.0, 80.0, 20.0},
    };
    cfg.m = 16;
    cfg.steps = 2000;
    cfg.reward_mode = RewardMode::kArlcp;
    cfg.clip_eps = 0.2;
    cfg.epochs_per_batch = 1;
    cfg.learning_rate = 0.05;
    cfg.seed = 3;
    return cfg;
}

inline void write_trace_csv(std::ostream& out, const SimConfig& cfg,
                            std::span<const TraceRow> trace) {
    out << "step";
    for (const auto& a : cfg.archetypes) out << ",prob_" << a.name;
    out << ",mean_reward,mean_rtc,mean_len,accuracy\n";
    for (const auto& row : trace) {
        out << row.step;
        for (double p : row.probabilities) out << "," << format_real(p);
        out << "," << format_real(row.mean_reward) << "," << format_real(row.mean_rtc) << ","
            << format_real(row.mean_len) << "," << format_real(row.accuracy) << "\n";
    }
}

}  // namespace arlcp
