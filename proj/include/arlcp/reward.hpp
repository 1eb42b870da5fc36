#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "arlcp/complexity.hpp"
#include "arlcp/errors.hpp"
#include "arlcp/rollout.hpp"

namespace arlcp {

/// Correct-only statistics of one prompt's rollout group.
struct GroupStats {
    double mean_rtc_correct = 0.0;
    double std_rtc_correct = 0.0;
    double mean_len_correct = 0.0;
    double std_len_correct = 0.0;
    std::size_t n_correct = 0;
    std::size_t n_total = 0;
};

/// The (rtc, len, correct) triple the reward pipeline consumes; produced
/// from parsed rollouts or drawn synthetically by the trainer.
struct GroupObservation {
    int rtc = 0;
    std::int64_t len = 1;
    bool correct = false;
};

struct ScoredObservation {
    int rtc = 0;
    std::int64_t len = 1;
    ComplexityBucket bucket = ComplexityBucket::kSimple;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    bool correct = false;
    double reflection_penalty = 0.5;
    double length_penalty = 0.5;
    double reward = 0.0;
};

/// Scored rollout: the observation plus its source rollout id.
struct ScoredRollout : ScoredObservation {
    std::string rollout_id;
};

namespace detail {

// Logistic function. The argument is clamped so the result stays strictly
// inside (0,1) in double precision even for extreme z-scores.
inline double sigmoid(double z) {
    const double kZClamp = 36.0;
    if (z > kZClamp) z = kZClamp;
    if (z < -kZClamp) z = -kZClamp;
    return 1.0 / (1.0 + std::exp(-z));
}

}  // namespace detail

/// Mean and population standard deviation of rtc and len over the correct
/// members. All four statistics are 0 when no member is correct.
inline GroupStats correct_group_stats(std::span<const GroupObservation> group) {
    if (group.empty()) throw InvalidInputError("group statistics over an empty group");
    GroupStats stats;
    stats.n_total = group.size();
    double sum_rtc = 0.0;
    double sum_len = 0.0;
    for (const auto& obs : group) {
        if (!obs.correct) continue;
        ++stats.n_correct;
        sum_rtc += static_cast<double>(obs.rtc);
        sum_len += static_cast<double>(obs.len);
    }
    if (stats.n_correct == 0) return stats;
    const auto n = static_cast<double>(stats.n_correct);
    stats.mean_rtc_correct = sum_rtc / n;
    stats.mean_len_correct = sum_len / n;
    double ss_rtc = 0.0;
    double ss_len = 0.0;
    for (const auto& obs : group) {
        if (!obs.correct) continue;
        const double d_rtc = static_cast<double>(obs.rtc) - stats.mean_rtc_correct;
        const double d_len = static_cast<double>(obs.len) - stats.mean_len_correct;
        ss_rtc += d_rtc * d_rtc;
        ss_len += d_len * d_len;
    }
    stats.std_rtc_correct = std::sqrt(ss_rtc / n);
    stats.std_len_correct = std::sqrt(ss_len / n);
    return stats;
}

// Shared degenerate rule: the z-score is forced to 0 (penalty 0.5) when
// fewer than two correct members exist or the spread is below epsilon.
namespace detail {

inline double standardized_penalty(double value, double mean, double stddev,
                                   std::size_t n_correct, double epsilon) {
    if (n_correct < 2 || stddev <= epsilon) return sigmoid(0.0);
    return sigmoid((value - mean) / stddev);
}

}  // namespace detail

/// Sigmoid of the rtc z-score against the correct-group statistics.
inline double reflection_penalty(int rtc, const GroupStats& stats, const PenaltyConfig& cfg) {
    return detail::standardized_penalty(static_cast<double>(rtc), stats.mean_rtc_correct,
                                        stats.std_rtc_correct, stats.n_correct,
                                        cfg.std_epsilon);
}

/// Sigmoid of the len z-score against the correct-group statistics.
inline double length_penalty(std::int64_t len, const GroupStats& stats,
                             const PenaltyConfig& cfg) {
    return detail::standardized_penalty(static_cast<double>(len), stats.mean_len_correct,
                                        stats.std_len_correct, stats.n_correct,
                                        cfg.std_epsilon);
}

/// Accuracy-gated composite reward.
inline double composite_reward(bool correct, double f_rtc, double f_len, double alpha1,
                               double alpha2) {
    if (!correct) return 0.0;
    return 1.0 - alpha1 * f_rtc - alpha2 * f_len;
}

/// Score a group of observations that already carry rtc/len/correct.
inline std::pair<std::vector<ScoredObservation>, GroupStats> score_observed_group(
    std::span<const GroupObservation> group, const PenaltyConfig& cfg) {
    const GroupStats stats = correct_group_stats(group);
    std::vector<ScoredObservation> scored;
    scored.reserve(group.size());
    for (const auto& obs : group) {
        ScoredObservation s;
        s.rtc = obs.rtc;
        s.len = obs.len;
        s.correct = obs.correct;
        s.bucket = classify_complexity(obs.rtc, cfg);
        const auto [a1, a2] = allocate_coefficients(s.bucket, cfg);
        s.alpha1 = a1;
        s.alpha2 = a2;
        s.reflection_penalty = reflection_penalty(obs.rtc, stats, cfg);
        s.length_penalty = length_penalty(obs.len, stats, cfg);
        s.reward = composite_reward(obs.correct, s.reflection_penalty, s.length_penalty,
                                    s.alpha1, s.alpha2);
        scored.push_back(s);
    }
    return {std::move(scored), stats};
}

/// Full scoring pipeline for one prompt's rollouts: segment, extract the
/// answer, grade against the ground truth, count reflections, measure
/// length, then apply the coordinated penalties. Output order matches
/// input order.
inline std::pair<std::vector<ScoredRollout>, GroupStats> score_group(
    std::span<const Rollout> rollouts, const TriggerLexicon& lex, const PenaltyConfig& cfg) {
    if (rollouts.empty()) throw InvalidInputError("cannot score an empty rollout group");
    const std::string& prompt = rollouts.front().prompt_id;
    for (const auto& r : rollouts) {
        if (r.prompt_id != prompt) {
            throw InvalidInputError("mixed prompt_ids in one group: '" + prompt +
                                    "' vs '" + r.prompt_id + "'");
        }
    }
    std::vector<GroupObservation> observations;
    observations.reserve(rollouts.size());
    for (const auto& r : rollouts) {
        const SegmentedRollout seg = split_thinking(r);
        const auto answer = extract_answer(seg);
        GroupObservation obs;
        obs.correct = answer.has_value() && *answer == normalize_answer(r.ground_truth);
        obs.rtc = count_reflection_tokens(r.text, lex);
        obs.len = response_length(r);
        observations.push_back(obs);
    }
    auto [scored_obs, stats] = score_observed_group(observations, cfg);
    std::vector<ScoredRollout> scored;
    scored.reserve(rollouts.size());
    for (std::size_t i = 0; i < rollouts.size(); ++i) {
        ScoredRollout s;
        static_cast<ScoredObservation&>(s) = scored_obs[i];
        s.rollout_id = rollouts[i].rollout_id;
        scored.push_back(std::move(s));
    }
    return {std::move(scored), stats};
}

}  // namespace arlcp
