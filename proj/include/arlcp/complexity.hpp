#pragma once

#include <string>
#include <utility>

#include "arlcp/errors.hpp"

namespace arlcp {

/// Penalty hyperparameters. Defaults are the published training setup.
struct PenaltyConfig {
    int n1 = 40;               // upper RTC bound of the simple bucket
    int n2 = 80;               // upper RTC bound of the moderate bucket
    double lambda1 = 0.05;     // reflection coefficient, simple
    double lambda2 = 0.10;     // reflection coefficient, moderate
    double lambda3 = 0.15;     // reflection coefficient, hard
    double alpha = 0.20;       // overall penalty budget
    double std_epsilon = 1e-8; // degenerate-std guard

    void validate() const {
        if (n1 < 1) throw ConfigError("n1 must be a positive integer");
        if (n2 <= n1) throw ConfigError("n2 must exceed n1");
        for (double lambda : {lambda1, lambda2, lambda3}) {
            if (!(lambda > 0.0 && lambda < 1.0)) {
                throw ConfigError("lambda weights must lie in (0,1)");
            }
            if (lambda > alpha) {
                throw ConfigError("lambda weights must not exceed alpha");
            }
        }
        if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
        if (!(std_epsilon > 0.0)) throw ConfigError("std_epsilon must be positive");
    }
};

enum class ComplexityBucket { kSimple, kModerate, kHard };

inline const char* to_string(ComplexityBucket b) {
    switch (b) {
        case ComplexityBucket::kSimple: return "simple";
        case ComplexityBucket::kModerate: return "moderate";
        case ComplexityBucket::kHard: return "hard";
    }
    return "simple";
}

/// RTC thresholding: simple iff rtc <= n1, moderate iff n1 < rtc <= n2,
/// hard iff rtc > n2.
inline ComplexityBucket classify_complexity(int rtc, const PenaltyConfig& cfg) {
    if (rtc <= cfg.n1) return ComplexityBucket::kSimple;
    if (rtc <= cfg.n2) return ComplexityBucket::kModerate;
    return ComplexityBucket::kHard;
}

/// Coordinated coefficients: the bucket's lambda is the reflection weight
/// and the remainder of alpha goes to the length weight.
inline std::pair<double, double> allocate_coefficients(ComplexityBucket bucket,
                                                       const PenaltyConfig& cfg) {
    double alpha1 = cfg.lambda1;
    switch (bucket) {
        case ComplexityBucket::kSimple: alpha1 = cfg.lambda1; break;
        case ComplexityBucket::kModerate: alpha1 = cfg.lambda2; break;
        case ComplexityBucket::kHard: alpha1 = cfg.lambda3; break;
    }
    return {alpha1, cfg.alpha - alpha1};
}

}  // namespace arlcp
