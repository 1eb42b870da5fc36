#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

#include "arlcp/errors.hpp"

namespace arlcp {

/// Seeded random stream with fully specified output sequences.
///
/// mt19937_64 is bit-exact across platforms by the standard, but the
/// standard distributions are not, so the uniform/normal/bernoulli draws
/// are derived here directly from the raw engine output. Training traces
/// stay byte-identical for a given seed on any conforming toolchain.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    // Uniform double in [0, 1), 53 random bits.
    double next_uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Box-Muller; draws two uniforms per call, returns one value.
    double next_normal(double mean, double stddev) {
        double u1 = next_uniform();
        double u2 = next_uniform();
        while (u1 <= 0.0) u1 = next_uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double two_pi = 6.283185307179586476925286766559;
        return mean + stddev * radius * std::cos(two_pi * u2);
    }

    bool next_bernoulli(double p) { return next_uniform() < p; }

    // Index draw from a normalized probability vector.
    int next_categorical(std::span<const double> probs) {
        if (probs.empty()) throw InvalidInputError("categorical draw over empty support");
        const double u = next_uniform();
        double cumulative = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            cumulative += probs[i];
            if (u < cumulative) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size()) - 1;
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace arlcp
