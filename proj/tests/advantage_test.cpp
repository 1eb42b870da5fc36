#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include <arlcp/advantage.hpp>
#include <arlcp/errors.hpp>
#include <arlcp/rng.hpp>

namespace {

TEST(RlooAdvantagesTest, TwoRolloutHandExample) {
    const std::vector<double> rewards = {1.0, 0.0};
    const auto advantages = arlcp::rloo_advantages(rewards);
    ASSERT_EQ(advantages.size(), 2u);
    EXPECT_EQ(advantages[0], 1.0);
    EXPECT_EQ(advantages[1], -1.0);
}

TEST(RlooAdvantagesTest, LeaveOneOutBaselineByDefinition) {
    const std::vector<double> rewards = {0.9, 0.4, 0.7, 0.2};
    const auto advantages = arlcp::rloo_advantages(rewards);
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        double others = 0.0;
        for (std::size_t j = 0; j < rewards.size(); ++j) {
            if (j != i) others += rewards[j];
        }
        EXPECT_NEAR(advantages[i], rewards[i] - others / 3.0, 1e-15);
    }
}

TEST(RlooAdvantagesTest, ZeroSumAndClosedFormOnRandomVectors) {
    arlcp::RandomStream rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const int m = 2 + static_cast<int>(rng.next_uniform() * 63);
        std::vector<double> rewards(static_cast<std::size_t>(m));
        double mean = 0.0;
        for (auto& r : rewards) {
            r = rng.next_uniform();
            mean += r;
        }
        mean /= static_cast<double>(m);
        const auto advantages = arlcp::rloo_advantages(rewards);
        double sum = 0.0;
        for (std::size_t i = 0; i < rewards.size(); ++i) {
            sum += advantages[i];
            const double closed_form =
                (static_cast<double>(m) / (m - 1.0)) * (rewards[i] - mean);
            EXPECT_NEAR(advantages[i], closed_form, 1e-12);
        }
        EXPECT_NEAR(sum, 0.0, 1e-9);
    }
}

TEST(RlooAdvantagesTest, EqualRewardsGiveZeroAdvantages) {
    const std::vector<double> rewards = {0.6, 0.6, 0.6};
    for (const double a : arlcp::rloo_advantages(rewards)) EXPECT_NEAR(a, 0.0, 1e-15);
}

TEST(RlooAdvantagesTest, NeedsAtLeastTwo) {
    const std::vector<double> one = {0.5};
    EXPECT_THROW(arlcp::rloo_advantages(one), arlcp::InvalidInputError);
    const std::vector<double> none;
    EXPECT_THROW(arlcp::rloo_advantages(none), arlcp::InvalidInputError);
}

TEST(BroadcastTest, RepeatsSequenceAdvantagePerToken) {
    const std::vector<double> advantages = {0.25, -0.5};
    const std::vector<std::size_t> tokens = {3, 1};
    const auto batch = arlcp::broadcast_token_advantages(advantages, tokens);
    ASSERT_EQ(batch.sequence_advantages.size(), 2u);
    ASSERT_EQ(batch.token_advantages.size(), 2u);
    EXPECT_EQ(batch.token_advantages[0], (std::vector<double>{0.25, 0.25, 0.25}));
    EXPECT_EQ(batch.token_advantages[1], (std::vector<double>{-0.5}));
}

TEST(BroadcastTest, RejectsBadShapes) {
    const std::vector<double> advantages = {0.25, -0.5};
    const std::vector<std::size_t> short_tokens = {3};
    EXPECT_THROW(arlcp::broadcast_token_advantages(advantages, short_tokens),
                 arlcp::InvalidInputError);
    const std::vector<std::size_t> with_empty = {3, 0};
    EXPECT_THROW(arlcp::broadcast_token_advantages(advantages, with_empty),
                 arlcp::InvalidInputError);
}

TEST(DensityRatioTest, RatioAndGuard) {
    EXPECT_EQ(arlcp::density_ratio(0.2, 0.1), 2.0);
    EXPECT_EQ(arlcp::density_ratio(0.1, 0.1), 1.0);
    EXPECT_THROW(arlcp::density_ratio(0.1, 0.0), arlcp::InvalidInputError);
    EXPECT_THROW(arlcp::density_ratio(0.1, -0.5), arlcp::InvalidInputError);
}

TEST(PpoClippedTermTest, FourQuadrantTable) {
    const double eps = 0.2;
    EXPECT_NEAR(arlcp::ppo_clipped_term(1.5, 1.0, eps), 1.2, 1e-15);
    EXPECT_NEAR(arlcp::ppo_clipped_term(0.5, 1.0, eps), 0.5, 1e-15);
    EXPECT_NEAR(arlcp::ppo_clipped_term(1.5, -1.0, eps), -1.5, 1e-15);
    EXPECT_NEAR(arlcp::ppo_clipped_term(0.5, -1.0, eps), -0.8, 1e-15);
    EXPECT_NEAR(arlcp::ppo_clipped_term(1.1, 0.7, eps), 0.77, 1e-15);
    EXPECT_EQ(arlcp::ppo_clipped_term(1.0, 0.3, eps), 0.3);
}

TEST(PpoClippedTermTest, NeverExceedsUnclippedSurrogate) {
    arlcp::RandomStream rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        const double ratio = 0.05 + 2.5 * rng.next_uniform();
        const double advantage = 2.0 * rng.next_uniform() - 1.0;
        const double term = arlcp::ppo_clipped_term(ratio, advantage, 0.2);
        EXPECT_LE(term, ratio * advantage + 1e-15);
    }
}

TEST(PpoClippedTermTest, RejectsBadEpsilon) {
    EXPECT_THROW(arlcp::ppo_clipped_term(1.0, 1.0, 0.0), arlcp::ConfigError);
    EXPECT_THROW(arlcp::ppo_clipped_term(1.0, 1.0, 1.0), arlcp::ConfigError);
    EXPECT_THROW(arlcp::ppo_clipped_term(1.0, 1.0, -0.2), arlcp::ConfigError);
}

}  // namespace
