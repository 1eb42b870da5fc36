#include <gtest/gtest.h>

#include <arlcp/complexity.hpp>
#include <arlcp/errors.hpp>

namespace {

using arlcp::ComplexityBucket;
using arlcp::PenaltyConfig;

TEST(PenaltyConfigTest, DefaultsMatchPublishedSetup) {
    const PenaltyConfig cfg;
    EXPECT_EQ(cfg.n1, 40);
    EXPECT_EQ(cfg.n2, 80);
    EXPECT_EQ(cfg.lambda1, 0.05);
    EXPECT_EQ(cfg.lambda2, 0.10);
    EXPECT_EQ(cfg.lambda3, 0.15);
    EXPECT_EQ(cfg.alpha, 0.20);
    EXPECT_EQ(cfg.std_epsilon, 1e-8);
    EXPECT_NO_THROW(cfg.validate());
}

TEST(PenaltyConfigTest, RejectsBadValues) {
    const auto broken = [](auto mutate) {
        PenaltyConfig cfg;
        mutate(cfg);
        return cfg;
    };
    EXPECT_THROW(broken([](PenaltyConfig& c) { c.n1 = 0; }).validate(), arlcp::ConfigError);
    EXPECT_THROW(broken([](PenaltyConfig& c) { c.n2 = c.n1; }).validate(), arlcp::ConfigError);
    EXPECT_THROW(broken([](PenaltyConfig& c) { c.lambda2 = 0.0; }).validate(),
                 arlcp::ConfigError);
    EXPECT_THROW(broken([](PenaltyConfig& c) { c.lambda3 = 0.5; }).validate(),
                 arlcp::ConfigError);
    EXPECT_THROW(broken([](PenaltyConfig& c) { c.alpha = 1.0; }).validate(), arlcp::ConfigError);
    EXPECT_THROW(broken([](PenaltyConfig& c) { c.std_epsilon = 0.0; }).validate(),
                 arlcp::ConfigError);
}

TEST(ClassifyComplexityTest, DefaultBoundaries) {
    const PenaltyConfig cfg;
    EXPECT_EQ(arlcp::classify_complexity(0, cfg), ComplexityBucket::kSimple);
    EXPECT_EQ(arlcp::classify_complexity(40, cfg), ComplexityBucket::kSimple);
    EXPECT_EQ(arlcp::classify_complexity(41, cfg), ComplexityBucket::kModerate);
    EXPECT_EQ(arlcp::classify_complexity(80, cfg), ComplexityBucket::kModerate);
    EXPECT_EQ(arlcp::classify_complexity(81, cfg), ComplexityBucket::kHard);
    EXPECT_EQ(arlcp::classify_complexity(200, cfg), ComplexityBucket::kHard);
}

TEST(ClassifyComplexityTest, MonotoneOverRtc) {
    const PenaltyConfig cfg;
    auto previous = arlcp::classify_complexity(0, cfg);
    for (int rtc = 1; rtc <= 200; ++rtc) {
        const auto bucket = arlcp::classify_complexity(rtc, cfg);
        EXPECT_GE(static_cast<int>(bucket), static_cast<int>(previous)) << "rtc " << rtc;
        previous = bucket;
    }
}

TEST(AllocateCoefficientsTest, BucketLambdaPlusRemainder) {
    const PenaltyConfig cfg;
    const auto [s1, s2] = arlcp::allocate_coefficients(ComplexityBucket::kSimple, cfg);
    EXPECT_EQ(s1, cfg.lambda1);
    EXPECT_EQ(s1 + s2, cfg.alpha);
    const auto [m1, m2] = arlcp::allocate_coefficients(ComplexityBucket::kModerate, cfg);
    EXPECT_EQ(m1, cfg.lambda2);
    EXPECT_EQ(m1 + m2, cfg.alpha);
    const auto [h1, h2] = arlcp::allocate_coefficients(ComplexityBucket::kHard, cfg);
    EXPECT_EQ(h1, cfg.lambda3);
    EXPECT_EQ(h1 + h2, cfg.alpha);
}

TEST(AllocateCoefficientsTest, HarderBucketsShiftWeightToReflection) {
    const PenaltyConfig cfg;
    const auto [s1, s2] = arlcp::allocate_coefficients(ComplexityBucket::kSimple, cfg);
    const auto [m1, m2] = arlcp::allocate_coefficients(ComplexityBucket::kModerate, cfg);
    const auto [h1, h2] = arlcp::allocate_coefficients(ComplexityBucket::kHard, cfg);
    EXPECT_LT(s1, m1);
    EXPECT_LT(m1, h1);
    EXPECT_GT(s2, m2);
    EXPECT_GT(m2, h2);
}

TEST(ComplexityBucketTest, Names) {
    EXPECT_STREQ(arlcp::to_string(ComplexityBucket::kSimple), "simple");
    EXPECT_STREQ(arlcp::to_string(ComplexityBucket::kModerate), "moderate");
    EXPECT_STREQ(arlcp::to_string(ComplexityBucket::kHard), "hard");
}

}  // namespace
