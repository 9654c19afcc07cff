#include <gtest/gtest.h>

#include <random>

#include "lightfr/error.hpp"
#include "lightfr/privacy.hpp"
#include "oracles.hpp"

using namespace lightfr;

TEST(RecoverRatingReal, WorkedExample) {
    const std::vector<double> p{1, 2}, q{0.5, 0.5};
    const double g0 = (1.5 - 0.6) * 1;
    EXPECT_NEAR(g0, 0.9, 1e-15);
    EXPECT_NEAR(recover_rating_real(p, q, g0, 0), 0.6, 1e-12);
    EXPECT_DOUBLE_EQ(recover_rating_real(p, q, 0.0, 1), 1.5);
    const std::vector<double> zero{0, 1};
    EXPECT_THROW(recover_rating_real(zero, q, 0.1, 0), Error);
}

TEST(RecoverRatingReal, RandomTrials) {
    const auto rep = real_recovery_trials(1000, 16, 3);
    EXPECT_EQ(rep.trials, 1000u);
    EXPECT_LT(rep.max_error, 1e-9);
    EXPECT_FALSE(rep.samples.empty());
}

TEST(BinaryGradient, MatchesNaiveDefinition) {
    std::mt19937_64 g(1);
    for (int t = 0; t < 200; ++t) {
        const std::size_t f = 1 + g() % 16;
        const auto b = oracle::random_signs(f, g), d = oracle::random_signs(f, g);
        const double r = static_cast<double>(g() % 11) / 10.0;
        const auto got = binary_gradient(oracle::pack(b), oracle::pack(d), r);
        const auto want = oracle::item_gradient(b, d, r);
        for (std::size_t k = 0; k < f; ++k) ASSERT_NEAR(got[k], want[k], 1e-15);
    }
}

TEST(FeasibleSet, WorkedExample) {
    const auto d = BinaryCode::parse("++");
    const std::vector<double> grad{0.25, 0.25};
    EXPECT_EQ(binary_gradient(BinaryCode::parse("++"), d, 1.0), grad);
    const auto fs = feasible_ratings_binary(grad, d);
    bool truth = false, mirror = false;
    for (const auto& c : fs.candidates) {
        if (c.code.to_string() == "++" && std::abs(c.rating - 1.0) < 1e-12) truth = true;
        if (c.code.to_string() == "--" && std::abs(c.rating - 0.0) < 1e-12) mirror = true;
    }
    EXPECT_TRUE(truth);
    EXPECT_TRUE(mirror);
}

TEST(FeasibleSet, ZeroPayloadHasExactlyTheTwoExtremeCandidates) {
    // A zero gradient needs r = 1/2 + c_k/(2f) on every bit at once, which
    // only b = d (c_k = f - 1) or b = -d (c_k = -(f - 1)) achieve.
    for (std::uint32_t f : {2u, 5u, 12u}) {
        std::mt19937_64 g(f);
        const auto d = oracle::pack(oracle::random_signs(f, g));
        const std::vector<double> zero(f, 0.0);
        const auto fs = feasible_ratings_binary(zero, d);
        ASSERT_EQ(fs.candidates.size(), 2u) << f;
        const double hi = (2.0 * f - 1) / (2.0 * f), lo = 1.0 / (2.0 * f);
        for (const auto& c : fs.candidates) {
            if (c.code == d) EXPECT_NEAR(c.rating, hi, 1e-12);
            else {
                EXPECT_EQ(c.code, d.complement());
                EXPECT_NEAR(c.rating, lo, 1e-12);
            }
        }
        EXPECT_EQ(fs.distinct_ratings().size(), 2u);
    }
}

TEST(FeasibleSet, SymmetryClosureAndExactRegeneration) {
    std::mt19937_64 g(2);
    for (int t = 0; t < 200; ++t) {
        const std::uint32_t f = 2 + g() % 11;  // up to 12
        const auto b = oracle::pack(oracle::random_signs(f, g));
        const auto d = oracle::pack(oracle::random_signs(f, g));
        const double r = static_cast<double>(g() % 1001) / 1000.0;
        const auto grad = binary_gradient(b, d, r);
        const auto fs = feasible_ratings_binary(grad, d);
        bool truth = false, mirror = false;
        for (const auto& c : fs.candidates) {
            if (c.code == b && std::abs(c.rating - r) < 1e-9) truth = true;
            if (c.code == b.complement() && std::abs(c.rating - (1 - r)) < 1e-9) mirror = true;
            const auto regen = binary_gradient(c.code, d, c.rating);
            for (std::uint32_t k = 0; k < f; ++k) ASSERT_NEAR(regen[k], grad[k], 1e-12);
        }
        ASSERT_TRUE(truth) << t;
        ASSERT_TRUE(mirror) << t;
        if (std::abs(r - 0.5) > 1e-9) ASSERT_GE(fs.distinct_ratings().size(), 2u);
    }
}

TEST(FeasibleSet, RejectsLongCodes) {
    const std::vector<double> g(17, 0.0);
    EXPECT_THROW(feasible_ratings_binary(g, BinaryCode(17)), Error);
}

TEST(AmbiguityRate, GridWithoutHalfIsFullyAmbiguous) {
    const std::vector<double> grid{0.2, 0.4, 0.6, 0.8, 1.0};
    const auto rep = ambiguity_rate(300, 12, grid, 4);
    EXPECT_EQ(rep.trials, 300u);
    EXPECT_EQ(rep.truth_missing, 0u);
    EXPECT_DOUBLE_EQ(rep.rate, 1.0);
    EXPECT_LE(rep.examples.size(), 3u);
    const auto par = ambiguity_rate(300, 12, grid, 4, false, 3, 3);
    EXPECT_EQ(par.ambiguous, rep.ambiguous);
    EXPECT_THROW(ambiguity_rate(0, 12, grid, 4), Error);
}
