#include <gtest/gtest.h>

#include "mfrl/error.hpp"
#include "mfrl/nplayer.hpp"

using namespace mfrl;

TEST(JointPayoff, MatchesMarginalRepresentation) {
    SplitMix64 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = random_game(2, 2, 2, 1.0, rng);
        std::vector<DiscretePolicy> profile;
        for (int i = 0; i < 3; ++i) profile.push_back(random_policy(g, rng));
        for (int i = 0; i < 3; ++i) EXPECT_NEAR(joint_payoff(g, profile, i), marginal_payoff(g, profile, i), 1e-12);
    }
}

TEST(JointPayoff, SingleAgentIsMeanFieldOfDirac) {
    // N = 1: the agent is alone, so its mass is always 1
    SplitMix64 rng(2);
    const auto g = random_game(3, 2, 3, 1.0, rng);
    const std::vector<DiscretePolicy> one{random_policy(g, rng)};
    const auto flow = induced_flow(g, one[0]);
    double expected = 0.0;
    for (int t = 0; t < g.horizon; ++t) {
        for (int s = 0; s < g.states; ++s) {
            for (int a = 0; a < g.actions; ++a) expected += flow[t](s) * one[0].probs[t](s, a) * g.reward(s, 1.0, a);
        }
    }
    EXPECT_NEAR(joint_payoff(g, one, 0), expected, 1e-12);
}

TEST(JointPayoff, PermutingOthersChangesNothing) {
    SplitMix64 rng(3);
    const auto g = random_game(2, 2, 2, 1.0, rng);
    const auto a = random_policy(g, rng), b = random_policy(g, rng), c = random_policy(g, rng);
    const std::vector<DiscretePolicy> p1{a, b, c}, p2{a, c, b};
    EXPECT_NEAR(joint_payoff(g, p1, 0), joint_payoff(g, p2, 0), 1e-12);
}

TEST(JointPayoff, RejectsBadProfiles) {
    SplitMix64 rng(4);
    const auto g = random_game(2, 2, 1, 1.0, rng);
    EXPECT_THROW(joint_payoff(g, std::vector<DiscretePolicy>{}, 0), Error);
    const std::vector<DiscretePolicy> two{random_policy(g, rng), random_policy(g, rng)};
    EXPECT_THROW(joint_payoff(g, two, 2), Error);
}

TEST(PotentialIdentity, NullDeviation) {
    SplitMix64 rng(5);
    const auto g = random_game(2, 2, 1, 1.0, rng);
    const std::vector<DiscretePolicy> p{random_policy(g, rng), random_policy(g, rng)};
    EXPECT_EQ(joint_payoff(g, p, 0) - joint_payoff(g, p, 0), 0.0);
    EXPECT_EQ(marginal_payoff(g, p, 0) - marginal_payoff(g, p, 0), 0.0);
}

TEST(PotentialIdentity, TwoPlayersHundredDeviations) {
    SplitMix64 rng(6);
    const auto g = random_game(2, 2, 1, 1.0, rng);
    const auto check = potential_identity_check(g, 2, 100, rng);
    EXPECT_EQ(check.deviations, 100);
    EXPECT_LT(check.max_discrepancy, 1e-12);
}

TEST(PotentialIdentity, LargerInstantiations) {
    SplitMix64 rng(7);
    const auto g = random_game(3, 2, 2, 2.0, rng);
    EXPECT_LT(potential_identity_check(g, 3, 20, rng).max_discrepancy, 1e-12);
    const auto ring = monotone_ring_game(4, 2);
    EXPECT_LT(potential_identity_check(ring, 2, 20, rng).max_discrepancy, 1e-12);
}

TEST(NplayerGap, SeededAndOrdered) {
    const auto g = monotone_ring_game();
    const auto pi = fictitious_play(g, 200).policy;
    const auto a = nplayer_gap(g, pi, 16, 50, 9);
    const auto b = nplayer_gap(g, pi, 16, 50, 9);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.std, b.std);
    EXPECT_GT(nplayer_gap(g, pi, 8, 200, 10).mean, nplayer_gap(g, pi, 4096, 200, 10).mean);
    EXPECT_THROW(nplayer_gap(g, pi, 0, 10, 1), Error);
}

TEST(NplayerGap, DecoupledGameIsSamplingNoise) {
    SplitMix64 rng(11);
    const auto g = random_game(3, 2, 3, 0.0, rng);
    const auto pi = random_policy(g, rng);
    const std::vector<int> sizes{16, 64, 256, 1024};
    const auto rows = scaling_experiment(g, pi, sizes, 400, 12);
    const double slope = loglog_slope(rows);
    EXPECT_GT(slope, -0.7);
    EXPECT_LT(slope, -0.3);
    EXPECT_LT(rows.back().gap_mean, 0.02);
}

TEST(NplayerGap, RingGameScalingSlope) {
    const auto g = monotone_ring_game();
    const auto pi = fictitious_play(g, 500).policy;
    const std::vector<int> sizes{8, 16, 32, 64, 128, 256, 512, 1024};
    const auto rows = scaling_experiment(g, pi, sizes, 200, 13);
    ASSERT_EQ(rows.size(), sizes.size());
    const double slope = loglog_slope(rows);
    EXPECT_GE(slope, -0.7);
    EXPECT_LE(slope, -0.3);
}

TEST(LoglogSlope, ExactPowerLaw) {
    std::vector<ScalingRow> rows;
    for (int n : {2, 4, 8, 16}) rows.push_back({n, 1, 3.0 / std::sqrt(double(n)), 0.0});
    EXPECT_NEAR(loglog_slope(rows), -0.5, 1e-12);
    rows.resize(1);
    EXPECT_THROW(loglog_slope(rows), Error);
}
