#include <gtest/gtest.h>

#include <cmath>

#include "pdmp/core.hpp"
#include "support/oracles.hpp"

using pdmp::PhaseState;
using pdmp::Vector;

TEST(Advance, LinearFlow)
{
    const auto z = pdmp::advance(PhaseState({0, 0}, {1, 0}), 2.0);
    EXPECT_EQ(z.x, (Vector{2, 0}));
    EXPECT_EQ(z.v, (Vector{1, 0}));
    EXPECT_DOUBLE_EQ(z.t, 2.0);

    const auto w = pdmp::advance(PhaseState({1, -1}, {0, -1}), 0.5);
    EXPECT_EQ(w.x, (Vector{1, -1.5}));
}

TEST(Advance, ZeroStepIsIdentity)
{
    const PhaseState z({0.3, -7.25, 1e6}, {1, -1, 1}, 4.5);
    const auto w = pdmp::advance(z, 0.0);
    EXPECT_EQ(w.x, z.x);
    EXPECT_EQ(w.v, z.v);
    EXPECT_EQ(w.t, z.t);
}

TEST(Advance, NegativeStepRejected)
{
    PhaseState z({0}, {1});
    EXPECT_THROW(pdmp::advance_in_place(z, -1.0), std::invalid_argument);
}

TEST(PhaseState, RejectsMismatchedLengths)
{
    EXPECT_THROW(PhaseState({0, 0}, {1}), std::invalid_argument);
    EXPECT_THROW(PhaseState({}, {}), std::invalid_argument);
}

TEST(Advance, SemigroupProperty)
{
    pdmp::RandomSource rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t d = 1 + rng.index(6);
        const PhaseState z(oracle::normal_vector(rng, d, 10.0), oracle::normal_vector(rng, d), rng.uniform());
        const double s = 5.0 * rng.uniform();
        const double t = 5.0 * rng.uniform();
        const auto two = pdmp::advance(pdmp::advance(z, s), t);
        const auto one = pdmp::advance(z, s + t);
        for (std::size_t i = 0; i < d; ++i) {
            EXPECT_NEAR(two.x[i], one.x[i], 1e-12 * std::max(1.0, std::fabs(one.x[i])));
        }
        EXPECT_NEAR(two.t, one.t, 1e-12 * std::max(1.0, one.t));
    }
}

TEST(RandomSource, ReproducibleAndStreamsDiffer)
{
    pdmp::RandomSource a(42, 3);
    pdmp::RandomSource b(42, 3);
    pdmp::RandomSource c(42, 4);
    int same = 0;
    for (int k = 0; k < 1000; ++k) {
        const double ua = a.uniform();
        EXPECT_EQ(ua, b.uniform());
        same += ua == c.uniform();
    }
    EXPECT_LT(same, 5);
}

TEST(RandomSource, UniformInOpenInterval)
{
    pdmp::RandomSource rng(1);
    double lo = 1.0;
    double hi = 0.0;
    for (int k = 0; k < 1000000; ++k) {
        const double u = rng.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    EXPECT_LT(lo, 1e-4);
    EXPECT_GT(hi, 1.0 - 1e-4);
}

TEST(RandomSource, SplitIsDeterministic)
{
    const pdmp::RandomSource root(9);
    auto a = root.split(5);
    auto b = root.split(5);
    auto c = root.split(6);
    EXPECT_EQ(a.uniform(), b.uniform());
    EXPECT_NE(a.uniform(), c.uniform());
}

TEST(Trajectory, PushRequiresIncreasingTimes)
{
    pdmp::Trajectory traj(1.0);
    traj.push(0.0, Vector{0}, Vector{1});
    traj.push(0.5, Vector{0.5}, Vector{-1});
    EXPECT_THROW(traj.push(0.5, Vector{0.5}, Vector{1}), std::invalid_argument);
    EXPECT_THROW(traj.push(0.4, Vector{0.5}, Vector{1}), std::invalid_argument);
}

TEST(Trajectory, PositionLookup)
{
    pdmp::Trajectory traj(2.0);
    traj.push(0.0, Vector{0}, Vector{1});
    traj.push(1.0, Vector{1}, Vector{-1});
    traj.push(2.5, Vector{-0.5}, Vector{1});
    EXPECT_DOUBLE_EQ(traj.position_at(0.5)[0], 0.5);
    EXPECT_DOUBLE_EQ(traj.position_at(1.5)[0], 0.5);
    EXPECT_EQ(traj.segment_index(0.0), 0u);
    EXPECT_EQ(traj.segment_index(1.0), 1u);
    EXPECT_EQ(traj.segment_index(2.0), 1u);
}

TEST(Counters, Accumulate)
{
    pdmp::Counters a{1, 10, 2};
    a += pdmp::Counters{2, 5, 1};
    EXPECT_EQ(a.events, 3u);
    EXPECT_EQ(a.rate_evals, 15u);
    EXPECT_EQ(a.thinning_rejections, 3u);
}
