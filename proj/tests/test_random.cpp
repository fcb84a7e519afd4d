#include "rle/parallel.hpp"
#include "rle/random.hpp"
#include "rle/stats.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <stdexcept>
#include <vector>

using namespace rle;

// Known-answer vectors from the Random123 distribution (kat_vectors).
TEST(Philox, KnownAnswerZero)
{
    const auto out = Philox4x32::generate({0, 0, 0, 0}, {0, 0});
    const Philox4x32::Block expected = {0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u};
    EXPECT_EQ(out, expected);
}

TEST(Philox, KnownAnswerOnes)
{
    const auto out = Philox4x32::generate({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                          {0xffffffffu, 0xffffffffu});
    const Philox4x32::Block expected = {0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu};
    EXPECT_EQ(out, expected);
}

TEST(Philox, KnownAnswerPi)
{
    const auto out = Philox4x32::generate({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                          {0xa4093822u, 0x299f31d0u});
    const Philox4x32::Block expected = {0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u};
    EXPECT_EQ(out, expected);
}

TEST(SplitMix64, KnownAnswer)
{
    // First output of the reference generator seeded with 0.
    EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafull);
}

TEST(RandomStream, SameSeedAndStreamReproduce)
{
    RandomStream a(42, 7), b(42, 7);
    for (int i = 0; i < 1000; ++i)
        ASSERT_EQ(a.normal(), b.normal());
}

TEST(RandomStream, StreamsDiffer)
{
    RandomStream a(42, 0), b(42, 1), c(43, 0);
    EXPECT_NE(a.next_u64(), b.next_u64());
    RandomStream a2(42, 0);
    EXPECT_NE(a2.next_u64(), c.next_u64());
}

TEST(RandomStream, UniformInOpenInterval)
{
    RandomStream s(1, 0);
    for (int i = 0; i < 100000; ++i)
    {
        const double u = s.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(RandomStream, NormalMoments)
{
    RandomStream s(2024, 3);
    const int n = 200000;
    std::vector<double> x(n), x2(n);
    for (int i = 0; i < n; ++i)
    {
        x[i] = s.normal();
        x2[i] = x[i] * x[i];
    }
    const auto m1 = stats::mean_estimate(x);
    const auto m2 = stats::mean_estimate(x2);
    EXPECT_LT(std::abs(m1.mean), 4 * m1.stderr_);
    EXPECT_LT(std::abs(m2.mean - 1), 4 * m2.stderr_);
    EXPECT_GT(stats::ks_test_normal(x).p_value, 1e-3);
}

TEST(RandomStream, CountsBlocks)
{
    RandomStream s(0, 0);
    EXPECT_EQ(s.blocks_used(), 0u);
    s.next_u64();
    s.next_u64();
    EXPECT_EQ(s.blocks_used(), 1u);
    s.next_u64();
    EXPECT_EQ(s.blocks_used(), 2u);
}

TEST(ParallelFor, VisitsEveryIndexOnce)
{
    for (unsigned threads : {1u, 2u, 4u})
    {
        std::vector<std::atomic<int>> hits(1000);
        parallel_for(hits.size(), threads, [&](std::size_t i) { ++hits[i]; });
        for (const auto& h : hits)
            ASSERT_EQ(h.load(), 1);
    }
}

TEST(ParallelFor, RethrowsLowestFailingIndex)
{
    for (unsigned threads : {1u, 3u})
    {
        try
        {
            parallel_for(100, threads, [](std::size_t i) {
                if (i == 17 || i == 60)
                    throw std::runtime_error(std::to_string(i));
            });
            FAIL() << "expected an exception";
        }
        catch (const std::runtime_error& e)
        {
            EXPECT_STREQ(e.what(), "17");
        }
    }
}
