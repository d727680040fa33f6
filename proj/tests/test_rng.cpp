#include "pbit/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace pbit;

TEST(RandomStream, ReplaysIdentically)
{
    RandomStream a(42, 3);
    RandomStream b(42, 3);
    for (int i = 0; i < 1000; ++i)
    {
        ASSERT_EQ(a.next_u64(), b.next_u64());
    }
}

TEST(RandomStream, StreamsAndDomainsDiffer)
{
    RandomStream base(42, 3);
    RandomStream other_id(42, 4);
    RandomStream other_seed(43, 3);
    RandomStream other_domain(42, 3, RandomStream::Domain::Retention);
    const auto first = base.next_u64();
    EXPECT_NE(first, other_id.next_u64());
    EXPECT_NE(first, other_seed.next_u64());
    EXPECT_NE(first, other_domain.next_u64());
}

TEST(RandomStream, MatchesStandardEngineKeyedBySeedSeq)
{
    // Independent construction from the standard components the stream is specified by.
    const std::uint64_t seed = 0x123456789abcdefULL;
    const std::uint64_t id = 17;
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32), 0x70626974u};
    std::mt19937_64 engine(seq);
    RandomStream stream(seed, id);
    for (int i = 0; i < 100; ++i)
    {
        const std::uint64_t x = engine();
        ASSERT_EQ(stream.uniform(), static_cast<double>(x >> 11) / 9007199254740992.0);
    }
}

TEST(RandomStream, UniformMoments)
{
    RandomStream r(7, 0);
    const int n = 200000;
    double sum = 0.0;
    double sum2 = 0.0;
    double lo = 1.0;
    double hi = 0.0;
    for (int i = 0; i < n; ++i)
    {
        const double u = r.uniform();
        sum += u;
        sum2 += u * u;
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    const double mean = sum / n;
    // Standard error of the mean is sqrt(1/12 / n) = 6.5e-4.
    EXPECT_NEAR(mean, 0.5, 4 * 6.5e-4);
    EXPECT_NEAR(sum2 / n - mean * mean, 1.0 / 12.0, 2e-3);
    EXPECT_GE(lo, 0.0);
    EXPECT_LT(hi, 1.0);
}

TEST(RandomStream, UniformRange)
{
    RandomStream r(7, 1);
    for (int i = 0; i < 10000; ++i)
    {
        const double u = r.uniform(-0.005, 0.005);
        ASSERT_GE(u, -0.005);
        ASSERT_LT(u, 0.005);
    }
}

TEST(RandomStream, NormalMoments)
{
    RandomStream r(9, 2);
    const int n = 200000;
    double sum = 0.0;
    double sum2 = 0.0;
    int beyond_two = 0;
    for (int i = 0; i < n; ++i)
    {
        const double z = r.normal();
        sum += z;
        sum2 += z * z;
        beyond_two += std::abs(z) > 2.0 ? 1 : 0;
    }
    EXPECT_NEAR(sum / n, 0.0, 4.0 / std::sqrt(n));
    EXPECT_NEAR(sum2 / n, 1.0, 0.02);
    // P(|Z| > 2) = 0.0455
    EXPECT_NEAR(static_cast<double>(beyond_two) / n, 0.0455, 0.003);
}
