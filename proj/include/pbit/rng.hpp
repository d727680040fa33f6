#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace pbit
{

/**
 * Per-p-bit random stream.
 *
 * Each stream is an mt19937_64 keyed through std::seed_seq by (scenario seed, stream id, domain).
 * Both the engine and seed_seq are fully specified by the standard, and the conversion to real numbers
 * below avoids the implementation-defined std distributions, so streams replay bit-identically on any host.
 */
class RandomStream
{
  public:
    enum class Domain : std::uint32_t
    {
        PBit = 0x70626974u,      // "pbit"
        Retention = 0x72657465u, // "rete"
        Scenario = 0x7363656eu,  // "scen"
    };

    RandomStream(std::uint64_t seed, std::uint64_t stream_id, Domain domain = Domain::PBit)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32),
                          static_cast<std::uint32_t>(domain)};
        engine_.seed(seq);
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (one value per call; the partner is discarded).
    double normal()
    {
        double u1 = uniform();
        while (u1 <= 0.0)
        {
            u1 = uniform();
        }
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

  private:
    std::mt19937_64 engine_;
};

} // namespace pbit
