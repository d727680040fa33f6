#pragma once

#include "pbit/core.hpp"

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pbit
{

/// Largest machine the exact oracle will enumerate.
inline constexpr std::size_t kMaxEnumerationBits = 24;

/**
 * A probability vector over 2^width states.
 *
 * State index convention (used throughout): the first bit of an ordered bit list is the most significant,
 * so for an AND gate (A, B, C) the index is the artificial node 4A + 2B + C and reads "ABC" in binary.
 */
struct Distribution
{
    std::size_t width{0};
    std::vector<double> probabilities;

    double operator[](std::uint64_t state) const { return probabilities.at(state); }

    double total() const
    {
        double sum = 0.0;
        double carry = 0.0;
        for (const double p : probabilities)
        {
            const double t = sum + p;
            carry += std::abs(sum) >= std::abs(p) ? (sum - t) + p : (p - t) + sum;
            sum = t;
        }
        return sum + carry;
    }
};

/// Exact enumerated Boltzmann probabilities of a single machine; width equals the p-bit count.
using ExactDistribution = Distribution;

inline std::string state_bits(std::uint64_t state, std::size_t width)
{
    std::string bits(width, '0');
    for (std::size_t k = 0; k < width; ++k)
    {
        if ((state >> (width - 1 - k)) & 1u)
        {
            bits[k] = '1';
        }
    }
    return bits;
}

/// Value (0/1) of p-bit `i` in state index `state` of an n-bit machine.
constexpr int state_bit(std::uint64_t state, std::size_t i, std::size_t n) noexcept
{
    return static_cast<int>((state >> (n - 1 - i)) & 1u);
}

/// E = -I0 ( sum_{i,j} 1/2 J_ij m_i m_j + sum_i h_i m_i ) over bipolar m.
inline double energy(const CouplingMatrix &coupling, std::span<const int> state)
{
    const std::size_t n = coupling.size();
    if (state.size() != n)
    {
        throw ArgumentError("energy: state length differs from p-bit count");
    }
    for (const int m : state)
    {
        if (m != 1 && m != -1)
        {
            throw ArgumentError("energy: state entries must be bipolar (+1 or -1)");
        }
    }
    double pair = 0.0;
    double bias = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        const auto row = coupling.row(i);
        for (std::size_t j = 0; j < n; ++j)
        {
            pair += 0.5 * row[j] * state[i] * state[j];
        }
        bias += coupling.h(i) * state[i];
    }
    return -coupling.I0() * (pair + bias);
}

inline std::vector<int> bipolar_state(std::uint64_t state, std::size_t n)
{
    std::vector<int> m(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        m[i] = 2 * state_bit(state, i, n) - 1;
    }
    return m;
}

/**
 * Energies of all 2^n states, indexed by state. Walks a Gray code so each step flips one spin and costs
 * O(n); the running value is re-anchored with a direct evaluation every 4096 states to bound drift.
 */
inline std::vector<double> enumerate_energies(const CouplingMatrix &coupling)
{
    const std::size_t n = coupling.size();
    if (n > kMaxEnumerationBits)
    {
        throw CapacityError("enumeration limited to " + std::to_string(kMaxEnumerationBits) + " p-bits, got " +
                            std::to_string(n));
    }
    const std::uint64_t count = std::uint64_t{1} << n;
    std::vector<double> energies(count);
    std::vector<int> m(n, -1);
    double e = energy(coupling, m);
    energies[0] = e;
    for (std::uint64_t step = 1; step < count; ++step)
    {
        const std::uint64_t gray = step ^ (step >> 1);
        // Flipped bit position in index space -> p-bit index (MSB first).
        const auto bit = static_cast<std::size_t>(__builtin_ctzll(step));
        const std::size_t i = n - 1 - bit;
        const auto row = coupling.row(i);
        double field = coupling.h(i);
        for (std::size_t j = 0; j < n; ++j)
        {
            field += row[j] * m[j];
        }
        // E changes by 2 I0 m_i field when m_i flips.
        e += 2.0 * coupling.I0() * m[i] * field;
        m[i] = -m[i];
        if ((step & 0xFFFu) == 0)
        {
            e = energy(coupling, m);
        }
        energies[gray] = e;
    }
    return energies;
}

/**
 * P(state) proportional to exp(-E) over all states consistent with the clamps (clamped bits fixed to their
 * rail; other states get probability 0). Clamps may be empty (no clamping) or one mode per p-bit.
 */
inline ExactDistribution boltzmann_distribution(const CouplingMatrix &coupling,
                                                std::span<const TerminalMode> clamps = {})
{
    const std::size_t n = coupling.size();
    if (!clamps.empty() && clamps.size() != n)
    {
        throw ArgumentError("boltzmann_distribution: one terminal mode per p-bit required");
    }
    std::uint64_t clamp_mask = 0;
    std::uint64_t clamp_value = 0;
    for (std::size_t i = 0; i < clamps.size(); ++i)
    {
        if (clamps[i].is_wired())
        {
            throw UnsupportedConfiguration("boltzmann_distribution: wired p-bits have no Boltzmann oracle");
        }
        if (clamps[i].is_clamped())
        {
            const std::uint64_t bit = std::uint64_t{1} << (n - 1 - i);
            clamp_mask |= bit;
            if (clamps[i].rail() == LogicLevel::High)
            {
                clamp_value |= bit;
            }
        }
    }

    const std::vector<double> energies = enumerate_energies(coupling);
    double e_min = INFINITY;
    for (std::uint64_t s = 0; s < energies.size(); ++s)
    {
        if ((s & clamp_mask) == clamp_value)
        {
            e_min = std::min(e_min, energies[s]);
        }
    }
    ExactDistribution dist{n, std::vector<double>(energies.size(), 0.0)};
    for (std::uint64_t s = 0; s < energies.size(); ++s)
    {
        if ((s & clamp_mask) == clamp_value)
        {
            dist.probabilities[s] = std::exp(-(energies[s] - e_min));
        }
    }
    const double z = dist.total();
    for (double &p : dist.probabilities)
    {
        p /= z;
    }
    return dist;
}

inline double euclidean_distance(const Distribution &p, const Distribution &q)
{
    if (p.width != q.width || p.probabilities.size() != q.probabilities.size())
    {
        throw ArgumentError("euclidean_distance: distributions live on different state spaces");
    }
    double sum = 0.0;
    for (std::size_t s = 0; s < p.probabilities.size(); ++s)
    {
        const double d = p.probabilities[s] - q.probabilities[s];
        sum += d * d;
    }
    return std::sqrt(sum);
}

/// Marginal over the listed bit positions of `dist` (first listed becomes most significant).
inline Distribution marginal(const Distribution &dist, std::span<const std::size_t> keep)
{
    const std::size_t n = dist.width;
    for (const std::size_t i : keep)
    {
        if (i >= n)
        {
            throw ArgumentError("marginal: bit position out of range");
        }
    }
    Distribution out{keep.size(), std::vector<double>(std::size_t{1} << keep.size(), 0.0)};
    for (std::uint64_t s = 0; s < dist.probabilities.size(); ++s)
    {
        std::uint64_t key = 0;
        for (const std::size_t i : keep)
        {
            key = (key << 1) | static_cast<std::uint64_t>(state_bit(s, i, n));
        }
        out.probabilities[key] += dist.probabilities[s];
    }
    return out;
}

} // namespace pbit
