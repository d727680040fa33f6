#pragma once

#include "pbit/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pbit
{

/// Virtual time. Integer microseconds so event times compare exactly.
using Duration = std::chrono::microseconds;

inline constexpr double kRailVolts = 5.0;
inline constexpr double kMidVolts = 2.5;
/// Weight-logic output is saturated to [-kInputLimit, +kInputLimit] before encoding.
inline constexpr double kInputLimit = 5.0;

enum class LogicLevel : std::uint8_t
{
    Low = 0,
    High = 1,
};

constexpr int bipolar(LogicLevel level) noexcept
{
    return level == LogicLevel::High ? 1 : -1;
}

constexpr LogicLevel from_bit(bool bit) noexcept
{
    return bit ? LogicLevel::High : LogicLevel::Low;
}

constexpr double rail_voltage(LogicLevel level) noexcept
{
    return level == LogicLevel::High ? kRailVolts : 0.0;
}

struct Voltage
{
    double volts{0.0};

    constexpr auto operator<=>(const Voltage &) const = default;
};

/// Symmetric couplings J (zero diagonal), biases h and the correlation strength I0 of one Boltzmann machine.
class CouplingMatrix
{
  public:
    CouplingMatrix() = default;

    CouplingMatrix(std::size_t n, std::vector<double> j_row_major, std::vector<double> h, double i0)
        : n_{n}, j_{std::move(j_row_major)}, h_{std::move(h)}, i0_{i0}
    {
        if (j_.size() != n_ * n_ || h_.size() != n_)
        {
            throw ConfigurationError("coupling matrix: J must be n*n and h must have n entries");
        }
        if (!(i0_ >= 0.0) || !std::isfinite(i0_))
        {
            throw ConfigurationError("coupling matrix: I0 must be finite and non-negative");
        }
        for (std::size_t i = 0; i < n_; ++i)
        {
            if (j_[i * n_ + i] != 0.0)
            {
                throw ConfigurationError("coupling matrix: J must have a zero diagonal");
            }
            for (std::size_t k = i + 1; k < n_; ++k)
            {
                if (j_[i * n_ + k] != j_[k * n_ + i])
                {
                    throw ConfigurationError("coupling matrix: J must be symmetric within a machine");
                }
            }
        }
    }

    static CouplingMatrix from_rows(const std::vector<std::vector<double>> &rows, std::vector<double> h, double i0)
    {
        std::vector<double> flat;
        flat.reserve(rows.size() * rows.size());
        for (const auto &row : rows)
        {
            if (row.size() != rows.size())
            {
                throw ConfigurationError("coupling matrix: J must be square");
            }
            flat.insert(flat.end(), row.begin(), row.end());
        }
        return CouplingMatrix(rows.size(), std::move(flat), std::move(h), i0);
    }

    static CouplingMatrix zeros(std::size_t n, double i0 = 1.0)
    {
        return CouplingMatrix(n, std::vector<double>(n * n, 0.0), std::vector<double>(n, 0.0), i0);
    }

    std::size_t size() const noexcept { return n_; }
    double J(std::size_t i, std::size_t k) const noexcept { return j_[i * n_ + k]; }
    double h(std::size_t i) const noexcept { return h_[i]; }
    double I0() const noexcept { return i0_; }

    std::span<const double> row(std::size_t i) const noexcept { return {j_.data() + i * n_, n_}; }
    std::span<const double> biases() const noexcept { return h_; }

    CouplingMatrix with_I0(double i0) const { return CouplingMatrix(n_, j_, h_, i0); }

    friend bool operator==(const CouplingMatrix &, const CouplingMatrix &) = default;

  private:
    std::size_t n_{0};
    std::vector<double> j_;
    std::vector<double> h_;
    double i0_{1.0};
};

struct TerminalMode
{
    enum class Kind : std::uint8_t
    {
        Free,
        ClampedHigh,
        ClampedLow,
        Wired,
    };

    Kind kind{Kind::Free};
    std::size_t source{0}; // global p-bit id, meaningful only for Wired

    static constexpr TerminalMode free() noexcept { return {}; }
    static constexpr TerminalMode clamped_high() noexcept { return {Kind::ClampedHigh, 0}; }
    static constexpr TerminalMode clamped_low() noexcept { return {Kind::ClampedLow, 0}; }
    static constexpr TerminalMode clamped(LogicLevel level) noexcept
    {
        return level == LogicLevel::High ? clamped_high() : clamped_low();
    }
    static constexpr TerminalMode wired(std::size_t source_id) noexcept { return {Kind::Wired, source_id}; }

    constexpr bool is_clamped() const noexcept { return kind == Kind::ClampedHigh || kind == Kind::ClampedLow; }
    constexpr bool is_wired() const noexcept { return kind == Kind::Wired; }
    constexpr LogicLevel rail() const noexcept
    {
        return kind == Kind::ClampedHigh ? LogicLevel::High : LogicLevel::Low;
    }

    friend constexpr bool operator==(const TerminalMode &, const TerminalMode &) = default;
};

struct PBitConfig
{
    std::size_t id{0};
    Duration retention_time{std::chrono::milliseconds(200)};
    Duration phase{0};
    double jitter_fraction{0.005};
    TerminalMode mode{};

    void validate() const
    {
        if (retention_time <= Duration::zero())
        {
            throw ConfigurationError("p-bit " + std::to_string(id) + ": retention time must be positive");
        }
        if (phase < Duration::zero())
        {
            throw ConfigurationError("p-bit " + std::to_string(id) + ": phase must be non-negative");
        }
        if (!(jitter_fraction >= 0.0 && jitter_fraction < 1.0))
        {
            throw ConfigurationError("p-bit " + std::to_string(id) + ": jitter fraction must lie in [0, 1)");
        }
    }
};

/// dac_bits / adc_bits of 0 mean an ideal (unquantized) path.
struct QuantizationConfig
{
    int dac_bits{0};
    int adc_bits{0};
    double vref{kRailVolts};

    void validate() const
    {
        if (dac_bits < 0 || dac_bits > 24 || adc_bits < 0 || adc_bits > 24)
        {
            throw ConfigurationError("quantization: converter resolution must lie in [0, 24] bits");
        }
        if (!(vref > 0.0))
        {
            throw ConfigurationError("quantization: vref must be positive");
        }
    }
};

/// S(x) = 1 / (1 + e^{-2x}), equivalently (1 + tanh x) / 2.
inline double sigmoid(double x) noexcept
{
    return 1.0 / (1.0 + std::exp(-2.0 * x));
}

inline double saturate(double current) noexcept
{
    return std::clamp(current, -kInputLimit, kInputLimit);
}

// The p-bit decodes its input as m = 2 V - 5; the weight logic encodes with the exact inverse.
inline double encode_input(double current) noexcept
{
    return (current + kInputLimit) / 2.0;
}

inline double decode_input(Voltage v) noexcept
{
    return 2.0 * v.volts - kInputLimit;
}

namespace detail
{
inline double quantize(double volts, int bits, double vref)
{
    if (bits == 0)
    {
        return volts;
    }
    const double levels = std::ldexp(1.0, bits);
    // std::round rounds half away from zero.
    const double code = std::clamp(std::round(volts * levels / vref), 0.0, levels - 1.0);
    return code * vref / levels;
}
} // namespace detail

/// DAC write: nearest code (ties away from zero) in [0, 2^b - 1], volts = code * vref / 2^b.
inline Voltage quantize_dac(Voltage v, const QuantizationConfig &q)
{
    return Voltage{detail::quantize(v.volts, q.dac_bits, q.vref)};
}

/// ADC read on the p-bit side; same code map as the DAC.
inline Voltage quantize_adc(Voltage v, const QuantizationConfig &q)
{
    return Voltage{detail::quantize(v.volts, q.adc_bits, q.vref)};
}

/// One p-bit update: bias = S(2 V - 5), output High iff bias > u. The caller supplies u ~ U[0, 1).
inline LogicLevel sample_pbit(Voltage v_in, double u)
{
    if (!(v_in.volts >= 0.0 && v_in.volts <= kRailVolts))
    {
        throw ContractViolation("sample_pbit: input voltage " + std::to_string(v_in.volts) +
                                " V lies outside [0, 5] V");
    }
    const double bias = sigmoid(decode_input(v_in));
    return from_bit(bias > u);
}

/// Probability that sample_pbit returns High for the given input.
inline double pbit_high_probability(Voltage v_in) noexcept
{
    return sigmoid(decode_input(v_in));
}

/**
 * Weight logic, in place. `outputs` is an atomic snapshot of the machine's outputs.
 * Free p-bits get the saturated, encoded (and optionally DAC-quantized) I0 (h + J m);
 * clamped p-bits get their rail; wired entries of `inputs` are left untouched.
 */
inline void weight_inputs_into(const CouplingMatrix &coupling, std::span<const LogicLevel> outputs,
                               std::span<const TerminalMode> modes, const QuantizationConfig &q,
                               std::span<Voltage> inputs)
{
    const std::size_t n = coupling.size();
    if (outputs.size() != n || modes.size() != n || inputs.size() != n)
    {
        throw ConfigurationError("weight_inputs: dimension mismatch between couplings, outputs and modes");
    }
    for (std::size_t j = 0; j < n; ++j)
    {
        const TerminalMode mode = modes[j];
        if (mode.is_wired())
        {
            continue;
        }
        if (mode.is_clamped())
        {
            inputs[j] = Voltage{rail_voltage(mode.rail())};
            continue;
        }
        double field = coupling.h(j);
        const auto row = coupling.row(j);
        for (std::size_t i = 0; i < n; ++i)
        {
            field += row[i] * bipolar(outputs[i]);
        }
        const double current = saturate(coupling.I0() * field);
        inputs[j] = quantize_dac(Voltage{encode_input(current)}, q);
    }
}

/// Value-returning form of weight_inputs_into; wired p-bits map to std::nullopt.
inline std::vector<std::optional<Voltage>> weight_inputs(const CouplingMatrix &coupling,
                                                         std::span<const LogicLevel> outputs,
                                                         std::span<const TerminalMode> modes,
                                                         const QuantizationConfig &q)
{
    std::vector<Voltage> inputs(coupling.size(), Voltage{kMidVolts});
    weight_inputs_into(coupling, outputs, modes, q, inputs);
    std::vector<std::optional<Voltage>> result(coupling.size());
    for (std::size_t j = 0; j < inputs.size() && j < modes.size(); ++j)
    {
        if (!modes[j].is_wired())
        {
            result[j] = inputs[j];
        }
    }
    return result;
}

using Seconds = std::chrono::duration<double>;

/// tau0 * exp(delta / kT) for a superparamagnet's energy barrier.
inline Seconds retention_time_from_barrier(Seconds tau0, double delta_over_kT)
{
    if (!(tau0.count() > 0.0) || !(delta_over_kT >= 0.0))
    {
        throw ArgumentError("retention_time_from_barrier: need tau0 > 0 and delta/kT >= 0");
    }
    const double value = tau0.count() * std::exp(delta_over_kT);
    if (!std::isfinite(value))
    {
        throw RangeError("retention_time_from_barrier: result overflows the duration representation");
    }
    return Seconds{value};
}

/// Rounds a real-valued duration to virtual time, rejecting values the integer clock cannot hold.
inline Duration to_virtual_time(Seconds t)
{
    const double micros = std::round(t.count() * 1e6);
    if (!std::isfinite(micros) || std::abs(micros) >= 9.0e18)
    {
        throw RangeError("duration does not fit the virtual clock");
    }
    return Duration{static_cast<Duration::rep>(micros)};
}

} // namespace pbit
