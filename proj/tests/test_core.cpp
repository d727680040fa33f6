#include "pbit/core.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace pbit;

TEST(Sigmoid, SymmetryPoint)
{
    EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
}

TEST(Sigmoid, RailValues)
{
    // 1 / (1 + e^-10) and its complement, evaluated at 30 digits.
    EXPECT_NEAR(sigmoid(5.0), 0.999954602131297565, 1e-15);
    EXPECT_NEAR(sigmoid(-5.0), 4.53978687024343e-05, 1e-18);
    EXPECT_NEAR(sigmoid(-5.0), 1.0 - sigmoid(5.0), 1e-15);
}

TEST(Sigmoid, EqualsHalfTanhShift)
{
    for (double x = -6.0; x <= 6.0; x += 0.37)
    {
        EXPECT_NEAR(sigmoid(x), 0.5 * (1.0 + std::tanh(x)), 1e-15) << x;
    }
}

TEST(SamplePBit, MidpointIsFair)
{
    EXPECT_DOUBLE_EQ(pbit_high_probability(Voltage{2.5}), 0.5);
    EXPECT_EQ(sample_pbit(Voltage{2.5}, 0.49), LogicLevel::High);
    EXPECT_EQ(sample_pbit(Voltage{2.5}, 0.51), LogicLevel::Low);
}

TEST(SamplePBit, Rails)
{
    EXPECT_NEAR(pbit_high_probability(Voltage{5.0}), 0.99995460213, 1e-10);
    EXPECT_EQ(sample_pbit(Voltage{0.0}, 0.3), LogicLevel::Low);
    EXPECT_EQ(sample_pbit(Voltage{5.0}, 0.3), LogicLevel::High);
    // A rail-clamped p-bit still flips when u falls below the tiny residual bias.
    EXPECT_EQ(sample_pbit(Voltage{0.0}, 1e-5), LogicLevel::High);
}

TEST(SamplePBit, RejectsOutOfRangeVoltage)
{
    EXPECT_THROW(sample_pbit(Voltage{-0.01}, 0.5), ContractViolation);
    EXPECT_THROW(sample_pbit(Voltage{5.01}, 0.5), ContractViolation);
    EXPECT_THROW(sample_pbit(Voltage{std::nan("")}, 0.5), ContractViolation);
}

TEST(Encoding, RoundTrip)
{
    for (double i = -5.0; i <= 5.0; i += 0.25)
    {
        EXPECT_DOUBLE_EQ(decode_input(Voltage{encode_input(i)}), i);
    }
    EXPECT_DOUBLE_EQ(encode_input(-5.0), 0.0);
    EXPECT_DOUBLE_EQ(encode_input(5.0), 5.0);
}

TEST(CouplingMatrixTest, Validation)
{
    EXPECT_THROW(CouplingMatrix(2, {0, 1, 2, 0}, {0, 0}, 1.0), ConfigurationError); // asymmetric
    EXPECT_THROW(CouplingMatrix(2, {1, 0, 0, 0}, {0, 0}, 1.0), ConfigurationError); // diagonal
    EXPECT_THROW(CouplingMatrix(2, {0, 1, 1, 0}, {0}, 1.0), ConfigurationError);    // h size
    EXPECT_THROW(CouplingMatrix(2, {0, 1, 1, 0}, {0, 0}, -0.1), ConfigurationError);
    EXPECT_THROW(CouplingMatrix::from_rows({{0, 1}, {1}}, {0, 0}, 1.0), ConfigurationError);
    const auto c = CouplingMatrix::from_rows({{0, 1}, {1, 0}}, {0.5, -0.5}, 0.8);
    EXPECT_EQ(c.size(), 2u);
    EXPECT_DOUBLE_EQ(c.J(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(c.h(1), -0.5);
    EXPECT_DOUBLE_EQ(c.with_I0(2.0).I0(), 2.0);
}

namespace
{
const CouplingMatrix kAnd = CouplingMatrix::from_rows({{0, -1, 2}, {-1, 0, 2}, {2, 2, 0}}, {1, 1, -2}, 1.0);
const std::vector<TerminalMode> kFree(3, TerminalMode::free());
} // namespace

TEST(WeightInputs, ZeroCorrelationGivesMidpoint)
{
    const std::vector<LogicLevel> out{LogicLevel::High, LogicLevel::Low, LogicLevel::High};
    const auto v = weight_inputs(kAnd.with_I0(0.0), out, kFree, {});
    for (const auto &x : v)
    {
        EXPECT_DOUBLE_EQ(x->volts, 2.5);
    }
}

TEST(WeightInputs, HandComputedField)
{
    // m = (+1, -1, +1): field_0 = 1 + (-1)(-1) + 2(1) = 4, field_1 = 1 - 1 + 2 = 2, field_2 = -2 + 2 - 2 = -2.
    const std::vector<LogicLevel> out{LogicLevel::High, LogicLevel::Low, LogicLevel::High};
    const auto v = weight_inputs(kAnd.with_I0(0.5), out, kFree, {});
    EXPECT_DOUBLE_EQ(v[0]->volts, (0.5 * 4 + 5) / 2);
    EXPECT_DOUBLE_EQ(v[1]->volts, (0.5 * 2 + 5) / 2);
    EXPECT_DOUBLE_EQ(v[2]->volts, (0.5 * -2 + 5) / 2);
}

TEST(WeightInputs, Saturation)
{
    // I' = 9 saturates to 5, i.e. V = 5 V.
    const auto c = CouplingMatrix(1, {0.0}, {9.0}, 1.0);
    const std::vector<LogicLevel> out{LogicLevel::Low};
    const std::vector<TerminalMode> modes{TerminalMode::free()};
    EXPECT_DOUBLE_EQ(weight_inputs(c, out, modes, {})[0]->volts, 5.0);
    const auto neg = CouplingMatrix(1, {0.0}, {-9.0}, 1.0);
    EXPECT_DOUBLE_EQ(weight_inputs(neg, out, modes, {})[0]->volts, 0.0);
}

TEST(WeightInputs, ClampsAndWires)
{
    const std::vector<LogicLevel> out{LogicLevel::Low, LogicLevel::Low, LogicLevel::Low};
    const std::vector<TerminalMode> modes{TerminalMode::clamped_high(), TerminalMode::clamped_low(),
                                          TerminalMode::wired(7)};
    const auto v = weight_inputs(kAnd, out, modes, {});
    EXPECT_DOUBLE_EQ(v[0]->volts, 5.0);
    EXPECT_DOUBLE_EQ(v[1]->volts, 0.0);
    EXPECT_FALSE(v[2].has_value());
}

TEST(WeightInputs, DimensionMismatch)
{
    const std::vector<LogicLevel> out{LogicLevel::Low, LogicLevel::Low};
    EXPECT_THROW(weight_inputs(kAnd, out, kFree, {}), ConfigurationError);
}

TEST(Quantization, TenBitMidpointIsCode512)
{
    const QuantizationConfig q{10, 0, 5.0};
    // 2.5 V -> code 2.5 * 1024 / 5 = 512 -> exactly 2.5 V.
    EXPECT_DOUBLE_EQ(quantize_dac(Voltage{2.5}, q).volts, 2.5);
    EXPECT_DOUBLE_EQ(quantize_dac(Voltage{2.5}, q).volts * 1024 / 5.0, 512.0);
}

TEST(Quantization, RoundsHalfAwayFromZeroAndClips)
{
    const QuantizationConfig q{2, 0, 4.0}; // codes 0..3, 1 V per code
    EXPECT_DOUBLE_EQ(quantize_dac(Voltage{1.5}, q).volts, 2.0);
    EXPECT_DOUBLE_EQ(quantize_dac(Voltage{1.49}, q).volts, 1.0);
    EXPECT_DOUBLE_EQ(quantize_dac(Voltage{3.9}, q).volts, 3.0); // top code is 2^b - 1
    EXPECT_DOUBLE_EQ(quantize_dac(Voltage{0.0}, q).volts, 0.0);
    EXPECT_DOUBLE_EQ(quantize_adc(Voltage{1.5}, {0, 2, 4.0}).volts, 2.0);
}

TEST(Quantization, ZeroBitsIsIdeal)
{
    EXPECT_DOUBLE_EQ(quantize_dac(Voltage{1.2345}, {}).volts, 1.2345);
}

TEST(Quantization, Validation)
{
    EXPECT_THROW((QuantizationConfig{25, 0, 5.0}.validate()), ConfigurationError);
    EXPECT_THROW((QuantizationConfig{8, 0, 0.0}.validate()), ConfigurationError);
}

TEST(Retention, FromBarrier)
{
    EXPECT_DOUBLE_EQ(retention_time_from_barrier(Seconds{1e-9}, 0.0).count(), 1e-9);
    // 1 ns * e^13.8 = 0.98461 ms
    EXPECT_NEAR(retention_time_from_barrier(Seconds{1e-9}, 13.8).count(), 0.98461e-3, 1e-8);
    // 1 ps * e^20 = 0.48517 ms (e^20 = 4.85e8)
    EXPECT_NEAR(retention_time_from_barrier(Seconds{1e-12}, 20.0).count(), 0.48517e-3, 1e-8);
    EXPECT_EQ(to_virtual_time(retention_time_from_barrier(Seconds{1e-9}, 13.8)), Duration{985});
}

TEST(Retention, Errors)
{
    EXPECT_THROW(retention_time_from_barrier(Seconds{0.0}, 1.0), ArgumentError);
    EXPECT_THROW(retention_time_from_barrier(Seconds{1e-9}, -1.0), ArgumentError);
    EXPECT_THROW(retention_time_from_barrier(Seconds{1e-9}, 1000.0), RangeError);
    EXPECT_THROW(to_virtual_time(retention_time_from_barrier(Seconds{1.0}, 40.0)), RangeError);
}

TEST(PBitConfigTest, Validation)
{
    PBitConfig c;
    EXPECT_NO_THROW(c.validate());
    c.retention_time = Duration{0};
    EXPECT_THROW(c.validate(), ConfigurationError);
    c = {};
    c.jitter_fraction = 1.0;
    EXPECT_THROW(c.validate(), ConfigurationError);
    c = {};
    c.phase = Duration{-1};
    EXPECT_THROW(c.validate(), ConfigurationError);
}
