#include "pbit/engine.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

using namespace pbit;
using std::chrono::milliseconds;

namespace
{

NetworkSpec single_machine(std::size_t n, Duration tau_sample = milliseconds(1), double I0 = 0.0)
{
    NetworkSpec net;
    net.add_machine("m", CouplingMatrix::zeros(n, I0), tau_sample);
    return net;
}

NetworkSpec and_machine(double I0)
{
    NetworkSpec net;
    net.add_machine("and", CouplingMatrix::from_rows({{0, -1, 2}, {-1, 0, 2}, {2, 2, 0}}, {1, 1, -2}, I0),
                    milliseconds(1));
    return net;
}

} // namespace

TEST(Event, Ordering)
{
    const Event refresh{Duration{5}, EventKind::WeightRefresh, 0, 9};
    const Event update{Duration{5}, EventKind::PBitUpdate, 0, 1};
    const Event earlier{Duration{4}, EventKind::PBitUpdate, 0, 20};
    EXPECT_LT(refresh, update);
    EXPECT_LT(earlier, refresh);
    const Event a{Duration{5}, EventKind::PBitUpdate, 3, 1};
    const Event b{Duration{5}, EventKind::PBitUpdate, 0, 2};
    EXPECT_LT(a, b); // insertion order, not target id
}

TEST(Simulator, InitialScheduleRefreshBeforeUpdates)
{
    Simulator sim(single_machine(3), 1);
    std::vector<Event> seen;
    sim.set_observer([&](const Event &e, const Simulator &) { seen.push_back(e); });
    for (int i = 0; i < 4; ++i)
    {
        sim.step();
    }
    ASSERT_EQ(seen.size(), 4u);
    EXPECT_EQ(seen[0].kind, EventKind::WeightRefresh);
    EXPECT_EQ(seen[0].time, Duration{0});
    for (int i = 1; i < 4; ++i)
    {
        EXPECT_EQ(seen[i].kind, EventKind::PBitUpdate);
        EXPECT_EQ(seen[i].time, Duration{0});
        EXPECT_EQ(seen[i].target, static_cast<std::size_t>(i - 1));
    }
}

TEST(Simulator, PhasesSetFirstUpdateTimes)
{
    NetworkSpec net = single_machine(3, milliseconds(10));
    for (std::size_t i = 0; i < 3; ++i)
    {
        net.pbits[i].phase = milliseconds(static_cast<long>(i));
    }
    Simulator sim(net, 1);
    std::map<std::size_t, Duration> first;
    sim.set_observer([&](const Event &e, const Simulator &) {
        if (e.kind == EventKind::PBitUpdate && !first.contains(e.target))
        {
            first[e.target] = e.time;
        }
    });
    while (first.size() < 3)
    {
        sim.step();
    }
    EXPECT_EQ(first[0], milliseconds(0));
    EXPECT_EQ(first[1], milliseconds(1));
    EXPECT_EQ(first[2], milliseconds(2));
}

TEST(Simulator, DeterministicReplay)
{
    const NetworkSpec net = and_machine(0.8);
    const auto a = run(net, 99, RunBudget::sample_count(20000));
    const auto b = run(net, 99, RunBudget::sample_count(20000));
    const auto c = run(net, 100, RunBudget::sample_count(20000));
    EXPECT_EQ(a, b);
    EXPECT_FALSE(a == c);
}

TEST(Simulator, ZeroBudgetGivesEmptyTrace)
{
    EXPECT_TRUE(run(and_machine(0.8), 1, RunBudget::sample_count(0)).empty());
    EXPECT_TRUE(run(and_machine(0.8), 1, RunBudget::until(Duration{0})).empty());
}

TEST(Simulator, RefreshSamplingCadenceAndDecimation)
{
    const auto trace = run(and_machine(0.8), 1, RunBudget::sample_count(100));
    ASSERT_EQ(trace.size(), 100u);
    for (std::size_t s = 0; s < trace.size(); ++s)
    {
        EXPECT_EQ(trace.time(s), milliseconds(static_cast<long>(s)));
    }
    SimulatorOptions options;
    options.decimation = 7;
    const auto thin = run(and_machine(0.8), 1, RunBudget::sample_count(10), options);
    for (std::size_t s = 0; s < thin.size(); ++s)
    {
        EXPECT_EQ(thin.time(s), milliseconds(static_cast<long>(7 * s)));
    }
    options.decimation = 0;
    EXPECT_THROW(Simulator(and_machine(0.8), 1, options), ConfigurationError);
}

TEST(Simulator, UpdateSamplingCollapsesSameInstant)
{
    SimulatorOptions options;
    options.sample_mode = SampleMode::OnPBitUpdate;
    options.record_updates = true;
    NetworkSpec net = and_machine(0.8);
    for (auto &p : net.pbits)
    {
        p.jitter_fraction = 0.0;
    }
    const auto trace = run(net, 1, RunBudget::until(milliseconds(1000)), options);
    // Three p-bits in lockstep every 200 ms: t = 0, 200, ..., 800.
    EXPECT_EQ(trace.size(), 5u);
    EXPECT_EQ(trace.updates().size(), 15u);
}

TEST(Simulator, JitterBoundsRetentionIntervals)
{
    SimulatorOptions options;
    options.record_updates = true;
    NetworkSpec net = single_machine(2);
    net.pbits[0].jitter_fraction = 0.005;
    net.pbits[1].jitter_fraction = 0.0;
    const auto trace = run(net, 3, RunBudget::until(milliseconds(200 * 500)), options);
    std::map<std::size_t, Duration> last;
    bool varied = false;
    for (const auto &u : trace.updates())
    {
        if (last.contains(u.pbit))
        {
            const auto dt = (u.time - last[u.pbit]).count();
            if (u.pbit == 0)
            {
                EXPECT_GE(dt, 199000);
                EXPECT_LE(dt, 201000);
                varied = varied || dt != 200000;
            }
            else
            {
                EXPECT_EQ(dt, 200000);
            }
        }
        last[u.pbit] = u.time;
    }
    EXPECT_TRUE(varied);
}

TEST(Simulator, ClampedPBitFlipsAtResidualRate)
{
    NetworkSpec net = single_machine(1);
    net.pbits[0].mode = TerminalMode::clamped_low();
    net.pbits[0].retention_time = Duration{1};
    net.pbits[0].jitter_fraction = 0.0;
    net.machines[0].tau_sample = Duration{1'000'000'000};
    SimulatorOptions options;
    options.sample_mode = SampleMode::OnPBitUpdate;
    const std::size_t n = 2'000'000;
    const auto trace = run(net, 5, RunBudget::sample_count(n), options);
    std::size_t high = 0;
    for (std::size_t s = 1; s < trace.size(); ++s) // sample 0 is the initial refresh-time update
    {
        high += trace.at(s, 0) == LogicLevel::High ? 1 : 0;
    }
    const double expected = sigmoid(-5.0) * static_cast<double>(trace.size() - 1); // about 91
    EXPECT_NEAR(static_cast<double>(high), expected, 4.0 * std::sqrt(expected));
}

TEST(Simulator, WiredPBitFollowsSourceRail)
{
    // Source clamped high drives a wired p-bit in another machine: P(1) = sigmoid(5) while the source holds.
    NetworkSpec net;
    net.add_machine("src", CouplingMatrix::zeros(1), milliseconds(1));
    net.add_machine("dst", CouplingMatrix::zeros(1), milliseconds(1));
    net.pbits[0].mode = TerminalMode::clamped_high();
    net.connect(0, 1);
    net.logging_machine = 1;
    for (auto &p : net.pbits)
    {
        p.retention_time = Duration{10};
    }
    SimulatorOptions options;
    options.sample_mode = SampleMode::OnPBitUpdate;
    const auto trace = run(net, 8, RunBudget::sample_count(1'000'000), options);
    std::size_t low = 0;
    std::size_t total = 0;
    for (std::size_t s = 1; s < trace.size(); ++s)
    {
        if (trace.at(s, 0) == LogicLevel::High)
        {
            ++total;
            low += trace.at(s, 1) == LogicLevel::Low ? 1 : 0;
        }
    }
    const double expected = sigmoid(-5.0) * static_cast<double>(total);
    EXPECT_NEAR(static_cast<double>(low), expected, 4.0 * std::sqrt(expected) + 2.0);
}

TEST(Simulator, WireDelayReadsPastOutput)
{
    NetworkSpec net;
    net.add_machine("src", CouplingMatrix::zeros(1, 0.0), milliseconds(1));
    net.add_machine("dst", CouplingMatrix::zeros(1), milliseconds(1));
    net.pbits[0].retention_time = milliseconds(3);
    net.pbits[1].retention_time = milliseconds(7);
    net.connect(0, 1, milliseconds(5));
    Simulator sim(net, 4);
    std::vector<std::pair<Duration, LogicLevel>> history{{Duration::min(), sim.outputs()[0]}};
    int checked = 0;
    sim.set_observer([&](const Event &e, const Simulator &s) {
        if (e.kind != EventKind::PBitUpdate)
        {
            return;
        }
        if (e.target == 0)
        {
            history.emplace_back(e.time, s.outputs()[0]);
            return;
        }
        LogicLevel expected = history.front().second;
        for (const auto &[t, level] : history)
        {
            if (t > e.time - milliseconds(5))
            {
                break;
            }
            expected = level;
        }
        EXPECT_DOUBLE_EQ(s.bound_input(1).volts, rail_voltage(expected));
        ++checked;
    });
    while (sim.clock() < milliseconds(20000))
    {
        sim.step();
    }
    EXPECT_GT(checked, 2000);
}

TEST(Serialization, LockstepWithoutJitterStaysAtOne)
{
    NetworkSpec net = and_machine(0.8);
    for (auto &p : net.pbits)
    {
        p.jitter_fraction = 0.0;
    }
    SimulatorOptions options;
    options.record_updates = true;
    const auto trace = run(net, 1, RunBudget::until(milliseconds(200 * 1000)), options);
    EXPECT_DOUBLE_EQ(serialization_metric(trace, net, milliseconds(10)), 1.0);
    for (const double v : serialization_profile(trace, net, milliseconds(10), 300))
    {
        EXPECT_DOUBLE_EQ(v, 1.0);
    }
}

TEST(Serialization, StaggeredPhasesGiveZero)
{
    NetworkSpec net = and_machine(0.8);
    for (std::size_t i = 0; i < 3; ++i)
    {
        net.pbits[i].jitter_fraction = 0.0;
        net.pbits[i].phase = Duration{200000 * static_cast<long>(i) / 3};
    }
    SimulatorOptions options;
    options.record_updates = true;
    const auto trace = run(net, 1, RunBudget::until(milliseconds(200 * 100)), options);
    EXPECT_DOUBLE_EQ(serialization_metric(trace, net, milliseconds(10)), 0.0);
}

TEST(Serialization, Errors)
{
    const NetworkSpec net = and_machine(0.8);
    const auto trace = run(net, 1, RunBudget::sample_count(10));
    EXPECT_THROW(serialization_metric(trace, net, milliseconds(10)), ArgumentError); // no update log
    SimulatorOptions options;
    options.record_updates = true;
    const auto logged = run(net, 1, RunBudget::sample_count(1000), options);
    EXPECT_THROW(serialization_metric(logged, net, Duration{0}), ArgumentError);
    EXPECT_THROW(serialization_profile(logged, net, milliseconds(1), 0), ArgumentError);
}

TEST(Serialization, HandBuiltTrace)
{
    NetworkSpec net = single_machine(2);
    SimulationTrace trace(2);
    // p0 at 0, p1 at 0 (same instant: both count), p0 at 100, p1 at 105 (within 10 of p0), p0 at 300.
    trace.record_update(Duration{0}, 0);
    trace.record_update(Duration{0}, 1);
    trace.record_update(Duration{100}, 0);
    trace.record_update(Duration{105}, 1);
    trace.record_update(Duration{300}, 0);
    EXPECT_DOUBLE_EQ(serialization_metric(trace, net, Duration{10}), 3.0 / 5.0);
    EXPECT_DOUBLE_EQ(serialization_metric(trace, net, Duration{5}), 2.0 / 5.0);
    EXPECT_DOUBLE_EQ(serialization_metric(trace, net, Duration{10}, Duration{100}, Duration{301}), 1.0 / 3.0);
}

TEST(NetworkValidation, RejectsBadWiring)
{
    NetworkSpec net;
    net.add_machine("a", CouplingMatrix::zeros(2), milliseconds(1));
    net.add_machine("b", CouplingMatrix::zeros(2), milliseconds(1));
    NetworkSpec inside = net;
    inside.connect(0, 1);
    EXPECT_THROW(inside.validate(), ConfigurationError);
    NetworkSpec both = net;
    both.connect(0, 2);
    both.connect(3, 1);
    EXPECT_THROW(both.validate(), ConfigurationError);
    NetworkSpec dangling = net;
    dangling.pbits[2].mode = TerminalMode::wired(0);
    EXPECT_THROW(dangling.validate(), ConfigurationError);
    NetworkSpec ok = net;
    ok.connect(0, 2);
    EXPECT_NO_THROW(ok.validate());
    EXPECT_THROW(ok.connect(0, 9), ConfigurationError);
}

TEST(NetworkValidation, Words)
{
    NetworkSpec net = single_machine(3);
    net.labels = {{"X0", 0}, {"X1", 1}, {"X2", 2}};
    net.words["X"] = {0, 1, 2};
    net.clamp_word("X", 5);
    EXPECT_EQ(net.pbits[0].mode, TerminalMode::clamped_high());
    EXPECT_EQ(net.pbits[1].mode, TerminalMode::clamped_low());
    EXPECT_EQ(net.pbits[2].mode, TerminalMode::clamped_high());
    EXPECT_THROW(net.clamp_word("X", 8), ConfigurationError);
    EXPECT_THROW(net.clamp_word("Y", 0), ConfigurationError);
    EXPECT_THROW(net.id("nope"), ConfigurationError);
}

TEST(Trace, PackingRoundTrip)
{
    SimulationTrace trace(70);
    std::vector<LogicLevel> row(70, LogicLevel::Low);
    row[0] = row[63] = row[64] = row[69] = LogicLevel::High;
    trace.append(Duration{1}, row);
    EXPECT_EQ(trace.row(0), row);
    ASSERT_EQ(trace.packed(0).size(), 2u);
    EXPECT_EQ(trace.packed(0)[0], (std::uint64_t{1} << 63) | 1u);
    EXPECT_EQ(trace.packed(0)[1], (std::uint64_t{1} << 5) | 1u);
    EXPECT_THROW(trace.append(Duration{1}, row), ContractViolation);
    EXPECT_THROW(trace.append(Duration{2}, std::vector<LogicLevel>(3)), ContractViolation);
}
