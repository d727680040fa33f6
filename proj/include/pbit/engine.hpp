#pragma once

#include "pbit/core.hpp"
#include "pbit/network.hpp"
#include "pbit/rng.hpp"

#include <cmath>
#include <deque>
#include <functional>
#include <optional>
#include <queue>
#include <span>
#include <vector>

namespace pbit
{

enum class EventKind : std::uint8_t
{
    // Lower value wins at equal time: refreshed inputs are published before p-bits read them.
    WeightRefresh = 0,
    PBitUpdate = 1,
};

struct Event
{
    Duration time{0};
    EventKind kind{EventKind::PBitUpdate};
    std::size_t target{0}; // machine index for WeightRefresh, global p-bit id for PBitUpdate
    std::uint64_t seq{0};

    friend bool operator<(const Event &a, const Event &b) noexcept
    {
        if (a.time != b.time)
        {
            return a.time < b.time;
        }
        if (a.kind != b.kind)
        {
            return a.kind < b.kind;
        }
        return a.seq < b.seq;
    }
    friend bool operator>(const Event &a, const Event &b) noexcept { return b < a; }
};

struct UpdateRecord
{
    Duration time{0};
    std::uint32_t pbit{0};

    friend bool operator==(const UpdateRecord &, const UpdateRecord &) = default;
};

/// Timestamped full output vectors, bit-packed, plus an optional log of every p-bit update.
class SimulationTrace
{
  public:
    SimulationTrace() = default;
    explicit SimulationTrace(std::size_t width) : width_{width}, words_{(width + 63) / 64} {}

    std::size_t width() const noexcept { return width_; }
    std::size_t size() const noexcept { return times_.size(); }
    bool empty() const noexcept { return times_.empty(); }

    void reserve(std::size_t samples)
    {
        times_.reserve(samples);
        bits_.reserve(samples * words_);
    }

    void append(Duration time, std::span<const LogicLevel> row)
    {
        if (!times_.empty() && time <= times_.back())
        {
            throw ContractViolation("trace sample times must be strictly increasing");
        }
        times_.push_back(time);
        bits_.resize(bits_.size() + words_, 0);
        store(times_.size() - 1, row);
    }

    void replace_last(std::span<const LogicLevel> row)
    {
        const std::size_t s = times_.size() - 1;
        std::fill_n(bits_.begin() + static_cast<std::ptrdiff_t>(s * words_), words_, 0);
        store(s, row);
    }

    Duration time(std::size_t sample) const { return times_[sample]; }
    const std::vector<Duration> &times() const noexcept { return times_; }

    LogicLevel at(std::size_t sample, std::size_t pbit) const
    {
        const std::uint64_t word = bits_[sample * words_ + pbit / 64];
        return from_bit((word >> (pbit % 64)) & 1u);
    }

    std::vector<LogicLevel> row(std::size_t sample) const
    {
        std::vector<LogicLevel> out(width_);
        for (std::size_t i = 0; i < width_; ++i)
        {
            out[i] = at(sample, i);
        }
        return out;
    }

    /// Raw packed words of one sample (bit i of the row is bit i%64 of word i/64).
    std::span<const std::uint64_t> packed(std::size_t sample) const
    {
        return {bits_.data() + sample * words_, words_};
    }

    void record_update(Duration time, std::size_t pbit)
    {
        updates_.push_back({time, static_cast<std::uint32_t>(pbit)});
    }
    const std::vector<UpdateRecord> &updates() const noexcept { return updates_; }

    friend bool operator==(const SimulationTrace &, const SimulationTrace &) = default;

  private:
    void store(std::size_t sample, std::span<const LogicLevel> row)
    {
        if (row.size() != width_)
        {
            throw ContractViolation("trace row width mismatch");
        }
        std::uint64_t *base = bits_.data() + sample * words_;
        for (std::size_t i = 0; i < width_; ++i)
        {
            if (row[i] == LogicLevel::High)
            {
                base[i / 64] |= std::uint64_t{1} << (i % 64);
            }
        }
    }

    std::size_t width_{0};
    std::size_t words_{0};
    std::vector<Duration> times_;
    std::vector<std::uint64_t> bits_;
    std::vector<UpdateRecord> updates_;
};

enum class SampleMode : std::uint8_t
{
    OnRefresh,    // one sample per weight refresh of the logging machine
    OnPBitUpdate, // one sample per p-bit update (same-instant updates collapse into one sample)
};

struct SimulatorOptions
{
    SampleMode sample_mode{SampleMode::OnRefresh};
    bool record_updates{false};
    // OnRefresh only: keep every k-th refresh of the logging machine (1 keeps all).
    std::size_t decimation{1};
};

struct RunBudget
{
    std::optional<std::size_t> samples;
    std::optional<Duration> duration;

    static RunBudget sample_count(std::size_t n) { return {n, std::nullopt}; }
    static RunBudget until(Duration t) { return {std::nullopt, t}; }
};

/**
 * Virtual-time discrete-event simulator of a network of p-bits.
 *
 * Each p-bit re-samples its output every retention time (with multiplicative uniform jitter) from the
 * input voltage it currently sees; each machine's weight logic periodically snapshots its outputs and
 * publishes new held inputs. A run is strictly sequential and fully determined by (network, seed).
 */
class Simulator
{
  public:
    using Observer = std::function<void(const Event &, const Simulator &)>;

    Simulator(NetworkSpec network, std::uint64_t seed, SimulatorOptions options = {})
        : net_{std::move(network)}, options_{options}, trace_{net_.size()}
    {
        net_.validate();
        if (options_.decimation == 0)
        {
            throw ConfigurationError("decimation must be at least 1");
        }
        schedule_initial(seed);
    }

    void set_observer(Observer observer) { observer_ = std::move(observer); }

    const NetworkSpec &network() const noexcept { return net_; }
    Duration clock() const noexcept { return clock_; }
    std::span<const LogicLevel> outputs() const noexcept { return outputs_; }
    std::span<const Voltage> held_inputs() const noexcept { return held_; }
    const SimulationTrace &trace() const noexcept { return trace_; }
    SimulationTrace take_trace() { return std::exchange(trace_, SimulationTrace{net_.size()}); }
    const Event &peek() const { return queue_.top(); }
    std::size_t owning_machine(std::size_t pbit) const { return owner_.at(pbit).first; }

    /// Processes the least pending event.
    void step()
    {
        const Event event = queue_.top();
        queue_.pop();
        clock_ = event.time;
        if (event.kind == EventKind::PBitUpdate)
        {
            update_pbit(event);
        }
        else
        {
            refresh_machine(event);
        }
        if (observer_)
        {
            observer_(event, *this);
        }
    }

    /// Input voltage p-bit `i` would read right now (before ADC quantization).
    Voltage bound_input(std::size_t i) const
    {
        const TerminalMode mode = net_.pbits[i].mode;
        if (!mode.is_wired())
        {
            return held_[i];
        }
        const Duration delay = wire_delay_[i];
        if (delay == Duration::zero())
        {
            return Voltage{rail_voltage(outputs_[mode.source])};
        }
        return Voltage{rail_voltage(delayed_output(mode.source, clock_ - delay))};
    }

  private:
    void schedule_initial(std::uint64_t seed)
    {
        const std::size_t n = net_.size();
        owner_ = net_.ownership();
        outputs_.assign(n, LogicLevel::Low);
        held_.assign(n, Voltage{kMidVolts});
        streams_.reserve(n);
        wire_delay_.assign(n, Duration::zero());
        history_.resize(n);
        history_tracked_.assign(n, false);
        for (const Wire &wire : net_.wires)
        {
            wire_delay_[wire.destination] = wire.delay;
            if (wire.delay > Duration::zero())
            {
                history_tracked_[wire.source] = true;
                max_delay_ = std::max(max_delay_, wire.delay);
            }
        }

        for (std::size_t i = 0; i < n; ++i)
        {
            streams_.emplace_back(seed, i);
            const TerminalMode mode = net_.pbits[i].mode;
            if (mode.is_clamped())
            {
                outputs_[i] = mode.rail();
                held_[i] = Voltage{rail_voltage(mode.rail())};
            }
            else
            {
                outputs_[i] = from_bit(streams_[i].uniform() < 0.5);
            }
            if (history_tracked_[i])
            {
                history_[i].push_back({Duration::min(), outputs_[i]});
            }
        }

        scratch_.resize(net_.machines.size());
        for (std::size_t m = 0; m < net_.machines.size(); ++m)
        {
            const auto &machine = net_.machines[m];
            scratch_[m].modes = net_.machine_modes(m);
            scratch_[m].snapshot.resize(machine.members.size());
            scratch_[m].inputs.resize(machine.members.size());
            push({Duration::zero(), EventKind::WeightRefresh, m, 0});
        }
        for (std::size_t i = 0; i < n; ++i)
        {
            push({net_.pbits[i].phase, EventKind::PBitUpdate, i, 0});
        }
    }

    void push(Event event)
    {
        event.seq = next_seq_++;
        queue_.push(event);
    }

    void update_pbit(const Event &event)
    {
        const std::size_t i = event.target;
        const PBitConfig &config = net_.pbits[i];
        const auto &q = net_.machines[owner_[i].first].quantization;
        const Voltage v = quantize_adc(bound_input(i), q);
        RandomStream &rng = streams_[i];
        const LogicLevel next = sample_pbit(v, rng.uniform());
        if (history_tracked_[i] && next != outputs_[i])
        {
            auto &log = history_[i];
            log.push_back({event.time, next});
            while (log.size() > 1 && log[1].first <= event.time - max_delay_)
            {
                log.pop_front();
            }
        }
        outputs_[i] = next;

        double stretch = 1.0;
        if (config.jitter_fraction > 0.0)
        {
            stretch += rng.uniform(-config.jitter_fraction, config.jitter_fraction);
        }
        const auto interval = static_cast<Duration::rep>(
            std::llround(static_cast<double>(config.retention_time.count()) * stretch));
        push({event.time + Duration{std::max<Duration::rep>(interval, 1)}, EventKind::PBitUpdate, i, 0});

        if (options_.record_updates)
        {
            trace_.record_update(event.time, i);
        }
        if (options_.sample_mode == SampleMode::OnPBitUpdate)
        {
            if (!trace_.empty() && trace_.times().back() == event.time)
            {
                trace_.replace_last(outputs_);
            }
            else
            {
                trace_.append(event.time, outputs_);
            }
        }
    }

    void refresh_machine(const Event &event)
    {
        const std::size_t m = event.target;
        const MachineSpec &machine = net_.machines[m];
        Scratch &s = scratch_[m];
        for (std::size_t local = 0; local < machine.members.size(); ++local)
        {
            s.snapshot[local] = outputs_[machine.members[local]];
        }
        weight_inputs_into(machine.coupling, s.snapshot, s.modes, machine.quantization, s.inputs);
        for (std::size_t local = 0; local < machine.members.size(); ++local)
        {
            if (!s.modes[local].is_wired())
            {
                held_[machine.members[local]] = s.inputs[local];
            }
        }
        if (options_.sample_mode == SampleMode::OnRefresh && m == net_.logging_machine &&
            logged_refreshes_++ % options_.decimation == 0)
        {
            trace_.append(event.time, outputs_);
        }
        push({event.time + machine.tau_sample, EventKind::WeightRefresh, m, 0});
    }

    LogicLevel delayed_output(std::size_t source, Duration at) const
    {
        const auto &log = history_[source];
        LogicLevel value = log.front().second;
        for (const auto &[time, level] : log)
        {
            if (time > at)
            {
                break;
            }
            value = level;
        }
        return value;
    }

    struct Scratch
    {
        std::vector<TerminalMode> modes;
        std::vector<LogicLevel> snapshot;
        std::vector<Voltage> inputs;
    };

    NetworkSpec net_;
    SimulatorOptions options_;
    SimulationTrace trace_;
    std::vector<std::pair<std::size_t, std::size_t>> owner_;
    std::vector<LogicLevel> outputs_;
    std::vector<Voltage> held_;
    std::vector<RandomStream> streams_;
    std::vector<Duration> wire_delay_;
    std::vector<bool> history_tracked_;
    std::vector<std::deque<std::pair<Duration, LogicLevel>>> history_;
    Duration max_delay_{0};
    std::vector<Scratch> scratch_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
    std::uint64_t next_seq_{0};
    std::uint64_t logged_refreshes_{0};
    Duration clock_{0};
    Observer observer_;
};

/// Steps until the budget is exhausted. Deterministic in (network, seed, budget, options).
inline SimulationTrace run(const NetworkSpec &network, std::uint64_t seed, RunBudget budget,
                           SimulatorOptions options = {})
{
    Simulator sim(network, seed, options);
    if (budget.samples && *budget.samples == 0)
    {
        return sim.take_trace();
    }
    if (budget.samples)
    {
        const std::size_t target = *budget.samples;
        while (sim.trace().size() < target && !(budget.duration && sim.peek().time >= *budget.duration))
        {
            sim.step();
        }
    }
    else if (budget.duration)
    {
        while (sim.peek().time < *budget.duration)
        {
            sim.step();
        }
    }
    return sim.take_trace();
}

/**
 * Fraction of p-bit updates that follow another update of a different p-bit of the same machine by
 * strictly less than `window` (updates at the same instant count for each other). An update in that
 * position acts on inputs that cannot yet reflect the other p-bit's new state, so the fraction is a
 * proxy for the parallel-update probability. Restricted to updates with time in [from, to).
 */
inline double serialization_metric(const SimulationTrace &trace, const NetworkSpec &network, Duration window,
                                   Duration from = Duration::min(), Duration to = Duration::max())
{
    if (window <= Duration::zero())
    {
        throw ArgumentError("serialization_metric: window must be positive");
    }
    if (trace.updates().empty())
    {
        throw ArgumentError("serialization_metric: trace carries no update timestamps (enable record_updates)");
    }
    const auto owner = network.ownership();
    const std::size_t machines = network.machines.size();
    std::vector<std::vector<Duration>> last(machines);
    for (std::size_t m = 0; m < machines; ++m)
    {
        last[m].assign(network.machines[m].members.size(), Duration::min());
    }

    std::size_t counted = 0;
    std::size_t parallel = 0;
    const auto &updates = trace.updates();
    std::size_t k = 0;
    std::vector<std::size_t> group;
    while (k < updates.size())
    {
        // Group updates sharing one instant.
        const Duration t = updates[k].time;
        group.clear();
        while (k < updates.size() && updates[k].time == t)
        {
            group.push_back(updates[k].pbit);
            ++k;
        }
        for (const std::size_t g : group)
        {
            const auto [m, local] = owner[g];
            bool hit = false;
            for (const std::size_t other : group)
            {
                if (other != g && owner[other].first == m)
                {
                    hit = true;
                    break;
                }
            }
            if (!hit)
            {
                const auto &seen = last[m];
                for (std::size_t j = 0; j < seen.size(); ++j)
                {
                    if (j != local && seen[j] != Duration::min() && t - seen[j] < window)
                    {
                        hit = true;
                        break;
                    }
                }
            }
            if (t >= from && t < to && network.machines[m].members.size() > 1)
            {
                ++counted;
                parallel += hit ? 1 : 0;
            }
        }
        for (const std::size_t g : group)
        {
            last[owner[g].first][owner[g].second] = t;
        }
    }
    return counted == 0 ? 0.0 : static_cast<double>(parallel) / static_cast<double>(counted);
}

/// serialization_metric over consecutive blocks of `block_updates` updates (last partial block dropped).
inline std::vector<double> serialization_profile(const SimulationTrace &trace, const NetworkSpec &network,
                                                 Duration window, std::size_t block_updates)
{
    if (block_updates == 0)
    {
        throw ArgumentError("serialization_profile: block size must be positive");
    }
    std::vector<double> profile;
    const auto &updates = trace.updates();
    for (std::size_t start = 0; start + block_updates <= updates.size(); start += block_updates)
    {
        const Duration from = updates[start].time;
        const Duration to = start + block_updates < updates.size() ? updates[start + block_updates].time
                                                                   : updates.back().time + Duration{1};
        profile.push_back(serialization_metric(trace, network, window, from, to));
    }
    return profile;
}

} // namespace pbit
