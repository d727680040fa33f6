#pragma once

#include "pbit/gates.hpp"
#include "pbit/network.hpp"
#include "pbit/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace pbit
{

using std::chrono::milliseconds;

/// Per-p-bit retention times: a fixed value, a clipped normal draw, or an explicit list indexed by p-bit id.
struct RetentionPlan
{
    enum class Kind : std::uint8_t
    {
        Uniform,
        ClippedNormal,
        Explicit,
    };

    Kind kind{Kind::Uniform};
    Duration mean{milliseconds(200)};
    Duration sd{0};
    Duration min{0};
    Duration max{0};
    std::uint64_t seed{0};
    std::vector<Duration> times;

    static RetentionPlan uniform(Duration tau) { return {Kind::Uniform, tau, Duration{0}, tau, tau, 0, {}}; }

    static RetentionPlan clipped_normal(Duration mean, Duration sd, Duration lo, Duration hi, std::uint64_t seed)
    {
        if (sd < Duration::zero() || lo <= Duration::zero() || hi < lo)
        {
            throw ArgumentError("clipped_normal: need sd >= 0 and 0 < lo <= hi");
        }
        return {Kind::ClippedNormal, mean, sd, lo, hi, seed, {}};
    }

    static RetentionPlan explicit_times(std::vector<Duration> times)
    {
        RetentionPlan plan;
        plan.kind = Kind::Explicit;
        plan.times = std::move(times);
        return plan;
    }

    /// Normal around 200 ms, sd 30 ms, clipped to [137, 263] ms.
    static RetentionPlan spread_200ms(std::uint64_t seed)
    {
        return clipped_normal(milliseconds(200), milliseconds(30), milliseconds(137), milliseconds(263), seed);
    }

    Duration at(std::size_t id) const
    {
        switch (kind)
        {
        case Kind::Uniform:
            return mean;
        case Kind::ClippedNormal: {
            RandomStream rng(seed, id, RandomStream::Domain::Retention);
            const double draw = static_cast<double>(mean.count()) + static_cast<double>(sd.count()) * rng.normal();
            const double clipped =
                std::clamp(draw, static_cast<double>(min.count()), static_cast<double>(max.count()));
            return Duration{std::llround(clipped)};
        }
        case Kind::Explicit:
            if (id >= times.size())
            {
                throw ConfigurationError("retention plan lists " + std::to_string(times.size()) +
                                         " times but p-bit " + std::to_string(id) + " needs one");
            }
            return times[id];
        }
        return mean;
    }

    std::string describe() const
    {
        std::ostringstream out;
        switch (kind)
        {
        case Kind::Uniform:
            out << "uniform " << mean.count() / 1000.0 << " ms";
            break;
        case Kind::ClippedNormal:
            out << "normal " << mean.count() / 1000.0 << "+-" << sd.count() / 1000.0 << " ms in ["
                << min.count() / 1000.0 << ", " << max.count() / 1000.0 << "]";
            break;
        case Kind::Explicit:
            out << "{";
            for (std::size_t k = 0; k < times.size(); ++k)
            {
                out << (k ? "," : "") << times[k].count() / 1000.0;
            }
            out << "} ms";
            break;
        }
        return out.str();
    }
};

struct TimingConfig
{
    Duration tau_sample{milliseconds(1)};
    RetentionPlan retention{RetentionPlan::uniform(milliseconds(200))};
    double jitter_fraction{0.005};
    Duration phase{0};
    QuantizationConfig quantization{};
};

/// Machine realizing a verified gate at correlation strength I0 (members left empty for add_gate_machine).
inline MachineSpec machine_from_gate(const VerifiedGate &gate, double I0, Duration tau_sample = milliseconds(1),
                                     QuantizationConfig quantization = {})
{
    if (!(I0 >= 0.0) || !std::isfinite(I0))
    {
        throw ArgumentError("I0 must be finite and non-negative, got " + std::to_string(I0));
    }
    return MachineSpec{gate.name(), gate.spec().coupling.with_I0(I0), {}, tau_sample, quantization};
}

/// Adds a gate's machine to `net`, labels its terminals "<prefix><label>", and returns its first global id.
inline std::size_t add_gate_machine(NetworkSpec &net, const VerifiedGate &gate, double I0, const TimingConfig &timing,
                                    const std::string &prefix = "", const std::string &machine_name = "")
{
    MachineSpec machine = machine_from_gate(gate, I0, timing.tau_sample, timing.quantization);
    PBitConfig defaults;
    defaults.jitter_fraction = timing.jitter_fraction;
    defaults.phase = timing.phase;
    const std::size_t first = net.add_machine(machine_name.empty() ? gate.name() : machine_name,
                                              std::move(machine.coupling), timing.tau_sample, defaults,
                                              timing.quantization);
    for (std::size_t local = 0; local < gate.size(); ++local)
    {
        net.pbits[first + local].retention_time = timing.retention.at(first + local);
    }
    for (const auto &t : gate.spec().visible)
    {
        net.labels[prefix + t.label] = first + t.index;
    }
    return first;
}

/// The verified AND machine (A, B, C = A AND B).
inline MachineSpec build_and_machine(double I0, Duration tau_sample = milliseconds(1),
                                     const GateLibrary &library = GateLibrary::shipped())
{
    return machine_from_gate(library.get("and"), I0, tau_sample);
}

/// Any shipped gate as a one-machine network labelled by its terminals.
inline NetworkSpec build_gate_network(const VerifiedGate &gate, double I0, const TimingConfig &timing = {})
{
    NetworkSpec net;
    add_gate_machine(net, gate, I0, timing);
    return net;
}

inline NetworkSpec build_and_network(double I0, const TimingConfig &timing = {},
                                     const GateLibrary &library = GateLibrary::shipped())
{
    return build_gate_network(library.get("and"), I0, timing);
}

/// 14 p-bits: A, B, CIN, S, COUT visible, 9 auxiliary.
inline MachineSpec build_full_adder(double I0, Duration tau_sample = milliseconds(10),
                                    const GateLibrary &library = GateLibrary::shipped())
{
    return machine_from_gate(library.get("full_adder"), I0, tau_sample);
}

inline NetworkSpec build_full_adder_network(double I0, TimingConfig timing = {.tau_sample = milliseconds(10)},
                                            const GateLibrary &library = GateLibrary::shipped())
{
    return build_gate_network(library.get("full_adder"), I0, timing);
}

/**
 * 4-bit ripple-carry adder: half adder (6 p-bits) on bit 0, full adders (14 each) on bits 1..3, and a
 * directed wire from each COUT to the next CIN. Words A, B (4 bits) and S (5 bits, S4 = final carry).
 */
inline NetworkSpec build_rca4(double I0, TimingConfig timing = {.tau_sample = milliseconds(10),
                                                                .retention = RetentionPlan::spread_200ms(1)},
                              const GateLibrary &library = GateLibrary::shipped())
{
    NetworkSpec net;
    std::vector<std::size_t> carry(4);
    for (std::size_t bit = 0; bit < 4; ++bit)
    {
        const std::string suffix = std::to_string(bit);
        const VerifiedGate &gate = library.get(bit == 0 ? "half_adder" : "full_adder");
        const std::string name = (bit == 0 ? "HA" : "FA") + suffix;
        const std::size_t first = add_gate_machine(net, gate, I0, timing, name + ".", name);
        net.labels["A" + suffix] = first + gate.spec().terminal("A");
        net.labels["B" + suffix] = first + gate.spec().terminal("B");
        net.labels["S" + suffix] = first + gate.spec().terminal("S");
        carry[bit] = first + gate.spec().terminal("COUT");
        if (bit > 0)
        {
            net.connect(carry[bit - 1], first + gate.spec().terminal("CIN"));
        }
    }
    net.labels["S4"] = carry[3];
    for (const char *word : {"A", "B"})
    {
        for (std::size_t bit = 0; bit < 4; ++bit)
        {
            net.words[word].push_back(net.id(word + std::to_string(bit)));
        }
    }
    for (std::size_t bit = 0; bit < 5; ++bit)
    {
        net.words["S"].push_back(net.id("S" + std::to_string(bit)));
    }
    if (net.size() != 48)
    {
        throw ConfigurationError("RCA must have 48 p-bits, built " + std::to_string(net.size()));
    }
    net.validate();
    return net;
}

struct AccountingRow
{
    std::string component;
    std::size_t pbits{0};
    std::string role;
};

inline constexpr std::size_t kFactorizerPBits = 46;

inline std::string format_accounting(const std::vector<AccountingRow> &rows)
{
    std::ostringstream out;
    std::size_t total = 0;
    for (const auto &row : rows)
    {
        out << row.component << "\t" << row.pbits << "\t" << row.role << "\n";
        total += row.pbits;
    }
    out << "total\t" << total << "\n";
    return out.str();
}

struct Factorizer
{
    NetworkSpec network;
    std::vector<AccountingRow> accounting;
};

/**
 * 2x2-bit multiplier run in reverse as a factorizer.
 *
 * One 12-p-bit machine holds the four AND gates; each factor bit has a clone joined by a COPY coupling so
 * that every input p-bit feeds one gate. The partial products are summed by a half adder (P0, with its
 * second input clamped low) and two full adders (P1, then P2/P3, the last with its B input clamped low),
 * chained by directed carry wires. The adders' partial-product inputs drive the AND outputs through
 * reversed directed wires, so clamping the product word P makes the factor words A and B fluctuate
 * among its factorizations.
 */
inline Factorizer build_factorizer(double I0, TimingConfig timing = {.tau_sample = milliseconds(100)},
                                   const GateLibrary &library = GateLibrary::shipped())
{
    Factorizer out;
    NetworkSpec &net = out.network;
    const VerifiedGate &and4 = library.get("and4");
    const VerifiedGate &ha = library.get("half_adder");
    const VerifiedGate &fa = library.get("full_adder");

    const std::size_t g = add_gate_machine(net, and4, I0, timing, "", "AND4");
    const std::size_t h0 = add_gate_machine(net, ha, I0, timing, "HA0.", "HA0");
    const std::size_t f1 = add_gate_machine(net, fa, I0, timing, "FA1.", "FA1");
    const std::size_t f2 = add_gate_machine(net, fa, I0, timing, "FA2.", "FA2");

    const auto &hs = ha.spec();
    const auto &fs = fa.spec();
    const auto &as = and4.spec();
    // Product bits.
    net.labels["P0"] = h0 + hs.terminal("S");
    net.labels["P1"] = f1 + fs.terminal("S");
    net.labels["P2"] = f2 + fs.terminal("S");
    net.labels["P3"] = f2 + fs.terminal("COUT");
    // Carry chain.
    net.connect(h0 + hs.terminal("COUT"), f1 + fs.terminal("CIN"));
    net.connect(f1 + fs.terminal("COUT"), f2 + fs.terminal("CIN"));
    // Unused adder inputs sit at logic 0.
    net.pbits[h0 + hs.terminal("B")].mode = TerminalMode::clamped_low();
    net.pbits[f2 + fs.terminal("B")].mode = TerminalMode::clamped_low();
    // Reversed wires: each partial-product p-bit of the AND machine follows the adder input that consumes it.
    net.connect(h0 + hs.terminal("A"), g + as.terminal("A0B0"));
    net.connect(f1 + fs.terminal("A"), g + as.terminal("A1B0"));
    net.connect(f1 + fs.terminal("B"), g + as.terminal("A0B1"));
    net.connect(f2 + fs.terminal("A"), g + as.terminal("A1B1"));

    net.words["A"] = {net.id("A0"), net.id("A1")};
    net.words["B"] = {net.id("B0"), net.id("B1")};
    net.words["P"] = {net.id("P0"), net.id("P1"), net.id("P2"), net.id("P3")};

    out.accounting = {
        {"AND4 factor inputs", 4, "A0 A1 B0 B1"},
        {"AND4 factor clones", 4, "COPY-coupled twins of A0 A1 B0 B1"},
        {"AND4 partial products", 4, "A0B0 A1B0 A0B1 A1B1, wired from adder inputs"},
        {"HA0", ha.size(), "A0B0 + 0 -> P0"},
        {"FA1", fa.size(), "A1B0 + A0B1 + carry -> P1"},
        {"FA2", fa.size(), "A1B1 + 0 + carry -> P2, P3"},
    };
    std::size_t total = 0;
    for (const auto &row : out.accounting)
    {
        total += row.pbits;
    }
    if (total != kFactorizerPBits || net.size() != kFactorizerPBits)
    {
        throw ConfigurationError("factorizer accounting gives " + std::to_string(total) + " p-bits, network has " +
                                 std::to_string(net.size()) + ", expected 46\n" + format_accounting(out.accounting));
    }
    net.validate();
    return out;
}

} // namespace pbit
