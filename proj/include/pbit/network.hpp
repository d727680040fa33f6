#pragma once

#include "pbit/core.hpp"

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace pbit
{

/// One Boltzmann machine: its couplings in local indices, and the global p-bit ids they refer to.
struct MachineSpec
{
    std::string name;
    CouplingMatrix coupling;
    std::vector<std::size_t> members; // local index -> global p-bit id
    Duration tau_sample{std::chrono::milliseconds(1)};
    QuantizationConfig quantization{};
};

/// Directed inter-machine connection: destination's input follows source's output voltage.
struct Wire
{
    std::size_t source{0};
    std::size_t destination{0};
    Duration delay{0};
};

struct NetworkSpec
{
    std::vector<MachineSpec> machines;
    std::vector<PBitConfig> pbits;
    std::vector<Wire> wires;
    std::map<std::string, std::size_t> labels;
    // Multi-bit words, least significant bit first (e.g. "A" -> {A0, A1, A2, A3}).
    std::map<std::string, std::vector<std::size_t>> words;
    // Trace samples are taken at this machine's weight refreshes.
    std::size_t logging_machine{0};

    std::size_t size() const noexcept { return pbits.size(); }

    /// Appends a machine whose local p-bits become fresh global ids; returns the id of local index 0.
    std::size_t add_machine(std::string name, CouplingMatrix coupling, Duration tau_sample,
                            const PBitConfig &defaults = {}, QuantizationConfig quantization = {})
    {
        const std::size_t first = pbits.size();
        MachineSpec machine{std::move(name), std::move(coupling), {}, tau_sample, quantization};
        for (std::size_t local = 0; local < machine.coupling.size(); ++local)
        {
            PBitConfig config = defaults;
            config.id = first + local;
            config.mode = TerminalMode::free();
            pbits.push_back(config);
            machine.members.push_back(first + local);
        }
        machines.push_back(std::move(machine));
        return first;
    }

    void connect(std::size_t source, std::size_t destination, Duration delay = Duration::zero())
    {
        if (source >= pbits.size() || destination >= pbits.size())
        {
            throw ConfigurationError("connect: p-bit id out of range");
        }
        wires.push_back({source, destination, delay});
        pbits[destination].mode = TerminalMode::wired(source);
    }

    std::size_t id(const std::string &label) const
    {
        const auto it = labels.find(label);
        if (it == labels.end())
        {
            throw ConfigurationError("unknown p-bit label '" + label + "'");
        }
        return it->second;
    }

    void clamp(const std::string &label, LogicLevel level) { pbits.at(id(label)).mode = TerminalMode::clamped(level); }

    /// Clamps a word to an unsigned value, LSB first; the value must fit.
    void clamp_word(const std::string &word, std::uint64_t value)
    {
        const auto it = words.find(word);
        if (it == words.end())
        {
            throw ConfigurationError("unknown word '" + word + "'");
        }
        if (it->second.size() < 64 && (value >> it->second.size()) != 0)
        {
            throw ConfigurationError("value " + std::to_string(value) + " does not fit word '" + word + "'");
        }
        for (std::size_t k = 0; k < it->second.size(); ++k)
        {
            pbits.at(it->second[k]).mode = TerminalMode::clamped(from_bit((value >> k) & 1u));
        }
    }

    /// Machine index and local index for every global p-bit.
    std::vector<std::pair<std::size_t, std::size_t>> ownership() const
    {
        std::vector<std::pair<std::size_t, std::size_t>> owner(pbits.size(), {SIZE_MAX, SIZE_MAX});
        for (std::size_t m = 0; m < machines.size(); ++m)
        {
            for (std::size_t local = 0; local < machines[m].members.size(); ++local)
            {
                const std::size_t g = machines[m].members[local];
                if (g >= pbits.size())
                {
                    throw ConfigurationError("machine '" + machines[m].name + "' references unknown p-bit " +
                                             std::to_string(g));
                }
                if (owner[g].first != SIZE_MAX)
                {
                    throw ConfigurationError("p-bit " + std::to_string(g) + " belongs to more than one machine");
                }
                owner[g] = {m, local};
            }
        }
        return owner;
    }

    std::vector<TerminalMode> machine_modes(std::size_t m) const
    {
        std::vector<TerminalMode> modes;
        modes.reserve(machines.at(m).members.size());
        for (const std::size_t g : machines[m].members)
        {
            modes.push_back(pbits.at(g).mode);
        }
        return modes;
    }

    void validate() const
    {
        if (machines.empty())
        {
            throw ConfigurationError("network has no machines");
        }
        for (std::size_t g = 0; g < pbits.size(); ++g)
        {
            if (pbits[g].id != g)
            {
                throw ConfigurationError("p-bit ids must equal their position in the roster");
            }
            pbits[g].validate();
        }
        const auto owner = ownership();
        for (std::size_t g = 0; g < owner.size(); ++g)
        {
            if (owner[g].first == SIZE_MAX)
            {
                throw ConfigurationError("p-bit " + std::to_string(g) + " belongs to no machine");
            }
        }
        for (const auto &machine : machines)
        {
            if (machine.coupling.size() != machine.members.size())
            {
                throw ConfigurationError("machine '" + machine.name + "': coupling size differs from member count");
            }
            if (machine.tau_sample <= Duration::zero())
            {
                throw ConfigurationError("machine '" + machine.name + "': sampling time must be positive");
            }
            machine.quantization.validate();
        }
        if (logging_machine >= machines.size())
        {
            throw ConfigurationError("logging machine index out of range");
        }

        std::vector<int> incoming(pbits.size(), 0);
        std::set<std::pair<std::size_t, std::size_t>> machine_edges;
        for (const auto &wire : wires)
        {
            if (wire.source >= pbits.size() || wire.destination >= pbits.size())
            {
                throw ConfigurationError("wire references an unknown p-bit");
            }
            if (wire.delay < Duration::zero())
            {
                throw ConfigurationError("wire delay must be non-negative");
            }
            const std::size_t from = owner[wire.source].first;
            const std::size_t to = owner[wire.destination].first;
            if (from == to)
            {
                throw ConfigurationError("wire " + std::to_string(wire.source) + " -> " +
                                         std::to_string(wire.destination) + " stays inside one machine");
            }
            const TerminalMode mode = pbits[wire.destination].mode;
            if (!mode.is_wired() || mode.source != wire.source)
            {
                throw ConfigurationError("wire destination " + std::to_string(wire.destination) +
                                         " is not in Wired mode bound to its source");
            }
            ++incoming[wire.destination];
            machine_edges.insert({from, to});
        }
        for (const auto &[from, to] : machine_edges)
        {
            if (machine_edges.contains({to, from}))
            {
                throw ConfigurationError("machines '" + machines[from].name + "' and '" + machines[to].name +
                                         "' are wired in both directions");
            }
        }
        for (std::size_t g = 0; g < pbits.size(); ++g)
        {
            if (pbits[g].mode.is_wired() && incoming[g] != 1)
            {
                throw ConfigurationError("wired p-bit " + std::to_string(g) + " must have exactly one incoming wire");
            }
        }
        for (const auto &[label, g] : labels)
        {
            if (g >= pbits.size())
            {
                throw ConfigurationError("label '" + label + "' references an unknown p-bit");
            }
        }
        for (const auto &[name, bits] : words)
        {
            for (const std::size_t g : bits)
            {
                if (g >= pbits.size())
                {
                    throw ConfigurationError("word '" + name + "' references an unknown p-bit");
                }
            }
        }
    }
};

} // namespace pbit
