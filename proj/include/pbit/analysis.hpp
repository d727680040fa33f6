#pragma once

#include "pbit/builders.hpp"
#include "pbit/engine.hpp"
#include "pbit/oracle.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace pbit
{

/**
 * Ordered visible fields. Each field is a label (one bit) or a word (several bits); the histogram key
 * concatenates the fields, first field most significant, each word most significant bit first. For
 * fields A, B, C this is the artificial node 4A + 2B + C.
 */
struct VisibleLayout
{
    std::vector<std::string> names;
    std::vector<std::vector<std::size_t>> fields; // global ids, most significant first

    std::size_t width() const noexcept
    {
        std::size_t w = 0;
        for (const auto &f : fields)
        {
            w += f.size();
        }
        return w;
    }

    std::vector<std::size_t> ids() const
    {
        std::vector<std::size_t> out;
        for (const auto &f : fields)
        {
            out.insert(out.end(), f.begin(), f.end());
        }
        return out;
    }

    bool all_single_bits() const
    {
        return std::all_of(fields.begin(), fields.end(), [](const auto &f) { return f.size() == 1; });
    }

    /// Value of field `k` inside a histogram key.
    std::uint64_t field_value(std::uint64_t key, std::size_t k) const
    {
        std::size_t shift = 0;
        for (std::size_t j = fields.size(); j-- > k + 1;)
        {
            shift += fields[j].size();
        }
        return (key >> shift) & ((std::uint64_t{1} << fields[k].size()) - 1);
    }

    /// "101" for single-bit fields, otherwise "A=10 B=13".
    std::string label(std::uint64_t key) const
    {
        if (all_single_bits())
        {
            return state_bits(key, width());
        }
        std::ostringstream out;
        for (std::size_t k = 0; k < fields.size(); ++k)
        {
            out << (k ? " " : "") << names[k] << "=" << field_value(key, k);
        }
        return out.str();
    }
};

/// Resolves names to fields: words take precedence over labels.
inline VisibleLayout make_layout(const NetworkSpec &network, const std::vector<std::string> &names)
{
    if (names.empty())
    {
        throw ArgumentError("visible layout needs at least one label or word");
    }
    VisibleLayout layout;
    for (const auto &name : names)
    {
        std::vector<std::size_t> field;
        if (const auto it = network.words.find(name); it != network.words.end())
        {
            field.assign(it->second.rbegin(), it->second.rend());
        }
        else
        {
            field.push_back(network.id(name));
        }
        layout.names.push_back(name);
        layout.fields.push_back(std::move(field));
    }
    if (layout.width() > 63)
    {
        throw CapacityError("visible layout wider than 63 bits");
    }
    return layout;
}

/// Sum of 2^k * bit_k over a bit list given most significant first.
inline std::uint64_t artificial_node(std::span<const int> bits_msb_first)
{
    std::uint64_t value = 0;
    for (const int b : bits_msb_first)
    {
        if (b != 0 && b != 1)
        {
            throw ArgumentError("artificial_node: bits must be 0 or 1");
        }
        value = (value << 1) | static_cast<std::uint64_t>(b);
    }
    return value;
}

/// Artificial node of named labels/words in one output row (first name most significant).
inline std::uint64_t artificial_node(const NetworkSpec &network, std::span<const LogicLevel> row,
                                     const std::vector<std::string> &names)
{
    const VisibleLayout layout = make_layout(network, names);
    std::uint64_t value = 0;
    for (const std::size_t id : layout.ids())
    {
        value = (value << 1) | (row[id] == LogicLevel::High ? 1u : 0u);
    }
    return value;
}

struct EmpiricalDistribution
{
    VisibleLayout layout;
    std::map<std::uint64_t, std::uint64_t> counts;
    std::uint64_t total{0};
    std::uint64_t burn_in_discarded{0};

    double probability(std::uint64_t key) const
    {
        const auto it = counts.find(key);
        return it == counts.end() || total == 0 ? 0.0
                                                : static_cast<double>(it->second) / static_cast<double>(total);
    }

    /// Dense probability vector over all 2^width keys.
    Distribution dense() const
    {
        const std::size_t w = layout.width();
        if (w > kMaxEnumerationBits)
        {
            throw CapacityError("dense(): visible width exceeds enumeration limit");
        }
        Distribution d{w, std::vector<double>(std::size_t{1} << w, 0.0)};
        for (const auto &[key, count] : counts)
        {
            d.probabilities[key] = static_cast<double>(count) / static_cast<double>(total);
        }
        return d;
    }
};

/// Counts visible states over the samples that remain after discarding the first floor(burn_in * size).
inline EmpiricalDistribution histogram(const SimulationTrace &trace, const VisibleLayout &layout, double burn_in)
{
    if (!(burn_in >= 0.0 && burn_in < 1.0))
    {
        throw ArgumentError("histogram: burn-in fraction must lie in [0, 1)");
    }
    const auto skip = static_cast<std::size_t>(std::floor(burn_in * static_cast<double>(trace.size())));
    if (skip >= trace.size())
    {
        throw ArgumentError("histogram: no samples left after burn-in");
    }
    const std::vector<std::size_t> ids = layout.ids();
    for (const std::size_t id : ids)
    {
        if (id >= trace.width())
        {
            throw ArgumentError("histogram: visible p-bit outside the trace");
        }
    }
    EmpiricalDistribution dist;
    dist.layout = layout;
    dist.burn_in_discarded = skip;
    for (std::size_t s = skip; s < trace.size(); ++s)
    {
        std::uint64_t key = 0;
        for (const std::size_t id : ids)
        {
            key = (key << 1) | (trace.at(s, id) == LogicLevel::High ? 1u : 0u);
        }
        ++dist.counts[key];
    }
    dist.total = trace.size() - skip;
    return dist;
}

struct Mode
{
    std::uint64_t state{0};
    std::string label;
    std::uint64_t count{0};
    double probability{0.0};
};

/// Top-k states by probability; ties broken by ascending state.
inline std::vector<Mode> mode_report(const EmpiricalDistribution &dist, std::size_t k)
{
    if (k == 0)
    {
        throw ArgumentError("mode_report: k must be at least 1");
    }
    std::vector<Mode> modes;
    for (const auto &[key, count] : dist.counts)
    {
        modes.push_back({key, dist.layout.label(key), count, dist.probability(key)});
    }
    std::stable_sort(modes.begin(), modes.end(), [](const Mode &a, const Mode &b) {
        return a.count != b.count ? a.count > b.count : a.state < b.state;
    });
    if (modes.size() > k)
    {
        modes.resize(k);
    }
    return modes;
}

/**
 * Exact Boltzmann distribution of a single-machine, unwired network over its p-bits (global id order),
 * honouring clamps. Composite networks have no equilibrium oracle and are rejected.
 */
inline ExactDistribution network_oracle(const NetworkSpec &network)
{
    if (network.machines.size() != 1 || !network.wires.empty())
    {
        throw UnsupportedConfiguration("no Boltzmann oracle for composite or wired networks");
    }
    network.validate();
    const MachineSpec &machine = network.machines.front();
    ExactDistribution local = boltzmann_distribution(machine.coupling, network.machine_modes(0));
    // Reorder local bits into global id order.
    std::vector<std::size_t> order(machine.members.size());
    for (std::size_t local_index = 0; local_index < machine.members.size(); ++local_index)
    {
        order[machine.members[local_index]] = local_index;
    }
    return marginal(local, order);
}

/// Oracle marginal over a visible layout (same key convention as histogram).
inline Distribution oracle_marginal(const NetworkSpec &network, const VisibleLayout &layout)
{
    const ExactDistribution full = network_oracle(network);
    const std::vector<std::size_t> ids = layout.ids();
    return marginal(full, ids);
}

// ---- scenarios ----

struct ScenarioConfig
{
    std::string name{"scenario"};
    std::string builder{"and"}; // and | full_adder | rca4 | factorizer | gate | pbit
    double I0{0.8};
    std::string gate;          // builder "gate": a gate file or a shipped gate name
    double input_volts{2.5};   // builder "pbit": input voltage published to the lone p-bit
    std::vector<std::pair<std::string, std::uint64_t>> clamps;
    std::uint64_t seed{1};
    std::size_t samples{100000};
    double burn_in{0.1};
    std::optional<Duration> tau_sample;
    std::optional<RetentionPlan> retention;
    double jitter{0.005};
    Duration phase{0};
    QuantizationConfig quantization{};
    std::vector<std::string> visible;
    SampleMode sample_mode{SampleMode::OnRefresh};
    std::size_t decimation{1};
    std::vector<std::string> outputs{"histogram"};

    void validate() const
    {
        static const std::vector<std::string> builders{"and", "full_adder", "rca4", "factorizer", "gate", "pbit"};
        if (std::find(builders.begin(), builders.end(), builder) == builders.end())
        {
            throw ConfigurationError("unknown builder '" + builder + "'");
        }
        if (!(I0 >= 0.0) || !std::isfinite(I0))
        {
            throw ConfigurationError("I0 must be finite and non-negative");
        }
        if (builder == "gate" && gate.empty())
        {
            throw ConfigurationError("builder 'gate' needs a gate file or name");
        }
        if (builder == "pbit" && !(input_volts >= 0.0 && input_volts <= kRailVolts))
        {
            throw ConfigurationError("input_volts must lie in [0, 5]");
        }
        if (!(burn_in >= 0.0 && burn_in < 1.0))
        {
            throw ConfigurationError("burn_in must lie in [0, 1)");
        }
        if (samples == 0)
        {
            throw ConfigurationError("samples must be positive");
        }
        if (tau_sample && *tau_sample <= Duration::zero())
        {
            throw ConfigurationError("tau_sample must be positive");
        }
        if (!(jitter >= 0.0 && jitter < 1.0))
        {
            throw ConfigurationError("jitter must lie in [0, 1)");
        }
        if (phase < Duration::zero())
        {
            throw ConfigurationError("phase must be non-negative");
        }
        if (decimation == 0)
        {
            throw ConfigurationError("decimation must be at least 1");
        }
        quantization.validate();
        static const std::vector<std::string> kinds{"histogram", "trace", "trace_bin", "distribution", "updates"};
        for (const auto &o : outputs)
        {
            if (std::find(kinds.begin(), kinds.end(), o) == kinds.end())
            {
                throw ConfigurationError("unknown output '" + o + "'");
            }
        }
    }
};

inline Duration ms_to_duration(double ms)
{
    if (!std::isfinite(ms) || ms < 0.0)
    {
        throw ConfigurationError("durations must be finite and non-negative");
    }
    return Duration{std::llround(ms * 1000.0)};
}

inline RetentionPlan retention_from_json(const nlohmann::json &j)
{
    const std::string kind = j.value("kind", std::string{"uniform"});
    if (kind == "uniform")
    {
        return RetentionPlan::uniform(ms_to_duration(j.at("ms").get<double>()));
    }
    if (kind == "normal")
    {
        return RetentionPlan::clipped_normal(ms_to_duration(j.at("mean_ms").get<double>()),
                                             ms_to_duration(j.at("sd_ms").get<double>()),
                                             ms_to_duration(j.at("min_ms").get<double>()),
                                             ms_to_duration(j.at("max_ms").get<double>()), j.value("seed", 1ull));
    }
    if (kind == "explicit")
    {
        std::vector<Duration> times;
        for (const double ms : j.at("ms").get<std::vector<double>>())
        {
            times.push_back(ms_to_duration(ms));
        }
        return RetentionPlan::explicit_times(std::move(times));
    }
    throw ConfigurationError("unknown retention kind '" + kind + "'");
}

inline nlohmann::json retention_to_json(const RetentionPlan &plan)
{
    auto ms = [](Duration d) { return static_cast<double>(d.count()) / 1000.0; };
    switch (plan.kind)
    {
    case RetentionPlan::Kind::Uniform:
        return {{"kind", "uniform"}, {"ms", ms(plan.mean)}};
    case RetentionPlan::Kind::ClippedNormal:
        return {{"kind", "normal"}, {"mean_ms", ms(plan.mean)}, {"sd_ms", ms(plan.sd)},
                {"min_ms", ms(plan.min)},   {"max_ms", ms(plan.max)},   {"seed", plan.seed}};
    case RetentionPlan::Kind::Explicit: {
        std::vector<double> times;
        for (const auto t : plan.times)
        {
            times.push_back(ms(t));
        }
        return {{"kind", "explicit"}, {"ms", times}};
    }
    }
    return {};
}

inline ScenarioConfig scenario_from_json(const nlohmann::json &j)
{
    static const std::vector<std::string> known{
        "name",   "network", "clamps",  "seed",        "samples",      "burn_in",    "tau_sample_ms", "retention",
        "jitter", "phase_ms", "quantization", "visible", "sample_mode", "decimation", "outputs"};
    try
    {
        if (!j.is_object())
        {
            throw ConfigurationError("scenario must be a JSON object");
        }
        for (const auto &[key, value] : j.items())
        {
            if (std::find(known.begin(), known.end(), key) == known.end())
            {
                throw ConfigurationError("unknown scenario field '" + key + "'");
            }
        }
        ScenarioConfig c;
        c.name = j.value("name", c.name);
        const auto &net = j.at("network");
        c.builder = net.at("builder").get<std::string>();
        c.I0 = net.value("I0", c.I0);
        c.gate = net.value("gate", std::string{});
        c.input_volts = net.value("input_volts", c.input_volts);
        if (j.contains("clamps"))
        {
            for (const auto &[label, value] : j.at("clamps").items())
            {
                c.clamps.emplace_back(label, value.get<std::uint64_t>());
            }
        }
        c.seed = j.value("seed", c.seed);
        c.samples = j.value("samples", c.samples);
        c.burn_in = j.value("burn_in", c.burn_in);
        if (j.contains("tau_sample_ms"))
        {
            c.tau_sample = ms_to_duration(j.at("tau_sample_ms").get<double>());
        }
        if (j.contains("retention"))
        {
            c.retention = retention_from_json(j.at("retention"));
        }
        c.jitter = j.value("jitter", c.jitter);
        c.phase = ms_to_duration(j.value("phase_ms", 0.0));
        if (j.contains("quantization"))
        {
            const auto &q = j.at("quantization");
            c.quantization.dac_bits = q.value("dac_bits", 0);
            c.quantization.adc_bits = q.value("adc_bits", 0);
            c.quantization.vref = q.value("vref", kRailVolts);
        }
        c.visible = j.value("visible", std::vector<std::string>{});
        const std::string mode = j.value("sample_mode", std::string{"refresh"});
        if (mode == "refresh")
        {
            c.sample_mode = SampleMode::OnRefresh;
        }
        else if (mode == "update")
        {
            c.sample_mode = SampleMode::OnPBitUpdate;
        }
        else
        {
            throw ConfigurationError("sample_mode must be 'refresh' or 'update'");
        }
        c.decimation = j.value("decimation", c.decimation);
        c.outputs = j.value("outputs", c.outputs);
        c.validate();
        return c;
    }
    catch (const nlohmann::json::exception &e)
    {
        throw ConfigurationError(std::string("scenario: ") + e.what());
    }
}

inline nlohmann::json scenario_to_json(const ScenarioConfig &c)
{
    nlohmann::json net{{"builder", c.builder}, {"I0", c.I0}};
    if (!c.gate.empty())
    {
        net["gate"] = c.gate;
    }
    if (c.builder == "pbit")
    {
        net["input_volts"] = c.input_volts;
    }
    nlohmann::json j{{"name", c.name},       {"network", net},        {"seed", c.seed},
                     {"samples", c.samples}, {"burn_in", c.burn_in},  {"jitter", c.jitter},
                     {"phase_ms", static_cast<double>(c.phase.count()) / 1000.0},
                     {"decimation", c.decimation},
                     {"sample_mode", c.sample_mode == SampleMode::OnRefresh ? "refresh" : "update"},
                     {"outputs", c.outputs}};
    nlohmann::json clamps = nlohmann::json::object();
    for (const auto &[label, value] : c.clamps)
    {
        clamps[label] = value;
    }
    j["clamps"] = clamps;
    if (c.tau_sample)
    {
        j["tau_sample_ms"] = static_cast<double>(c.tau_sample->count()) / 1000.0;
    }
    if (c.retention)
    {
        j["retention"] = retention_to_json(*c.retention);
    }
    j["quantization"] = {{"dac_bits", c.quantization.dac_bits},
                         {"adc_bits", c.quantization.adc_bits},
                         {"vref", c.quantization.vref}};
    if (!c.visible.empty())
    {
        j["visible"] = c.visible;
    }
    return j;
}

inline Duration default_tau_sample(const std::string &builder)
{
    if (builder == "full_adder" || builder == "rca4")
    {
        return milliseconds(10);
    }
    if (builder == "factorizer")
    {
        return milliseconds(100);
    }
    return milliseconds(1);
}

inline std::vector<std::string> default_visible(const NetworkSpec &network, const std::string &builder)
{
    if (builder == "rca4")
    {
        return {"A", "B", "S"};
    }
    if (builder == "factorizer")
    {
        return {"A", "B"};
    }
    // Every labelled p-bit in id order.
    std::vector<std::pair<std::size_t, std::string>> by_id;
    for (const auto &[label, id] : network.labels)
    {
        by_id.emplace_back(id, label);
    }
    std::sort(by_id.begin(), by_id.end());
    std::vector<std::string> names;
    for (const auto &[id, label] : by_id)
    {
        names.push_back(label);
    }
    return names;
}

inline VerifiedGate resolve_gate(const std::string &gate)
{
    if (gate.find('/') != std::string::npos || gate.ends_with(".json"))
    {
        return verify_ground_states(load_gate(gate));
    }
    return GateLibrary::shipped().get(gate);
}

/// Builds the scenario's network and applies its clamps (labels take 0/1, words take an unsigned value).
inline NetworkSpec build_network(const ScenarioConfig &config)
{
    config.validate();
    TimingConfig timing;
    timing.tau_sample = config.tau_sample.value_or(default_tau_sample(config.builder));
    timing.retention = config.retention.value_or(config.builder == "rca4" ? RetentionPlan::spread_200ms(1)
                                                                          : RetentionPlan::uniform(milliseconds(200)));
    timing.jitter_fraction = config.jitter;
    timing.phase = config.phase;
    timing.quantization = config.quantization;

    NetworkSpec net;
    if (config.builder == "and")
    {
        net = build_and_network(config.I0, timing);
    }
    else if (config.builder == "full_adder")
    {
        net = build_full_adder_network(config.I0, timing);
    }
    else if (config.builder == "rca4")
    {
        net = build_rca4(config.I0, timing);
    }
    else if (config.builder == "factorizer")
    {
        net = build_factorizer(config.I0, timing).network;
    }
    else if (config.builder == "gate")
    {
        net = build_gate_network(resolve_gate(config.gate), config.I0, timing);
    }
    else
    {
        // One p-bit whose weight logic publishes a constant: I = I0 * h with h chosen so V = input_volts.
        const double h = config.I0 > 0.0 ? (2.0 * config.input_volts - kRailVolts) / config.I0 : 0.0;
        if (config.I0 == 0.0 && config.input_volts != kMidVolts)
        {
            throw ConfigurationError("builder 'pbit' needs I0 > 0 to publish a non-midpoint voltage");
        }
        PBitConfig defaults;
        defaults.jitter_fraction = timing.jitter_fraction;
        defaults.phase = timing.phase;
        net.add_machine("pbit", CouplingMatrix(1, {0.0}, {h}, config.I0), timing.tau_sample, defaults,
                        timing.quantization);
        net.pbits[0].retention_time = timing.retention.at(0);
        net.labels["X"] = 0;
    }
    for (const auto &[name, value] : config.clamps)
    {
        if (net.words.contains(name))
        {
            net.clamp_word(name, value);
        }
        else
        {
            if (value > 1)
            {
                throw ConfigurationError("label clamp '" + name + "' must be 0 or 1");
            }
            if (net.pbits.at(net.id(name)).mode.is_wired())
            {
                throw ConfigurationError("cannot clamp wired p-bit '" + name + "'");
            }
            net.clamp(name, from_bit(value != 0));
        }
    }
    net.validate();
    return net;
}

struct ScenarioResult
{
    NetworkSpec network;
    SimulationTrace trace;
    EmpiricalDistribution histogram;
    std::optional<Distribution> oracle; // over the visible layout, single-machine networks only
    std::optional<double> distance;
};

inline bool has_oracle(const NetworkSpec &network)
{
    return network.machines.size() == 1 && network.wires.empty();
}

inline ScenarioResult run_scenario(const ScenarioConfig &config)
{
    ScenarioResult result;
    result.network = build_network(config);
    SimulatorOptions options;
    options.sample_mode = config.sample_mode;
    options.decimation = config.decimation;
    options.record_updates = std::find(config.outputs.begin(), config.outputs.end(), "updates") != config.outputs.end();
    result.trace = run(result.network, config.seed, RunBudget::sample_count(config.samples), options);
    const std::vector<std::string> names =
        config.visible.empty() ? default_visible(result.network, config.builder) : config.visible;
    const VisibleLayout layout = make_layout(result.network, names);
    result.histogram = histogram(result.trace, layout, config.burn_in);
    if (has_oracle(result.network) && layout.width() <= kMaxEnumerationBits)
    {
        result.oracle = oracle_marginal(result.network, layout);
        result.distance = euclidean_distance(result.histogram.dense(), *result.oracle);
    }
    return result;
}

/// Smallest retention time in the network.
inline Duration min_retention(const NetworkSpec &network)
{
    Duration best = Duration::max();
    for (const auto &p : network.pbits)
    {
        best = std::min(best, p.retention_time);
    }
    return best;
}

struct TauSweepRow
{
    Duration tau_sample{0};
    double tau_ratio{0.0}; // tau_sample / min retention time
    double distance{0.0};
    EmpiricalDistribution histogram;
};

/// Oracle distance as a function of sampling time; rejects networks without an oracle.
inline std::vector<TauSweepRow> sweep_sampling_time(const ScenarioConfig &base, const std::vector<Duration> &taus)
{
    std::vector<TauSweepRow> rows;
    for (const Duration tau : taus)
    {
        ScenarioConfig config = base;
        config.tau_sample = tau;
        const NetworkSpec net = build_network(config);
        if (!has_oracle(net))
        {
            throw UnsupportedConfiguration("sweep_sampling_time needs a single-machine network with an oracle");
        }
        ScenarioResult r = run_scenario(config);
        rows.push_back({tau, static_cast<double>(tau.count()) / static_cast<double>(min_retention(r.network).count()),
                        r.distance.value(), std::move(r.histogram)});
    }
    return rows;
}

struct RetentionSweepRow
{
    std::string plan;
    Duration min_retention{0};
    double distance{0.0};
    EmpiricalDistribution histogram;
};

/**
 * Oracle distance for each retention plan. Each plan must keep tau_sample <= max_ratio * min(tau_N);
 * pass std::nullopt to probe the boundary deliberately.
 */
inline std::vector<RetentionSweepRow> sweep_retention_spread(const ScenarioConfig &base,
                                                             const std::vector<RetentionPlan> &plans,
                                                             std::optional<double> max_ratio = 0.1)
{
    std::vector<RetentionSweepRow> rows;
    for (const auto &plan : plans)
    {
        ScenarioConfig config = base;
        config.retention = plan;
        const NetworkSpec net = build_network(config);
        if (!has_oracle(net))
        {
            throw UnsupportedConfiguration("sweep_retention_spread needs a single-machine network with an oracle");
        }
        const Duration floor = min_retention(net);
        const Duration tau = net.machines.front().tau_sample;
        if (max_ratio && static_cast<double>(tau.count()) > *max_ratio * static_cast<double>(floor.count()))
        {
            throw ArgumentError("plan " + plan.describe() + ": sampling time is not well below the smallest retention time");
        }
        ScenarioResult r = run_scenario(config);
        rows.push_back({plan.describe(), floor, r.distance.value(), std::move(r.histogram)});
    }
    return rows;
}

struct SerializationReport
{
    double initial{0.0};              // metric over the first update round (phases as configured)
    double final_mean{0.0};           // ensemble mean over the last 10% of each run
    std::vector<double> final_values; // per run
    double ratio() const { return final_mean > 0.0 ? initial / final_mean : INFINITY; }
};

/**
 * Emergence of serial updating in one machine. Each of `runs` independent runs (seeds seed, seed+1, ...)
 * lasts `updates_per_pbit` mean retention periods. The initial value is the metric over the first
 * half retention period of run 0; the final value is the ensemble mean of the metric over the last
 * tenth of each run. A single small machine's phases wander slowly, so one run's late value is a noisy
 * draw; the ensemble mean estimates the parallel-update probability itself.
 */
inline SerializationReport serialization_emergence(const NetworkSpec &network, std::uint64_t seed, std::size_t runs,
                                                   std::size_t updates_per_pbit, Duration window)
{
    if (runs == 0 || updates_per_pbit < 10)
    {
        throw ArgumentError("serialization_emergence: need at least one run of at least 10 updates per p-bit");
    }
    Duration mean_tau{0};
    for (const auto &p : network.pbits)
    {
        mean_tau += p.retention_time;
    }
    mean_tau /= static_cast<Duration::rep>(network.pbits.size());
    const Duration horizon = mean_tau * static_cast<Duration::rep>(updates_per_pbit);
    SimulatorOptions options;
    options.record_updates = true;
    SerializationReport report;
    for (std::size_t r = 0; r < runs; ++r)
    {
        const SimulationTrace trace = run(network, seed + r, RunBudget::until(horizon), options);
        if (r == 0)
        {
            report.initial = serialization_metric(trace, network, window, Duration::zero(), mean_tau / 2);
        }
        report.final_values.push_back(serialization_metric(trace, network, window, horizon - horizon / 10, horizon));
    }
    double sum = 0.0;
    for (const double v : report.final_values)
    {
        sum += v;
    }
    report.final_mean = sum / static_cast<double>(runs);
    return report;
}

} // namespace pbit
