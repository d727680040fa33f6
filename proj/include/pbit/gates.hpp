#pragma once

#include "pbit/core.hpp"
#include "pbit/oracle.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace pbit
{

inline constexpr double kDegeneracyTolerance = 1e-9;

struct Terminal
{
    std::string label;
    std::size_t index{0};

    friend bool operator==(const Terminal &, const Terminal &) = default;
};

using TruthRow = std::vector<std::uint8_t>;

/// A gate Hamiltonian (stored with I0 = 1) whose ground states should project onto a truth table.
struct GateSpec
{
    std::string name;
    std::vector<Terminal> visible;
    std::vector<std::size_t> auxiliary;
    std::vector<TruthRow> truth_table; // each row lists visible terminals in order
    CouplingMatrix coupling;
    std::string provenance;

    std::size_t size() const noexcept { return coupling.size(); }

    std::size_t terminal(const std::string &label) const
    {
        for (const auto &t : visible)
        {
            if (t.label == label)
            {
                return t.index;
            }
        }
        throw ConfigurationError("gate '" + name + "' has no terminal '" + label + "'");
    }

    void validate() const
    {
        const std::size_t n = size();
        std::vector<int> seen(n, 0);
        for (const auto &t : visible)
        {
            if (t.index >= n)
            {
                throw ConfigurationError("gate '" + name + "': terminal index out of range");
            }
            ++seen[t.index];
        }
        for (const std::size_t a : auxiliary)
        {
            if (a >= n)
            {
                throw ConfigurationError("gate '" + name + "': auxiliary index out of range");
            }
            ++seen[a];
        }
        if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; }))
        {
            throw ConfigurationError("gate '" + name + "': visible and auxiliary indices must partition the p-bits");
        }
        std::set<TruthRow> rows;
        for (const auto &row : truth_table)
        {
            if (row.size() != visible.size() ||
                std::any_of(row.begin(), row.end(), [](std::uint8_t b) { return b > 1; }))
            {
                throw ConfigurationError("gate '" + name + "': malformed truth-table row");
            }
            if (!rows.insert(row).second)
            {
                throw ConfigurationError("gate '" + name + "': duplicate truth-table row");
            }
        }
        if (truth_table.empty())
        {
            throw ConfigurationError("gate '" + name + "': empty truth table");
        }
    }
};

struct VerificationReport
{
    bool passed{false};
    double ground_energy{0.0};
    std::optional<double> gap; // first excited minus ground energy, if any excited state exists
    std::vector<std::uint64_t> spurious_states; // ground states projecting outside the truth table
    std::vector<TruthRow> missing_rows;         // truth rows not reached by any ground state
    std::size_t ground_state_count{0};

    std::string summary(const GateSpec &gate) const
    {
        std::ostringstream out;
        out << gate.name << ": " << (passed ? "VERIFIED" : "FAILED") << " (ground energy " << ground_energy
            << ", " << ground_state_count << " ground states";
        if (gap)
        {
            out << ", gap " << *gap;
        }
        out << ")";
        for (const auto s : spurious_states)
        {
            out << "\n  spurious ground state " << state_bits(s, gate.size());
        }
        for (const auto &row : missing_rows)
        {
            out << "\n  missing truth row ";
            for (const auto b : row)
            {
                out << static_cast<int>(b);
            }
        }
        return out.str();
    }
};

/// Projection of a full-state index onto the visible terminals (first terminal most significant).
inline std::uint64_t project_visible(const GateSpec &gate, std::uint64_t state)
{
    std::uint64_t key = 0;
    for (const auto &t : gate.visible)
    {
        key = (key << 1) | static_cast<std::uint64_t>(state_bit(state, t.index, gate.size()));
    }
    return key;
}

inline std::uint64_t row_key(const TruthRow &row)
{
    std::uint64_t key = 0;
    for (const auto b : row)
    {
        key = (key << 1) | b;
    }
    return key;
}

inline TruthRow key_row(std::uint64_t key, std::size_t width)
{
    TruthRow row(width);
    for (std::size_t k = 0; k < width; ++k)
    {
        row[k] = static_cast<std::uint8_t>((key >> (width - 1 - k)) & 1u);
    }
    return row;
}

/// Enumerates all states; passes iff the visible projections of the minimum-energy manifold equal the truth table.
inline VerificationReport check_ground_states(const GateSpec &gate, double I0_check = 1.0)
{
    if (!(I0_check > 0.0))
    {
        throw ArgumentError("verify_ground_states: I0_check must be positive");
    }
    gate.validate();
    const std::vector<double> energies = enumerate_energies(gate.coupling.with_I0(I0_check));
    const double e0 = *std::min_element(energies.begin(), energies.end());

    VerificationReport report;
    report.ground_energy = e0;
    std::set<std::uint64_t> table;
    for (const auto &row : gate.truth_table)
    {
        table.insert(row_key(row));
    }
    std::set<std::uint64_t> reached;
    std::optional<double> excited;
    for (std::uint64_t s = 0; s < energies.size(); ++s)
    {
        if (energies[s] <= e0 + kDegeneracyTolerance)
        {
            ++report.ground_state_count;
            const std::uint64_t key = project_visible(gate, s);
            reached.insert(key);
            if (!table.contains(key))
            {
                report.spurious_states.push_back(s);
            }
        }
        else if (!excited || energies[s] < *excited)
        {
            excited = energies[s];
        }
    }
    for (const auto &row : gate.truth_table)
    {
        if (!reached.contains(row_key(row)))
        {
            report.missing_rows.push_back(row);
        }
    }
    if (excited)
    {
        report.gap = *excited - e0;
    }
    report.passed = report.spurious_states.empty() && report.missing_rows.empty();
    return report;
}

/// A GateSpec that has passed ground-state verification. Only the verifier can construct one.
class VerifiedGate
{
  public:
    const GateSpec &spec() const noexcept { return spec_; }
    const VerificationReport &report() const noexcept { return report_; }
    const std::string &name() const noexcept { return spec_.name; }
    std::size_t size() const noexcept { return spec_.size(); }

  private:
    VerifiedGate(GateSpec spec, VerificationReport report) : spec_{std::move(spec)}, report_{std::move(report)} {}
    friend VerifiedGate verify_ground_states(GateSpec gate, double I0_check);

    GateSpec spec_;
    VerificationReport report_;
};

/// Throws VerificationError (carrying the offending states) when the check fails.
inline VerifiedGate verify_ground_states(GateSpec gate, double I0_check = 1.0)
{
    VerificationReport report = check_ground_states(gate, I0_check);
    if (!report.passed)
    {
        throw VerificationError(report.summary(gate));
    }
    return VerifiedGate(std::move(gate), std::move(report));
}

/**
 * Exhaustive search for (J, h) whose ground states realize `truth_table` on the first
 * labels.size() p-bits, with `n_aux` auxiliary p-bits after them.
 *
 * Candidates are the parameter vector (upper-triangular J row-major, then h), each entry in
 * {-bound, -bound + step, ..., +bound}, visited in lexicographic order; the first hit is returned.
 * Energies of all states are updated incrementally as the odometer turns.
 */
inline VerifiedGate synthesize_gate(std::string name, std::vector<std::string> labels,
                                    std::vector<TruthRow> truth_table, std::size_t n_aux, double search_bound,
                                    double step = 1.0, std::uint64_t max_candidates = 4'000'000'000ull)
{
    const std::size_t v = labels.size();
    const std::size_t n = v + n_aux;
    if (n == 0 || n > 6)
    {
        throw CapacityError("synthesize_gate: exhaustive search supports 1..6 p-bits, got " + std::to_string(n));
    }
    if (!(search_bound > 0.0) || !(step > 0.0))
    {
        throw ArgumentError("synthesize_gate: bound and step must be positive");
    }
    const auto levels = static_cast<std::size_t>(std::llround(2.0 * search_bound / step)) + 1;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i)
    {
        for (std::size_t j = i + 1; j < n; ++j)
        {
            pairs.emplace_back(i, j);
        }
    }
    const std::size_t params = pairs.size() + n;
    double candidates = std::pow(static_cast<double>(levels), static_cast<double>(params));
    if (candidates > static_cast<double>(max_candidates))
    {
        throw CapacityError("synthesize_gate: " + std::to_string(candidates) + " candidates exceed the limit");
    }

    GateSpec shape;
    shape.name = name;
    for (std::size_t k = 0; k < v; ++k)
    {
        shape.visible.push_back({labels[k], k});
    }
    for (std::size_t k = v; k < n; ++k)
    {
        shape.auxiliary.push_back(k);
    }
    shape.truth_table = truth_table;
    shape.coupling = CouplingMatrix::zeros(n);
    shape.validate();

    const std::size_t states = std::size_t{1} << n;
    const std::size_t rows = std::size_t{1} << v;
    // feature[p][s]: contribution multiplier of parameter p in state s (E = -sum p * feature).
    std::vector<std::vector<double>> feature(params, std::vector<double>(states));
    std::vector<std::size_t> visible_key(states);
    for (std::size_t s = 0; s < states; ++s)
    {
        const auto m = bipolar_state(s, n);
        for (std::size_t p = 0; p < pairs.size(); ++p)
        {
            feature[p][s] = m[pairs[p].first] * m[pairs[p].second];
        }
        for (std::size_t i = 0; i < n; ++i)
        {
            feature[pairs.size() + i][s] = m[i];
        }
        visible_key[s] = project_visible(shape, s);
    }
    std::vector<bool> in_table(rows, false);
    for (const auto &row : truth_table)
    {
        in_table[row_key(row)] = true;
    }

    std::vector<std::size_t> digit(params, 0);
    std::vector<double> e(states, 0.0);
    for (std::size_t p = 0; p < params; ++p)
    {
        for (std::size_t s = 0; s < states; ++s)
        {
            e[s] -= -search_bound * feature[p][s];
        }
    }
    std::vector<double> row_min(rows);

    auto accepts = [&]() {
        std::fill(row_min.begin(), row_min.end(), INFINITY);
        for (std::size_t s = 0; s < states; ++s)
        {
            row_min[visible_key[s]] = std::min(row_min[visible_key[s]], e[s]);
        }
        const double e0 = *std::min_element(row_min.begin(), row_min.end());
        for (std::size_t r = 0; r < rows; ++r)
        {
            const bool ground = row_min[r] <= e0 + kDegeneracyTolerance;
            if (ground != in_table[r])
            {
                return false;
            }
        }
        return true;
    };

    while (true)
    {
        if (accepts())
        {
            std::vector<double> j(n * n, 0.0);
            std::vector<double> h(n, 0.0);
            for (std::size_t p = 0; p < pairs.size(); ++p)
            {
                const double value = -search_bound + static_cast<double>(digit[p]) * step;
                j[pairs[p].first * n + pairs[p].second] = value;
                j[pairs[p].second * n + pairs[p].first] = value;
            }
            for (std::size_t i = 0; i < n; ++i)
            {
                h[i] = -search_bound + static_cast<double>(digit[pairs.size() + i]) * step;
            }
            GateSpec gate = shape;
            gate.coupling = CouplingMatrix(n, std::move(j), std::move(h), 1.0);
            std::ostringstream prov;
            prov << "synthesized: exhaustive lexicographic search, bound " << search_bound << ", step " << step;
            gate.provenance = prov.str();
            return verify_ground_states(std::move(gate));
        }
        // Advance the odometer (last parameter fastest).
        std::size_t p = params;
        while (p > 0)
        {
            --p;
            if (digit[p] + 1 < levels)
            {
                ++digit[p];
                for (std::size_t s = 0; s < states; ++s)
                {
                    e[s] -= step * feature[p][s];
                }
                break;
            }
            const double span = static_cast<double>(levels - 1) * step;
            digit[p] = 0;
            for (std::size_t s = 0; s < states; ++s)
            {
                e[s] += span * feature[p][s];
            }
            if (p == 0)
            {
                throw NotFoundError("synthesize_gate: no Hamiltonian for '" + name + "' within bound " +
                                    std::to_string(search_bound));
            }
        }
    }
}

/**
 * Gate whose truth table is the solution set of sum_i c_i x_i = target over bits x_i.
 * Expanding the penalty (sum_i c_i x_i - target)^2 with x = (1 + m) / 2 and doubling gives
 * J_ij = -c_i c_j and h_i = -2 d c_i, d = sum_i c_i / 2 - target. No auxiliary p-bits.
 */
inline VerifiedGate linear_penalty_gate(std::string name, std::vector<std::string> labels,
                                        std::vector<double> coefficients, double target,
                                        std::vector<TruthRow> truth_table)
{
    const std::size_t n = labels.size();
    if (coefficients.size() != n)
    {
        throw ConfigurationError("linear_penalty_gate: need one coefficient per p-bit");
    }
    double d = -target;
    for (const double c : coefficients)
    {
        if (!std::isfinite(c))
        {
            throw ConfigurationError("linear_penalty_gate: coefficients must be finite");
        }
        d += c / 2.0;
    }
    std::vector<double> j(n * n, 0.0);
    std::vector<double> h(n, 0.0);
    for (std::size_t a = 0; a < n; ++a)
    {
        h[a] = -2.0 * d * coefficients[a];
        for (std::size_t b = 0; b < n; ++b)
        {
            j[a * n + b] = a == b ? 0.0 : -coefficients[a] * coefficients[b];
        }
    }
    std::vector<Terminal> visible;
    for (std::size_t i = 0; i < n; ++i)
    {
        visible.push_back({labels[i], i});
    }
    std::ostringstream prov;
    prov << "linear penalty: (";
    for (std::size_t i = 0; i < n; ++i)
    {
        prov << (i ? " + " : "") << coefficients[i] << "*" << labels[i];
    }
    prov << " - " << target << ")^2";
    GateSpec gate{std::move(name), std::move(visible), {}, std::move(truth_table),
                  CouplingMatrix(n, std::move(j), std::move(h), 1.0), prov.str()};
    return verify_ground_states(std::move(gate));
}

struct GatePart
{
    const VerifiedGate *gate{nullptr};
    std::vector<std::size_t> bind; // part-local p-bit -> composite p-bit
    double weight{1.0};
};

/**
 * Sums verified sub-gate Hamiltonians that share p-bits, then verifies the whole. When every part can sit
 * in its own ground manifold at once, the sum's ground states are exactly the jointly consistent assignments.
 */
inline VerifiedGate compose_gate(std::string name, std::size_t n, std::vector<Terminal> visible,
                                 std::vector<std::size_t> auxiliary, std::vector<TruthRow> truth_table,
                                 const std::vector<GatePart> &parts)
{
    std::vector<double> j(n * n, 0.0);
    std::vector<double> h(n, 0.0);
    std::ostringstream prov;
    prov << "composed:";
    for (const auto &part : parts)
    {
        const GateSpec &sub = part.gate->spec();
        if (part.bind.size() != sub.size())
        {
            throw ConfigurationError("compose_gate: part '" + sub.name + "' binds " + std::to_string(part.bind.size()) +
                                     " p-bits, needs " + std::to_string(sub.size()));
        }
        if (std::set<std::size_t>(part.bind.begin(), part.bind.end()).size() != part.bind.size())
        {
            throw ConfigurationError("compose_gate: part '" + sub.name + "' binds one p-bit twice");
        }
        if (!(part.weight > 0.0) || !std::isfinite(part.weight))
        {
            throw ConfigurationError("compose_gate: part weight must be positive and finite");
        }
        if (std::any_of(part.bind.begin(), part.bind.end(), [n](std::size_t b) { return b >= n; }))
        {
            throw ConfigurationError("compose_gate: part '" + sub.name + "' binding out of range");
        }
        const double scale = part.weight * sub.coupling.I0();
        for (std::size_t a = 0; a < sub.size(); ++a)
        {
            h[part.bind[a]] += sub.coupling.h(a) * scale;
            for (std::size_t b = 0; b < sub.size(); ++b)
            {
                j[part.bind[a] * n + part.bind[b]] += sub.coupling.J(a, b) * scale;
            }
        }
        prov << " " << sub.name << "(";
        for (std::size_t a = 0; a < part.bind.size(); ++a)
        {
            prov << (a ? "," : "") << part.bind[a];
        }
        prov << ")";
        if (part.weight != 1.0)
        {
            prov << "x" << part.weight;
        }
    }
    GateSpec gate{std::move(name), std::move(visible), std::move(auxiliary), std::move(truth_table),
                  CouplingMatrix(n, std::move(j), std::move(h), 1.0), prov.str()};
    return verify_ground_states(std::move(gate));
}

// ---- JSON ----

inline nlohmann::json to_json(const GateSpec &gate)
{
    nlohmann::json out;
    out["name"] = gate.name;
    out["n"] = gate.size();
    out["visible"] = nlohmann::json::array();
    for (const auto &t : gate.visible)
    {
        out["visible"].push_back({{"label", t.label}, {"index", t.index}});
    }
    out["auxiliary"] = gate.auxiliary;
    out["truth_table"] = nlohmann::json::array();
    for (const auto &row : gate.truth_table)
    {
        std::vector<int> bits(row.begin(), row.end());
        out["truth_table"].push_back(bits);
    }
    out["J"] = nlohmann::json::array();
    for (std::size_t i = 0; i < gate.size(); ++i)
    {
        out["J"].push_back(std::vector<double>(gate.coupling.row(i).begin(), gate.coupling.row(i).end()));
    }
    out["h"] = std::vector<double>(gate.coupling.biases().begin(), gate.coupling.biases().end());
    if (!gate.provenance.empty())
    {
        out["provenance"] = gate.provenance;
    }
    return out;
}

inline std::vector<TruthRow> truth_table_from_json(const nlohmann::json &rows)
{
    std::vector<TruthRow> table;
    for (const auto &row : rows)
    {
        TruthRow r;
        if (row.is_string())
        {
            for (const char c : row.get<std::string>())
            {
                if (c != '0' && c != '1')
                {
                    throw ConfigurationError("truth-table row strings may only contain 0 and 1");
                }
                r.push_back(static_cast<std::uint8_t>(c - '0'));
            }
        }
        else
        {
            for (const auto &b : row)
            {
                r.push_back(static_cast<std::uint8_t>(b.get<int>()));
            }
        }
        table.push_back(std::move(r));
    }
    return table;
}

inline std::vector<Terminal> terminals_from_json(const nlohmann::json &visible)
{
    std::vector<Terminal> terminals;
    for (std::size_t k = 0; k < visible.size(); ++k)
    {
        const auto &t = visible[k];
        if (t.is_string())
        {
            terminals.push_back({t.get<std::string>(), k});
        }
        else
        {
            terminals.push_back({t.at("label").get<std::string>(), t.at("index").get<std::size_t>()});
        }
    }
    return terminals;
}

inline GateSpec gate_from_json(const nlohmann::json &in)
{
    try
    {
        GateSpec gate;
        gate.name = in.at("name").get<std::string>();
        gate.visible = terminals_from_json(in.at("visible"));
        gate.auxiliary = in.value("auxiliary", std::vector<std::size_t>{});
        gate.truth_table = truth_table_from_json(in.at("truth_table"));
        const auto rows = in.at("J").get<std::vector<std::vector<double>>>();
        gate.coupling = CouplingMatrix::from_rows(rows, in.at("h").get<std::vector<double>>(), 1.0);
        gate.provenance = in.value("provenance", std::string{});
        if (in.contains("n") && in.at("n").get<std::size_t>() != gate.size())
        {
            throw ConfigurationError("gate '" + gate.name + "': field n disagrees with J");
        }
        gate.validate();
        return gate;
    }
    catch (const nlohmann::json::exception &e)
    {
        throw ConfigurationError(std::string("gate JSON: ") + e.what());
    }
}

inline nlohmann::json read_json_file(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ConfigurationError("cannot open " + path.string());
    }
    try
    {
        return nlohmann::json::parse(in);
    }
    catch (const nlohmann::json::exception &e)
    {
        throw ConfigurationError(path.string() + ": " + e.what());
    }
}

inline GateSpec load_gate(const std::filesystem::path &path)
{
    return gate_from_json(read_json_file(path));
}

inline void save_gate(const std::filesystem::path &path, const GateSpec &gate)
{
    std::ofstream out(path);
    if (!out)
    {
        throw ConfigurationError("cannot write " + path.string());
    }
    out << to_json(gate).dump(2) << "\n";
}

/// Directory holding the shipped gate files: $PBIT_GATE_DIR, else the build-time default, else ./data/gates.
inline std::filesystem::path default_gate_directory()
{
    if (const char *env = std::getenv("PBIT_GATE_DIR"); env != nullptr && *env != '\0')
    {
        return env;
    }
#ifdef PBIT_DEFAULT_GATE_DIR
    return PBIT_DEFAULT_GATE_DIR;
#else
    return "data/gates";
#endif
}

/// Verified gates by name. Every entry passed verify_ground_states when it was added.
class GateLibrary
{
  public:
    void add(VerifiedGate gate)
    {
        const std::string key = gate.name();
        gates_.insert_or_assign(key, std::move(gate));
    }

    bool contains(const std::string &name) const { return gates_.contains(name); }

    const VerifiedGate &get(const std::string &name) const
    {
        const auto it = gates_.find(name);
        if (it == gates_.end())
        {
            throw ConfigurationError("gate library has no gate '" + name + "'");
        }
        return it->second;
    }

    std::vector<std::string> names() const
    {
        std::vector<std::string> out;
        for (const auto &[name, gate] : gates_)
        {
            out.push_back(name);
        }
        return out;
    }

    /// Loads and verifies every *.json in `dir`; a failing file raises VerificationError.
    static GateLibrary load_directory(const std::filesystem::path &dir)
    {
        if (!std::filesystem::is_directory(dir))
        {
            throw ConfigurationError("gate directory " + dir.string() + " does not exist");
        }
        std::vector<std::filesystem::path> files;
        for (const auto &entry : std::filesystem::directory_iterator(dir))
        {
            if (entry.path().extension() == ".json")
            {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        GateLibrary lib;
        for (const auto &file : files)
        {
            lib.add(verify_ground_states(load_gate(file)));
        }
        return lib;
    }

    static const GateLibrary &shipped()
    {
        static const GateLibrary lib = load_directory(default_gate_directory());
        return lib;
    }

  private:
    std::map<std::string, VerifiedGate> gates_;
};

/**
 * Builds a gate from a synthesis request. Three forms:
 *   {"name", "visible": [labels], "truth_table", "n_aux", "search_bound", "step"}  -> exhaustive search
 *   {"name", "visible": [labels], "truth_table", "penalty": {"coefficients", "target"}}  -> linear penalty
 *   {"name", "n", "visible", "auxiliary", "truth_table", "parts": [{"gate", "bind", "weight"?}]}  -> composition
 * Composition parts are resolved by name in `library`.
 */
inline VerifiedGate synthesize_from_json(const nlohmann::json &request, const GateLibrary &library)
{
    try
    {
        const std::string name = request.at("name").get<std::string>();
        auto table = truth_table_from_json(request.at("truth_table"));
        if (request.contains("parts"))
        {
            std::vector<GatePart> parts;
            for (const auto &part : request.at("parts"))
            {
                parts.push_back({&library.get(part.at("gate").get<std::string>()),
                                 part.at("bind").get<std::vector<std::size_t>>(), part.value("weight", 1.0)});
            }
            return compose_gate(name, request.at("n").get<std::size_t>(), terminals_from_json(request.at("visible")),
                                request.value("auxiliary", std::vector<std::size_t>{}), std::move(table), parts);
        }
        std::vector<std::string> labels;
        for (const auto &t : terminals_from_json(request.at("visible")))
        {
            labels.push_back(t.label);
        }
        if (request.contains("penalty"))
        {
            const auto &penalty = request.at("penalty");
            return linear_penalty_gate(name, std::move(labels), penalty.at("coefficients").get<std::vector<double>>(),
                                       penalty.value("target", 0.0), std::move(table));
        }
        return synthesize_gate(name, std::move(labels), std::move(table), request.value("n_aux", std::size_t{0}),
                               request.value("search_bound", 2.0), request.value("step", 1.0));
    }
    catch (const nlohmann::json::exception &e)
    {
        throw ConfigurationError(std::string("synthesis request: ") + e.what());
    }
}

} // namespace pbit
