#pragma once

#include "pbit/analysis.hpp"

#include "json.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace pbit
{

enum class OutputFormat : std::uint8_t
{
    Csv,
    Json,
};

/// Shortest round-trippable-enough fixed formatting, identical on every host.
inline std::string format_number(double value)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", value);
    return buf;
}

inline std::ofstream open_output(const std::filesystem::path &path)
{
    if (path.has_parent_path())
    {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
    {
        throw ConfigurationError("cannot write " + path.string());
    }
    return out;
}

/// Rows of a histogram: every state when the layout is at most 12 bits wide, otherwise only observed states.
inline std::vector<std::uint64_t> histogram_states(const EmpiricalDistribution &dist)
{
    std::vector<std::uint64_t> states;
    const std::size_t w = dist.layout.width();
    if (w <= 12)
    {
        for (std::uint64_t s = 0; s < (std::uint64_t{1} << w); ++s)
        {
            states.push_back(s);
        }
    }
    else
    {
        for (const auto &[key, count] : dist.counts)
        {
            states.push_back(key);
        }
    }
    return states;
}

inline std::uint64_t count_of(const EmpiricalDistribution &dist, std::uint64_t state)
{
    const auto it = dist.counts.find(state);
    return it == dist.counts.end() ? 0 : it->second;
}

/// CSV `state,label,count,probability`.
inline void write_histogram_csv(std::ostream &out, const EmpiricalDistribution &dist)
{
    out << "state,label,count,probability\n";
    for (const std::uint64_t s : histogram_states(dist))
    {
        out << s << "," << dist.layout.label(s) << "," << count_of(dist, s) << ","
            << format_number(dist.probability(s)) << "\n";
    }
}

inline nlohmann::json histogram_json(const EmpiricalDistribution &dist)
{
    nlohmann::json j;
    j["fields"] = dist.layout.names;
    j["total"] = dist.total;
    j["burn_in_discarded"] = dist.burn_in_discarded;
    j["states"] = nlohmann::json::array();
    for (const std::uint64_t s : histogram_states(dist))
    {
        j["states"].push_back({{"state", s},
                               {"label", dist.layout.label(s)},
                               {"count", count_of(dist, s)},
                               {"probability", dist.probability(s)}});
    }
    return j;
}

/// CSV `state_bits,probability`.
inline void write_distribution_csv(std::ostream &out, const Distribution &dist)
{
    out << "state_bits,probability\n";
    for (std::uint64_t s = 0; s < dist.probabilities.size(); ++s)
    {
        out << state_bits(s, dist.width) << "," << format_number(dist.probabilities[s]) << "\n";
    }
}

inline nlohmann::json distribution_json(const Distribution &dist)
{
    nlohmann::json rows = nlohmann::json::array();
    for (std::uint64_t s = 0; s < dist.probabilities.size(); ++s)
    {
        rows.push_back({{"state_bits", state_bits(s, dist.width)}, {"probability", dist.probabilities[s]}});
    }
    return {{"width", dist.width}, {"states", rows}};
}

/// CSV `time_us,pbit_0,...,pbit_{n-1}`.
inline void write_trace_csv(std::ostream &out, const SimulationTrace &trace)
{
    out << "time_us";
    for (std::size_t i = 0; i < trace.width(); ++i)
    {
        out << ",pbit_" << i;
    }
    out << "\n";
    std::string line;
    for (std::size_t s = 0; s < trace.size(); ++s)
    {
        line = std::to_string(trace.time(s).count());
        for (std::size_t i = 0; i < trace.width(); ++i)
        {
            line += trace.at(s, i) == LogicLevel::High ? ",1" : ",0";
        }
        out << line << "\n";
    }
}

/// CSV `tau_ratio,distance`.
inline void write_distance_csv(std::ostream &out, const std::vector<TauSweepRow> &rows)
{
    out << "tau_ratio,distance\n";
    for (const auto &row : rows)
    {
        out << format_number(row.tau_ratio) << "," << format_number(row.distance) << "\n";
    }
}

inline void write_retention_csv(std::ostream &out, const std::vector<RetentionSweepRow> &rows)
{
    out << "plan,min_retention_ms,distance\n";
    for (const auto &row : rows)
    {
        out << "\"" << row.plan << "\"," << format_number(static_cast<double>(row.min_retention.count()) / 1000.0)
            << "," << format_number(row.distance) << "\n";
    }
}

// ---- binary trace dump ----
//
// Little-endian layout:
//   char[8]   magic "PBITTRC1"
//   u64       width (p-bits per sample)
//   u64       samples
//   i64[samples]                     sample times in microseconds
//   u64[samples * ceil(width / 64)]  packed outputs, row-major; bit (i % 64) of word (i / 64) is p-bit i
inline constexpr char kTraceMagic[8] = {'P', 'B', 'I', 'T', 'T', 'R', 'C', '1'};

namespace detail
{
inline void put_u64(std::ostream &out, std::uint64_t v)
{
    unsigned char b[8];
    for (int k = 0; k < 8; ++k)
    {
        b[k] = static_cast<unsigned char>(v >> (8 * k));
    }
    out.write(reinterpret_cast<const char *>(b), 8);
}

inline std::uint64_t get_u64(std::istream &in)
{
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char *>(b), 8))
    {
        throw ConfigurationError("truncated binary trace");
    }
    std::uint64_t v = 0;
    for (int k = 7; k >= 0; --k)
    {
        v = (v << 8) | b[k];
    }
    return v;
}
} // namespace detail

inline void write_trace_binary(std::ostream &out, const SimulationTrace &trace)
{
    out.write(kTraceMagic, sizeof kTraceMagic);
    detail::put_u64(out, trace.width());
    detail::put_u64(out, trace.size());
    for (std::size_t s = 0; s < trace.size(); ++s)
    {
        detail::put_u64(out, static_cast<std::uint64_t>(trace.time(s).count()));
    }
    for (std::size_t s = 0; s < trace.size(); ++s)
    {
        for (const std::uint64_t word : trace.packed(s))
        {
            detail::put_u64(out, word);
        }
    }
}

inline SimulationTrace read_trace_binary(std::istream &in)
{
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kTraceMagic, 8) != 0)
    {
        throw ConfigurationError("not a binary p-bit trace");
    }
    const std::uint64_t width = detail::get_u64(in);
    const std::uint64_t samples = detail::get_u64(in);
    std::vector<Duration> times(samples);
    for (auto &t : times)
    {
        t = Duration{static_cast<Duration::rep>(detail::get_u64(in))};
    }
    SimulationTrace trace(width);
    trace.reserve(samples);
    const std::size_t words = (width + 63) / 64;
    std::vector<LogicLevel> row(width);
    std::vector<std::uint64_t> packed(words);
    for (std::uint64_t s = 0; s < samples; ++s)
    {
        for (auto &w : packed)
        {
            w = detail::get_u64(in);
        }
        for (std::size_t i = 0; i < width; ++i)
        {
            row[i] = from_bit((packed[i / 64] >> (i % 64)) & 1u);
        }
        trace.append(times[s], row);
    }
    return trace;
}

// ---- reading back ----

struct HistogramRow
{
    std::uint64_t state{0};
    std::string label;
    std::uint64_t count{0};
    double probability{0.0};
};

inline std::vector<std::string> split_csv_line(const std::string &line)
{
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (const char c : line)
    {
        if (c == '"')
        {
            quoted = !quoted;
        }
        else if (c == ',' && !quoted)
        {
            cells.push_back(cell);
            cell.clear();
        }
        else if (c != '\r')
        {
            cell += c;
        }
    }
    cells.push_back(cell);
    return cells;
}

inline std::vector<HistogramRow> read_histogram_csv(std::istream &in)
{
    std::string line;
    if (!std::getline(in, line) || line.rfind("state,label,count,probability", 0) != 0)
    {
        throw ConfigurationError("histogram CSV must start with header state,label,count,probability");
    }
    std::vector<HistogramRow> rows;
    while (std::getline(in, line))
    {
        if (line.empty())
        {
            continue;
        }
        const auto cells = split_csv_line(line);
        if (cells.size() != 4)
        {
            throw ConfigurationError("malformed histogram row: " + line);
        }
        try
        {
            rows.push_back({std::stoull(cells[0]), cells[1], std::stoull(cells[2]), std::stod(cells[3])});
        }
        catch (const std::logic_error &)
        {
            throw ConfigurationError("malformed histogram row: " + line);
        }
    }
    return rows;
}

inline Distribution read_distribution_csv(std::istream &in)
{
    std::string line;
    if (!std::getline(in, line) || line.rfind("state_bits,probability", 0) != 0)
    {
        throw ConfigurationError("distribution CSV must start with header state_bits,probability");
    }
    Distribution dist;
    std::vector<std::pair<std::uint64_t, double>> entries;
    while (std::getline(in, line))
    {
        if (line.empty())
        {
            continue;
        }
        const auto cells = split_csv_line(line);
        if (cells.size() != 2 || cells[0].empty() || cells[0].size() > kMaxEnumerationBits)
        {
            throw ConfigurationError("malformed distribution row: " + line);
        }
        if (dist.width == 0)
        {
            dist.width = cells[0].size();
        }
        else if (cells[0].size() != dist.width)
        {
            throw ConfigurationError("distribution rows have mixed widths");
        }
        try
        {
            entries.emplace_back(std::stoull(cells[0], nullptr, 2), std::stod(cells[1]));
        }
        catch (const std::logic_error &)
        {
            throw ConfigurationError("malformed distribution row: " + line);
        }
    }
    dist.probabilities.assign(std::size_t{1} << dist.width, 0.0);
    for (const auto &[s, p] : entries)
    {
        dist.probabilities[s] = p;
    }
    return dist;
}

} // namespace pbit
