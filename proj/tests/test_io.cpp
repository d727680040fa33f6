#include "pbit/io.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace pbit;

namespace
{

ScenarioResult small_run(std::uint64_t seed)
{
    ScenarioConfig c;
    c.samples = 3000;
    c.seed = seed;
    return run_scenario(c);
}

std::string histogram_text(const EmpiricalDistribution &d)
{
    std::ostringstream out;
    write_histogram_csv(out, d);
    return out.str();
}

} // namespace

TEST(FormatNumber, TenSignificantDigits)
{
    EXPECT_EQ(format_number(0.5), "0.5");
    EXPECT_EQ(format_number(1.0 / 3.0), "0.3333333333");
    EXPECT_EQ(format_number(0.0), "0");
}

TEST(HistogramCsv, HeaderRowsAndReadBack)
{
    const auto r = small_run(1);
    const std::string text = histogram_text(r.histogram);
    EXPECT_EQ(text.rfind("state,label,count,probability\n", 0), 0u);
    EXPECT_NE(text.find("\n7,111,"), std::string::npos);
    std::istringstream in(text);
    const auto rows = read_histogram_csv(in);
    ASSERT_EQ(rows.size(), 8u);
    std::uint64_t total = 0;
    for (const auto &row : rows)
    {
        EXPECT_EQ(row.count, r.histogram.counts.count(row.state) ? r.histogram.counts.at(row.state) : 0u);
        EXPECT_NEAR(row.probability, r.histogram.probability(row.state), 1e-9);
        total += row.count;
    }
    EXPECT_EQ(total, r.histogram.total);
}

TEST(HistogramCsv, WordLabelsAreQuotedFree)
{
    // Word labels contain spaces and '=' but no commas.
    ScenarioConfig c;
    c.builder = "rca4";
    c.I0 = 2.5;
    c.samples = 50;
    c.clamps = {{"A", 1}, {"B", 2}};
    const auto r = run_scenario(c);
    std::istringstream in(histogram_text(r.histogram));
    const auto rows = read_histogram_csv(in);
    ASSERT_FALSE(rows.empty());
    EXPECT_EQ(rows.front().label.rfind("A=1 B=2 S=", 0), 0u);
}

TEST(HistogramCsv, RejectsMalformed)
{
    std::istringstream bad_header("state,count\n");
    EXPECT_THROW(read_histogram_csv(bad_header), ConfigurationError);
    std::istringstream bad_row("state,label,count,probability\n1,01,x,0.5\n");
    EXPECT_THROW(read_histogram_csv(bad_row), ConfigurationError);
}

TEST(DistributionCsv, RoundTrip)
{
    const auto r = small_run(1);
    std::ostringstream out;
    write_distribution_csv(out, *r.oracle);
    EXPECT_EQ(out.str().rfind("state_bits,probability\n000,", 0), 0u);
    std::istringstream in(out.str());
    const Distribution back = read_distribution_csv(in);
    EXPECT_EQ(back.width, 3u);
    for (std::size_t s = 0; s < 8; ++s)
    {
        EXPECT_NEAR(back[s], (*r.oracle)[s], 1e-10);
    }
    std::istringstream mixed("state_bits,probability\n00,0.5\n100,0.5\n");
    EXPECT_THROW(read_distribution_csv(mixed), ConfigurationError);
}

TEST(DistanceCsv, Header)
{
    std::vector<TauSweepRow> rows(2);
    rows[0].tau_ratio = 0.005;
    rows[0].distance = 0.25;
    rows[1].tau_ratio = 1.0;
    rows[1].distance = 0.125;
    std::ostringstream out;
    write_distance_csv(out, rows);
    EXPECT_EQ(out.str(), "tau_ratio,distance\n0.005,0.25\n1,0.125\n");
}

TEST(TraceCsv, Layout)
{
    SimulationTrace t(3);
    const std::vector<LogicLevel> row{LogicLevel::High, LogicLevel::Low, LogicLevel::High};
    t.append(Duration{1000}, row);
    std::ostringstream out;
    write_trace_csv(out, t);
    EXPECT_EQ(out.str(), "time_us,pbit_0,pbit_1,pbit_2\n1000,1,0,1\n");
}

TEST(TraceBinary, RoundTripWide)
{
    // 70 p-bits span two packed words.
    SimulationTrace t(70);
    std::vector<LogicLevel> row(70, LogicLevel::Low);
    for (std::size_t s = 0; s < 5; ++s)
    {
        row[s] = LogicLevel::High;
        row[69 - s] = LogicLevel::High;
        t.append(Duration{static_cast<Duration::rep>(100 * (s + 1))}, row);
    }
    std::stringstream buf;
    write_trace_binary(buf, t);
    const std::string bytes = buf.str();
    EXPECT_EQ(bytes.size(), 8u + 8 + 8 + 5 * 8 + 5 * 2 * 8);
    EXPECT_EQ(bytes.substr(0, 8), "PBITTRC1");
    EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 70u); // width, little endian
    const SimulationTrace back = read_trace_binary(buf);
    EXPECT_EQ(back, t);
}

TEST(TraceBinary, RejectsGarbage)
{
    std::istringstream wrong("NOTATRACE_______");
    EXPECT_THROW(read_trace_binary(wrong), ConfigurationError);
    std::istringstream truncated(std::string("PBITTRC1") + std::string(4, '\0'));
    EXPECT_THROW(read_trace_binary(truncated), ConfigurationError);
}

TEST(Reruns, ByteIdenticalOutputs)
{
    const auto a = small_run(5);
    const auto b = small_run(5);
    EXPECT_EQ(histogram_text(a.histogram), histogram_text(b.histogram));
    std::ostringstream ta;
    std::ostringstream tb;
    write_trace_csv(ta, a.trace);
    write_trace_csv(tb, b.trace);
    EXPECT_EQ(ta.str(), tb.str());
    EXPECT_EQ(histogram_json(a.histogram).dump(), histogram_json(b.histogram).dump());
}
