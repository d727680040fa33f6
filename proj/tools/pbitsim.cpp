// pbitsim: command-line front end for the p-bit network simulator.
//
// Exit codes: 0 success, 2 validation error, 3 verification failure, 1 anything else.

#include "pbit/io.hpp"

#include "CLI11.hpp"

#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

namespace
{

using namespace pbit;

constexpr int kExitValidation = 2;
constexpr int kExitVerification = 3;

struct CommonOptions
{
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> samples;
    std::optional<double> burn_in;
    std::string out{"."};
    std::string format{"csv"};
    std::size_t top{8};
};

void add_common(CLI::App *cmd, CommonOptions &opts)
{
    cmd->add_option("--seed", opts.seed, "RNG seed (overrides the scenario)");
    cmd->add_option("--samples", opts.samples, "Sample budget (overrides the scenario)");
    cmd->add_option("--burn-in", opts.burn_in, "Burn-in fraction in [0,1) (overrides the scenario)");
    cmd->add_option("--out", opts.out, "Output directory")->capture_default_str();
    cmd->add_option("--format", opts.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    cmd->add_option("--top", opts.top, "Number of modes to print")->capture_default_str();
}

ScenarioConfig load_scenario(const std::string &path, const CommonOptions &opts)
{
    ScenarioConfig config = scenario_from_json(read_json_file(path));
    if (opts.seed)
    {
        config.seed = *opts.seed;
    }
    if (opts.samples)
    {
        config.samples = *opts.samples;
    }
    if (opts.burn_in)
    {
        config.burn_in = *opts.burn_in;
    }
    config.validate();
    return config;
}

std::filesystem::path out_path(const CommonOptions &opts, const std::string &stem)
{
    return std::filesystem::path(opts.out) / (stem + (opts.format == "json" ? ".json" : ".csv"));
}

void print_modes(const EmpiricalDistribution &dist, std::size_t k)
{
    std::cout << "top states (" << dist.total << " samples, " << dist.burn_in_discarded << " burn-in discarded):\n";
    for (const auto &m : mode_report(dist, k))
    {
        std::cout << "  " << std::setw(24) << std::left << m.label << std::right << " " << std::setw(10) << m.count
                  << "  " << format_number(m.probability) << "\n";
    }
}

bool wants(const ScenarioConfig &config, const std::string &output)
{
    return std::find(config.outputs.begin(), config.outputs.end(), output) != config.outputs.end();
}

int cmd_run(const std::string &path, const CommonOptions &opts)
{
    const ScenarioConfig config = load_scenario(path, opts);
    const ScenarioResult result = run_scenario(config);
    std::filesystem::create_directories(opts.out);

    if (opts.format == "json")
    {
        open_output(out_path(opts, "histogram")) << histogram_json(result.histogram).dump(2) << "\n";
    }
    else
    {
        auto out = open_output(out_path(opts, "histogram"));
        write_histogram_csv(out, result.histogram);
    }
    if (wants(config, "distribution"))
    {
        if (!result.oracle)
        {
            throw UnsupportedConfiguration("scenario requests a distribution but the network has no oracle");
        }
        if (opts.format == "json")
        {
            open_output(out_path(opts, "distribution")) << distribution_json(*result.oracle).dump(2) << "\n";
        }
        else
        {
            auto out = open_output(out_path(opts, "distribution"));
            write_distribution_csv(out, *result.oracle);
        }
    }
    if (wants(config, "trace"))
    {
        auto out = open_output(std::filesystem::path(opts.out) / "trace.csv");
        write_trace_csv(out, result.trace);
    }
    if (wants(config, "trace_bin"))
    {
        auto out = open_output(std::filesystem::path(opts.out) / "trace.bin");
        write_trace_binary(out, result.trace);
    }

    nlohmann::json summary{{"scenario", scenario_to_json(config)},
                           {"samples", result.trace.size()},
                           {"histogram_total", result.histogram.total},
                           {"burn_in_discarded", result.histogram.burn_in_discarded}};
    if (result.distance)
    {
        summary["oracle_distance"] = *result.distance;
    }
    nlohmann::json modes = nlohmann::json::array();
    for (const auto &m : mode_report(result.histogram, opts.top))
    {
        modes.push_back({{"state", m.state}, {"label", m.label}, {"count", m.count}, {"probability", m.probability}});
    }
    summary["modes"] = modes;
    open_output(std::filesystem::path(opts.out) / "summary.json") << summary.dump(2) << "\n";

    std::cout << config.name << ": " << result.trace.size() << " samples\n";
    print_modes(result.histogram, opts.top);
    if (result.distance)
    {
        std::cout << "distance to Boltzmann oracle: " << format_number(*result.distance) << "\n";
    }
    return 0;
}

std::vector<double> parse_list(const std::string &text)
{
    std::vector<double> values;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ','))
    {
        try
        {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (used != item.size())
            {
                throw std::invalid_argument(item);
            }
        }
        catch (const std::logic_error &)
        {
            throw ArgumentError("not a number: '" + item + "'");
        }
    }
    if (values.empty())
    {
        throw ArgumentError("empty list");
    }
    return values;
}

int cmd_sweep_tau(const std::string &path, const std::string &taus_text, const CommonOptions &opts)
{
    const ScenarioConfig config = load_scenario(path, opts);
    std::vector<Duration> taus;
    for (const double ms : parse_list(taus_text))
    {
        taus.push_back(ms_to_duration(ms));
    }
    const auto rows = sweep_sampling_time(config, taus);
    std::filesystem::create_directories(opts.out);
    if (opts.format == "json")
    {
        nlohmann::json j = nlohmann::json::array();
        for (const auto &r : rows)
        {
            j.push_back({{"tau_sample_ms", static_cast<double>(r.tau_sample.count()) / 1000.0},
                         {"tau_ratio", r.tau_ratio},
                         {"distance", r.distance}});
        }
        open_output(out_path(opts, "distance")) << j.dump(2) << "\n";
    }
    else
    {
        auto out = open_output(out_path(opts, "distance"));
        write_distance_csv(out, rows);
    }
    std::cout << "tau_sample_ms  tau_ratio  distance\n";
    for (const auto &r : rows)
    {
        std::cout << std::setw(13) << static_cast<double>(r.tau_sample.count()) / 1000.0 << "  " << std::setw(9)
                  << format_number(r.tau_ratio) << "  " << format_number(r.distance) << "\n";
    }
    return 0;
}

int cmd_sweep_retention(const std::string &path, const std::vector<std::string> &plans_text,
                        const std::string &max_ratio, const CommonOptions &opts)
{
    const ScenarioConfig config = load_scenario(path, opts);
    std::vector<RetentionPlan> plans;
    for (const auto &text : plans_text)
    {
        std::vector<Duration> times;
        for (const double ms : parse_list(text))
        {
            times.push_back(ms_to_duration(ms));
        }
        plans.push_back(RetentionPlan::explicit_times(std::move(times)));
    }
    std::optional<double> ratio;
    if (max_ratio != "none")
    {
        ratio = parse_list(max_ratio).front();
    }
    const auto rows = sweep_retention_spread(config, plans, ratio);
    std::filesystem::create_directories(opts.out);
    if (opts.format == "json")
    {
        nlohmann::json j = nlohmann::json::array();
        for (const auto &r : rows)
        {
            j.push_back({{"plan", r.plan},
                         {"min_retention_ms", static_cast<double>(r.min_retention.count()) / 1000.0},
                         {"distance", r.distance}});
        }
        open_output(out_path(opts, "retention")) << j.dump(2) << "\n";
    }
    else
    {
        auto out = open_output(out_path(opts, "retention"));
        write_retention_csv(out, rows);
    }
    for (const auto &r : rows)
    {
        std::cout << r.plan << "  distance " << format_number(r.distance) << "\n";
    }
    return 0;
}

int cmd_verify(const std::vector<std::string> &files, double I0)
{
    bool all_passed = true;
    for (const auto &file : files)
    {
        const GateSpec gate = load_gate(file);
        const VerificationReport report = check_ground_states(gate, I0);
        std::cout << report.summary(gate) << "\n";
        all_passed = all_passed && report.passed;
    }
    return all_passed ? 0 : kExitVerification;
}

int cmd_synth(const std::string &request, const std::string &gates_dir, const std::string &out_file)
{
    GateLibrary library;
    if (!gates_dir.empty() && std::filesystem::is_directory(gates_dir))
    {
        library = GateLibrary::load_directory(gates_dir);
    }
    const VerifiedGate gate = synthesize_from_json(read_json_file(request), library);
    std::cout << gate.report().summary(gate.spec()) << "\n";
    if (out_file.empty())
    {
        std::cout << to_json(gate.spec()).dump(2) << "\n";
    }
    else
    {
        const std::filesystem::path path(out_file);
        if (path.has_parent_path())
        {
            std::filesystem::create_directories(path.parent_path());
        }
        save_gate(path, gate.spec());
        std::cout << "wrote " << out_file << "\n";
    }
    return 0;
}

int cmd_report(const std::string &histogram_file, const std::string &oracle_file, const CommonOptions &opts)
{
    std::ifstream in(histogram_file);
    if (!in)
    {
        throw ConfigurationError("cannot open " + histogram_file);
    }
    std::vector<HistogramRow> rows = read_histogram_csv(in);
    std::uint64_t total = 0;
    for (const auto &r : rows)
    {
        total += r.count;
    }
    std::stable_sort(rows.begin(), rows.end(), [](const HistogramRow &a, const HistogramRow &b) {
        return a.count != b.count ? a.count > b.count : a.state < b.state;
    });
    std::optional<double> distance;
    if (!oracle_file.empty())
    {
        std::ifstream oin(oracle_file);
        if (!oin)
        {
            throw ConfigurationError("cannot open " + oracle_file);
        }
        const Distribution oracle = read_distribution_csv(oin);
        Distribution empirical{oracle.width, std::vector<double>(oracle.probabilities.size(), 0.0)};
        for (const auto &r : rows)
        {
            if (r.state >= empirical.probabilities.size())
            {
                throw ArgumentError("histogram state outside the oracle's state space");
            }
            empirical.probabilities[r.state] = total ? static_cast<double>(r.count) / static_cast<double>(total) : 0.0;
        }
        distance = euclidean_distance(empirical, oracle);
    }
    const std::size_t k = std::min(opts.top, rows.size());
    if (opts.format == "json")
    {
        nlohmann::json j{{"total", total}};
        nlohmann::json modes = nlohmann::json::array();
        for (std::size_t i = 0; i < k; ++i)
        {
            modes.push_back({{"state", rows[i].state}, {"label", rows[i].label}, {"count", rows[i].count},
                             {"probability", total ? static_cast<double>(rows[i].count) / static_cast<double>(total) : 0.0}});
        }
        j["modes"] = modes;
        if (distance)
        {
            j["oracle_distance"] = *distance;
        }
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    std::cout << "total " << total << "\n";
    for (std::size_t i = 0; i < k; ++i)
    {
        std::cout << "  " << std::setw(24) << std::left << rows[i].label << std::right << " " << std::setw(10)
                  << rows[i].count << "  "
                  << format_number(total ? static_cast<double>(rows[i].count) / static_cast<double>(total) : 0.0)
                  << "\n";
    }
    if (distance)
    {
        std::cout << "distance to oracle: " << format_number(*distance) << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Discrete-event simulator for networks of stochastic p-bits"};
    app.require_subcommand(1);

    CommonOptions opts;
    std::string scenario;

    auto *run_cmd = app.add_subcommand("run", "Run a scenario and write histogram/trace/distribution files");
    run_cmd->add_option("scenario", scenario, "Scenario JSON")->required();
    add_common(run_cmd, opts);

    std::string taus{"1,100,200,400"};
    auto *tau_cmd = app.add_subcommand("sweep-tau", "Oracle distance versus sampling time (writes distance.csv)");
    tau_cmd->add_option("scenario", scenario, "Scenario JSON for a single machine")->required();
    tau_cmd->add_option("--taus", taus, "Comma-separated sampling times in ms")->capture_default_str();
    add_common(tau_cmd, opts);

    std::vector<std::string> plans;
    std::string max_ratio{"0.1"};
    auto *ret_cmd = app.add_subcommand("sweep-retention", "Oracle distance for retention-time plans");
    ret_cmd->add_option("scenario", scenario, "Scenario JSON for a single machine")->required();
    ret_cmd->add_option("--plan", plans, "Comma-separated retention times in ms, one per p-bit (repeatable)")
        ->required();
    ret_cmd->add_option("--max-ratio", max_ratio, "Largest allowed tau_sample / min(tau_N), or 'none'")
        ->capture_default_str();
    add_common(ret_cmd, opts);

    std::vector<std::string> gate_files;
    double check_I0 = 1.0;
    auto *verify_cmd = app.add_subcommand("verify", "Re-check gate files by ground-state enumeration");
    verify_cmd->add_option("gatespec", gate_files, "GateSpec JSON files")->required();
    verify_cmd->add_option("--I0", check_I0, "Correlation strength used for the check")->capture_default_str();

    std::string request;
    std::string gates_dir = default_gate_directory().string();
    std::string synth_out;
    auto *synth_cmd = app.add_subcommand("synth", "Synthesize or compose a gate from a truth-table request");
    synth_cmd->add_option("request", request, "Synthesis request JSON")->required();
    synth_cmd->add_option("--gates", gates_dir, "Gate library used to resolve composition parts")
        ->capture_default_str();
    synth_cmd->add_option("--out", synth_out, "Write the GateSpec here instead of stdout");

    std::string histogram_file;
    std::string oracle_file;
    auto *report_cmd = app.add_subcommand("report", "Summarize a histogram CSV, optionally against an oracle");
    report_cmd->add_option("histogram", histogram_file, "histogram.csv")->required();
    report_cmd->add_option("--oracle", oracle_file, "Oracle distribution CSV (state_bits,probability)");
    report_cmd->add_option("--top", opts.top, "Number of modes to print")->capture_default_str();
    report_cmd->add_option("--format", opts.format, "Output format")->check(CLI::IsMember({"csv", "json"}));

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try
    {
        if (*run_cmd)
        {
            return cmd_run(scenario, opts);
        }
        if (*tau_cmd)
        {
            return cmd_sweep_tau(scenario, taus, opts);
        }
        if (*ret_cmd)
        {
            return cmd_sweep_retention(scenario, plans, max_ratio, opts);
        }
        if (*verify_cmd)
        {
            return cmd_verify(gate_files, check_I0);
        }
        if (*synth_cmd)
        {
            return cmd_synth(request, gates_dir, synth_out);
        }
        if (*report_cmd)
        {
            return cmd_report(histogram_file, oracle_file, opts);
        }
    }
    catch (const VerificationError &e)
    {
        std::cerr << "verification failed: " << e.what() << "\n";
        return kExitVerification;
    }
    catch (const NotFoundError &e)
    {
        std::cerr << "verification failed: " << e.what() << "\n";
        return kExitVerification;
    }
    catch (const ConfigurationError &e)
    {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitValidation;
    }
    catch (const UnsupportedConfiguration &e)
    {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitValidation;
    }
    catch (const std::invalid_argument &e)
    {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitValidation;
    }
    catch (const std::out_of_range &e)
    {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitValidation;
    }
    catch (const std::length_error &e)
    {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitValidation;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
